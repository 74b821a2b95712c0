use std::sync::Arc;
use blowup_lab::grid::GridSpec;
use blowup_lab::ground_state::solve_ground_state;
use blowup_lab::linops::LinearizedPair;
use num_complex::Complex64;

fn res5(p: &LinearizedPair, lo: f64, hi: f64) -> [f64; 5] {
    let q = p.gs().q();
    let lam_q = p.gs().lambda_q();
    let y2q = q.mul_radial(|r| r * r);
    let w = |f: &blowup_lab::grid::RadialField| f.l2_norm_sq_window(lo, hi).sqrt();
    [
        w(&p.apply_lminus(q)),
        w(&p.apply_lplus(&lam_q).add(&q.scale(Complex64::new(2.0, 0.0))).unwrap()),
        w(&p.apply_lminus(&y2q).add(&lam_q.scale(Complex64::new(4.0, 0.0))).unwrap()),
        w(&p.apply_lplus(p.rho()).sub(&y2q).unwrap()),
        w(&p.apply_lminus(q).mul_radial(|r| r)),
    ]
}

fn main() {
    let mk = |factor: f64| {
        let spec = GridSpec::standard(1);
        let spec = if factor > 1.0 { spec.refined(factor) } else { spec };
        let gs = solve_ground_state(1, spec.build().unwrap(), 1e-12).unwrap();
        LinearizedPair::build(Arc::new(gs)).unwrap()
    };
    let (p1, p2) = (mk(1.0), mk(2.0));
    let names = ["lminus_q", "lplus_lambda_q", "lminus_y2q", "lplus_rho", "lminus_yq"];
    for (lo, hi) in [(0.01, 24.0), (0.05, 20.0), (0.1, 10.0), (0.3, 5.0)] {
        let a = res5(&p1, lo, hi);
        let b = res5(&p2, lo, hi);
        println!("window [{lo},{hi}]:");
        for i in 0..5 {
            println!("  {}: {:.3e} -> {:.3e} order={:.2}", names[i], a[i], b[i], (a[i] / b[i]).log2());
        }
    }
}
