use std::sync::Arc;

use std::time::Instant;
use blowup_lab::grid::GridSpec;
use blowup_lab::ground_state::solve_ground_state;
use blowup_lab::law::{self, LawParams};
use blowup_lab::linops::LinearizedPair;
use blowup_lab::profile::solve_s000;
use blowup_lab::sim::{self, SimConfig};

fn env_f(name: &str, default: f64) -> f64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() {
    let t0 = Instant::now();
    let (dim, sigma) = (2usize, 0.25f64);
    let grid = GridSpec::standard(dim).build().unwrap();
    let gs = solve_ground_state(dim, grid, 1e-12).unwrap();
    let pair = LinearizedPair::build(Arc::new(gs)).unwrap();
    let prof = solve_s000(&pair, sigma).unwrap();
    let p = LawParams::new(&prof.betas, 0.0, Some(0.5)).unwrap();
    let lam1 = env_f("LAM1", 0.05);
    let s1 = law::eval_f(lam1, &p).unwrap();
    let init = law::choose_initial(s1, &p, &prof).unwrap();
    let t1 = law::t_app(s1, &p).unwrap();
    let t_end = env_f("TEND", 3.0e-4);
    let dt = env_f("DT", 2e-7);
    let lab = GridSpec {
        r_max: 15.0,
        growth: 1.0 + env_f("GROWTH", 0.03),
        h: env_f("H", 5e-3),
        ..GridSpec::standard(dim)
    }.build().unwrap();
    println!("setup {:?}: lam1={} b1={:.6} t1={t1:.6e}", t0.elapsed(), init.lambda1, init.b1);

    let run_with = |c: f64, snaps: Vec<f64>| -> blowup_lab::sim::SimTrace {
        let pf = prof.assemble_profile(init.lambda1, init.b1).unwrap();
        let u0 = sim::rescale_to_lab(&pf, init.lambda1, init.b1, 0.0, lab.clone()).unwrap();
        let u0 = u0.scale(num_complex::Complex64::new(c, 0.0));
        let cfg = SimConfig {
            dim, sigma, sign: -1.0,
            t_start: t1, t_end,
            dt_init: dt, dt_min: 1e-12, step_tol: 0.0,
            mass_tol: 1e-4, energy_tol: 1e-3,
            grad_ceiling: 3e3, sponge_strength: 5.0,
            snapshot_times: snaps,
        };
        sim::run(&cfg, &u0).unwrap()
    };
    let cstar = env_f("AMP", 1.0);
    let tstar_guess = env_f("TSTAR", t_end + 2e-5);
    let nsnap = env_f("NSNAP", 120.0) as usize;
    let t_first = law::t_app(law::eval_j(0.98 * lam1, &p).unwrap(), &p).unwrap();
    let snaps: Vec<f64> = (0..nsnap).map(|i| {
        let f = i as f64 / (nsnap - 1) as f64;
        tstar_guess - (tstar_guess - t_first) * ((tstar_guess - t_end) / (tstar_guess - t_first)).powf(f)
    }).collect();
    let trace = run_with(cstar, snaps);
    println!("final run: status={:?} steps={} snaps={} grad ratio={:.1}",
        trace.status, trace.times.len(), trace.snapshots.len(),
        trace.gradnorm.last().unwrap() / trace.gradnorm[0]);
    let t3 = Instant::now();
    let mut prev: Option<(f64, f64, f64, f64)> = None;
    let (mut ts, mut ls) = (Vec::new(), Vec::new());
    let mut last = (0.0, 0.0, 0.0);
    for (tsnap, field) in &trace.snapshots {
        let guess = match prev {
            None => {
                let s = law::s_of_t(*tsnap, &p).unwrap();
                blowup_lab::modulation::Guess {
                    lambda: law::invert_j(s, &p).unwrap(),
                    b: law::b_app(s, &p).unwrap(),
                    gamma: s - s1,
                }
            }
            Some((tp, lp, bp, gp)) => blowup_lab::modulation::Guess {
                lambda: lp, b: bp, gamma: gp + (tsnap - tp) / (lp * lp),
            },
        };
        match blowup_lab::modulation::decompose(field, &guess, &prof, pair.rho(), 1.0) {
            Ok(st) => {
                prev = Some((*tsnap, st.lambda, st.b, st.gamma));
                last = (*tsnap, st.lambda, st.b);
                ts.push(*tsnap);
                ls.push(st.lambda);
                if ts.len() % 12 == 0 || ts.len() <= 2 {
                    println!("t={tsnap:.5e} lam={:.5} b={:.4} eps={:.4}", st.lambda, st.b, st.eps_h1());
                }
            }
            Err(e) => println!("t={tsnap:.5e} guess_lam={:.5} FAIL: {e}", guess.lambda),
        }
    }
    if ts.is_empty() { return; }
    // trim to the monotone concentration phase (everything up to the lambda minimum)
    let imin = (0..ls.len()).min_by(|&a, &b| ls[a].partial_cmp(&ls[b]).unwrap()).unwrap();
    ts.truncate(imin + 1);
    ls.truncate(imin + 1);
    println!("decompose {:?}: {} of {}, lam {:.5} -> {:.5} ({:.3} decades)",
        t3.elapsed(), ts.len(), trace.snapshots.len(), ls[0], ls.last().unwrap(),
        (ls[0] / ls.last().unwrap()).log10());
    println!("local blow-up time estimate: {:.5e}", last.0 + last.1 * last.1 / (2.0 * last.2));
    let tmax = *ts.last().unwrap();
    let mut best: Option<(f64, blowup_lab::rate::RateFit)> = None;
    for i in 0..800 {
        let tstar = tmax + 1e-6 + 1.0e-3 * i as f64 / 799.0;
        let shifted: Vec<f64> = ts.iter().map(|&t| t - tstar).collect();
        if let Ok(fit) = blowup_lab::rate::fit_rate(&shifted, &ls) {
            if best.as_ref().map_or(true, |(_, b)| fit.residual < b.residual) {
                best = Some((tstar, fit));
            }
        }
    }
    match best {
        Some((tstar, fit)) => println!(
            "best tstar={tstar:.5e}: exponent={:.4} (target {:.4}) logc={:.4} res={:.3e} res_pow={:.3e} decades={:.3}",
            fit.exponent, 1.0 / (1.0 + sigma), fit.log_coeff, fit.residual, fit.residual_power_only, fit.decades),
        None => println!("no admissible fit in scan"),
    }
}
