//! Ground state `Q` of `-ΔQ + Q - Q^{1+4/N} = 0` by shooting, with the derived
//! scalar constants (mass, sharp Gagliardo–Nirenberg constant, critical energy).
//!
//! The radial ODE `Q'' + (N-1)/r Q' - Q + Q^p = 0`, `Q'(0) = 0`, is integrated
//! with fixed-step RK4 from a series start near the origin. The shooting
//! parameter `Q(0)` is bisected: overshoot crosses zero, undershoot turns back
//! up. Past the point where the bisected trajectory departs from the decaying
//! branch the solution is continued by its exponential asymptote
//! `c r^{-(N-1)/2} e^{-r}`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};

#[derive(Debug, Clone)]
pub struct GroundState {
    grid: Arc<RadialGrid>,
    q: RadialField,
    dq: RadialField,
    /// Fine shooting solution for interpolation off the grid.
    fine: Arc<FineSolution>,
    pub q0: f64,
    pub mass: f64,
    pub gn_constant: f64,
    pub e_crit: f64,
    /// `‖-ΔQ + Q - Q^p‖₂ / ‖Q‖₂` with the grid Laplacian.
    pub pde_residual: f64,
    dim: usize,
}

#[derive(Debug)]
pub struct FineSolution {
    dim: usize,
    r0: f64,
    h: f64,
    q: Vec<f64>,
    v: Vec<f64>,
    q0: f64,
    /// Tail `c r^{-nu} e^{-r} (1 + a1/r)`, `nu = (N-1)/2`, `a1 = nu(nu-1)/2`,
    /// beyond `r_switch`.
    r_switch: f64,
    tail_c: f64,
    /// Separate matching coefficient for the derivative so that `eval_deriv`
    /// is continuous at `r_switch` despite the growing-mode contamination of
    /// the shot slope there.
    tail_d: f64,
}

fn tail_factor(nu: f64, r: f64) -> f64 {
    let a1 = nu * (nu - 1.0) / 2.0;
    r.powf(-nu) * (-r).exp() * (1.0 + a1 / r)
}

fn tail_factor_deriv(nu: f64, r: f64) -> f64 {
    let a1 = nu * (nu - 1.0) / 2.0;
    r.powf(-nu) * (-r).exp() * (-(1.0 + nu / r) * (1.0 + a1 / r) - a1 / (r * r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    Crossed(f64),
    TurnedUp(f64),
    Decayed,
}

/// Coefficients of `Q = b + c2 r^2 + c4 r^4 + O(r^6)` near the origin.
fn series_coeffs(dim: usize, p: f64, b: f64) -> (f64, f64) {
    let n = dim as f64;
    let c2 = (b - b.powf(p)) / (2.0 * n);
    let c4 = c2 * (1.0 - p * b.powf(p - 1.0)) / (4.0 * (n + 2.0));
    (c2, c4)
}

fn rhs(dim: usize, p: f64, r: f64, q: f64, v: f64) -> (f64, f64) {
    let nl = if q > 0.0 { q.powf(p) } else { -(-q).powf(p) };
    (v, q - nl - (dim as f64 - 1.0) / r * v)
}

/// One RK4 step of the shooting ODE.
fn rk4(dim: usize, p: f64, r: f64, q: f64, v: f64, h: f64) -> (f64, f64) {
    let (k1q, k1v) = rhs(dim, p, r, q, v);
    let (k2q, k2v) = rhs(dim, p, r + 0.5 * h, q + 0.5 * h * k1q, v + 0.5 * h * k1v);
    let (k3q, k3v) = rhs(dim, p, r + 0.5 * h, q + 0.5 * h * k2q, v + 0.5 * h * k2v);
    let (k4q, k4v) = rhs(dim, p, r + h, q + h * k3q, v + h * k3v);
    (
        q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Integrate from the series start and classify the trajectory.
fn shoot(dim: usize, p: f64, b: f64, h: f64, r_end: f64) -> Shot {
    let r0 = 1e-3;
    let (c2, c4) = series_coeffs(dim, p, b);
    let mut q = b + c2 * r0 * r0 + c4 * r0.powi(4);
    let mut v = 2.0 * c2 * r0 + 4.0 * c4 * r0.powi(3);
    let mut r = r0;
    while r < r_end {
        let (qn, vn) = rk4(dim, p, r, q, v, h);
        r += h;
        if qn <= 0.0 {
            return Shot::Crossed(r);
        }
        if vn > 0.0 {
            return Shot::TurnedUp(r);
        }
        q = qn;
        v = vn;
    }
    Shot::Decayed
}

impl FineSolution {
    fn build(dim: usize, p: f64, b: f64, h: f64, r_end: f64) -> Self {
        let r0 = 1e-3;
        let (c2, c4) = series_coeffs(dim, p, b);
        let mut q = vec![b + c2 * r0 * r0 + c4 * r0.powi(4)];
        let mut v = vec![2.0 * c2 * r0 + 4.0 * c4 * r0.powi(3)];
        let mut r = r0;
        let mut r_switch = r_end;
        let nu = (dim as f64 - 1.0) / 2.0;
        while r < r_end {
            let (qn, vn) = rk4(dim, p, r, *q.last().unwrap(), *v.last().unwrap(), h);
            r += h;
            // leave the decaying branch before bisection roundoff amplifies
            if (qn < 1e-6 * b && vn < 0.0) || qn <= 0.0 || vn > 0.0 {
                r_switch = r - h;
                break;
            }
            q.push(qn);
            v.push(vn);
        }
        r_switch = r_switch.min(r_end);
        let tail_c = *q.last().unwrap() / tail_factor(nu, r_switch);
        let tail_d = *v.last().unwrap() / tail_factor_deriv(nu, r_switch);
        FineSolution { dim, r0, h, q, v, q0: b, r_switch, tail_c, tail_d }
    }

    fn series(&self) -> (f64, f64) {
        series_coeffs(self.dim, 1.0 + 4.0 / self.dim as f64, self.q0)
    }

    fn accel(&self, i: usize) -> f64 {
        let r = self.r0 + i as f64 * self.h;
        let p = 1.0 + 4.0 / self.dim as f64;
        let (_, d) = rhs(self.dim, p, r, self.q[i], self.v[i]);
        d
    }

    pub fn eval(&self, r: f64) -> f64 {
        let nu = (self.dim as f64 - 1.0) / 2.0;
        if r >= self.r_switch {
            return self.tail_c * tail_factor(nu, r);
        }
        if r <= self.r0 {
            let (c2, c4) = self.series();
            return self.q0 + c2 * r * r + c4 * r * r * r * r;
        }
        let (i, t) = self.segment(r);
        hermite(t, self.h, self.q[i], self.v[i], self.q[i + 1], self.v[i + 1])
    }

    pub fn eval_deriv(&self, r: f64) -> f64 {
        let nu = (self.dim as f64 - 1.0) / 2.0;
        if r >= self.r_switch {
            return self.tail_d * tail_factor_deriv(nu, r);
        }
        if r <= self.r0 {
            let (c2, c4) = self.series();
            return 2.0 * c2 * r + 4.0 * c4 * r * r * r;
        }
        let (i, t) = self.segment(r);
        hermite(t, self.h, self.v[i], self.accel(i), self.v[i + 1], self.accel(i + 1))
    }

    fn segment(&self, r: f64) -> (usize, f64) {
        let x = (r - self.r0) / self.h;
        let i = (x.floor() as usize).min(self.q.len().saturating_sub(2));
        (i, x - i as f64)
    }
}

/// Cubic Hermite basis on a segment of width `h` with endpoint values and
/// derivatives; globally C1 across segments.
fn hermite(t: f64, h: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    f0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + d0 * h * (t3 - 2.0 * t2 + t)
        + f1 * (-2.0 * t3 + 3.0 * t2)
        + d1 * h * (t3 - t2)
}

/// Solve for the ground state on `grid`. `tol` bounds the relative width of the
/// final shooting bracket (and therefore the trajectory's departure from the
/// decaying branch); it must be at least 1e-12.
pub fn solve_ground_state(
    dim: usize,
    grid: Arc<RadialGrid>,
    tol: f64,
) -> Result<GroundState> {
    if dim == 0 || tol < 1e-12 {
        return Err(Error::Config("dim must be >= 1 and tol >= 1e-12".into()));
    }
    if grid.dim() != dim {
        return Err(Error::GridMismatch);
    }
    let p = 1.0 + 4.0 / dim as f64;
    let r_end = grid.r_max().max(25.0);

    // bracket the shooting parameter: small b turns up, large b crosses zero
    let h_coarse = 2e-3;
    let mut lo = None;
    let mut hi = None;
    let mut b = 1.05; // above the b = 1 fixed point of the nonlinearity
    for _ in 0..64 {
        match shoot(dim, p, b, h_coarse, r_end) {
            Shot::TurnedUp(_) | Shot::Decayed => lo = Some(b),
            Shot::Crossed(_) => {
                hi = Some(b);
                break;
            }
        }
        b *= 1.25;
    }
    let (lo, hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => return Err(Error::ShootingBracketExhausted),
    };
    // bisect all the way to the floating-point floor: the shooting error grows
    // like e^r, so every bit of the bracket buys tail accuracy
    let bisect = |mut lo: f64, mut hi: f64, h: f64| -> f64 {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            match shoot(dim, p, mid, h, r_end) {
                Shot::Crossed(_) => hi = mid,
                _ => lo = mid,
            }
        }
        0.5 * (lo + hi)
    };
    let h_fine = 2e-4;
    let b_coarse = bisect(lo, hi, h_coarse);
    // re-bracket at the final step size (the discrete separatrix shifts with h)
    // and bisect again so the bracket matches the trajectory actually kept
    let margin = 1e-5 * b_coarse;
    let mut lo = b_coarse - margin;
    let mut hi = b_coarse + margin;
    for _ in 0..20 {
        if matches!(shoot(dim, p, lo, h_fine, r_end), Shot::Crossed(_)) {
            lo -= hi - lo;
        } else {
            break;
        }
    }
    for _ in 0..20 {
        if matches!(shoot(dim, p, hi, h_fine, r_end), Shot::Crossed(_)) {
            break;
        } else {
            hi += hi - lo;
        }
    }
    if matches!(shoot(dim, p, lo, h_fine, r_end), Shot::Crossed(_))
        || !matches!(shoot(dim, p, hi, h_fine, r_end), Shot::Crossed(_))
    {
        return Err(Error::ShootingBracketExhausted);
    }
    let b_star = bisect(lo, hi, h_fine);
    let fine = Arc::new(FineSolution::build(dim, p, b_star, h_fine, r_end));

    let q = RadialField::from_real_fn(grid.clone(), |r| fine.eval(r));
    let dq = RadialField::from_real_fn(grid.clone(), |r| fine.eval_deriv(r));

    let mass = q.l2_norm_sq();
    let gn_constant = (1.0 + 2.0 / dim as f64) / mass.powf(2.0 / dim as f64);
    let e_crit = energy_crit(&q)?;

    // grid-level PDE residual (excluding the outflow node)
    let lap = q.laplacian()?;
    let res = q
        .map(|z| {
            let qv = z.re.max(0.0);
            Complex64::new(qv - qv.powf(p), 0.0)
        })
        .sub(&lap)?;
    let n = grid.len();
    let mut res = res;
    res.values_mut()[n - 1] = Complex64::new(0.0, 0.0);
    let pde_residual = res.l2_norm_sq().sqrt() / mass.sqrt();

    Ok(GroundState {
        grid,
        q,
        dq,
        fine,
        q0: b_star,
        mass,
        gn_constant,
        e_crit,
        pde_residual,
        dim,
    })
}

impl GroundState {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn q(&self) -> &RadialField {
        &self.q
    }
    /// Exact (ODE-level) radial derivative `Q'` sampled on the grid.
    pub fn dq(&self) -> &RadialField {
        &self.dq
    }
    pub fn fine(&self) -> &Arc<FineSolution> {
        &self.fine
    }
    pub fn power(&self) -> f64 {
        1.0 + 4.0 / self.dim as f64
    }

    /// `ΛQ = (N/2) Q + r Q'` using the ODE-level derivative.
    pub fn lambda_q(&self) -> RadialField {
        let half_n = self.dim as f64 / 2.0;
        let grid = self.grid.clone();
        RadialField::from_real_fn(grid, |r| {
            half_n * self.fine.eval(r) + r * self.fine.eval_deriv(r)
        })
    }

    pub fn scalars(&self) -> GroundStateScalars {
        GroundStateScalars {
            dim: self.dim,
            q0: self.q0,
            mass: self.mass,
            gn_constant: self.gn_constant,
            e_crit: self.e_crit,
            pde_residual: self.pde_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateScalars {
    pub dim: usize,
    pub q0: f64,
    pub mass: f64,
    pub gn_constant: f64,
    pub e_crit: f64,
    pub pde_residual: f64,
}

/// `E_crit(f) = ½‖∇f‖₂² − (1/(2+4/N))‖f‖_{2+4/N}^{2+4/N}`.
pub fn energy_crit(f: &RadialField) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::Config("non-finite field".into()));
    }
    let p = 2.0 + 4.0 / f.grid().dim() as f64;
    let lp: f64 = f
        .abs_sq()
        .iter()
        .zip(f.grid().weights())
        .map(|(&m, &w)| w * m.powf(p / 2.0))
        .sum();
    Ok(0.5 * f.grad_norm_sq() - lp / p)
}

/// Ratio of `‖f‖_{2+4/N}^{2+4/N}` to the sharp Gagliardo–Nirenberg bound
/// `(1+2/N)(‖f‖₂/‖Q‖₂)^{4/N} ‖∇f‖₂²`; equals 1 exactly at `f = Q`.
pub fn gn_check(f: &RadialField, gs: &GroundState) -> Result<f64> {
    let l2 = f.l2_norm_sq();
    if l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let n = f.grid().dim() as f64;
    let p = 2.0 + 4.0 / n;
    let lp: f64 = f
        .abs_sq()
        .iter()
        .zip(f.grid().weights())
        .map(|(&m, &w)| w * m.powf(p / 2.0))
        .sum();
    let bound = (1.0 + 2.0 / n) * (l2 / gs.mass).powf(2.0 / n) * f.grad_norm_sq();
    Ok(lp / bound)
}
