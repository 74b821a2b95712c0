//! The scalar blow-up law: the integrals `J` and `𝓕`, their inverses, the
//! approximate trajectory `(λ_app, b_app, t_app)`, the energy-matched initial
//! data `(λ₁, b₁)`, and the Lambert-W bracket report used by the rate analysis.
//!
//! With `α = 2 − 2σ` and `k = 2β₁/(2−α)` the radicand of the law is
//! `R(μ) = β′₁ − k log μ` (plus `C₀ μ^{2−α}` for the energy-shifted version),
//! and
//!
//! ```text
//! J(λ) = ∫_λ^{λ₀} dμ / [ μ^{α/2+1} √R(μ) ],   λ_app = J⁻¹,
//! b_app(s) = λ_app(s)^{α/2} √R(λ_app(s)),
//! t_app(s) = −∫_s^∞ λ_app(μ)² dμ.
//! ```
//!
//! All integrals are computed after the substitution `μ = e^{-v}`, which turns
//! the `μ^{-α/2-1}` endpoint growth into a smooth exponential in `v`; `t_app`'s
//! infinite tail in `s` becomes a rapidly decaying exponential over a finite
//! `v`-window via `dμ = J'(λ)dλ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambert::{wm1_bracket, wm1_of_exponent};
use crate::profile::{Betas, ProfileOrder1};
use crate::quad;

/// Parameters of the blow-up law for one choice of σ and target energy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LawParams {
    pub sigma: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta1_prime: f64,
    /// `C₀ = 8E₀/‖|y|Q‖₂²`, the energy shift in the `𝓕` radicand.
    pub c0: f64,
    /// Upper integration limit; must leave the radicand positive on `(0, λ₀]`.
    pub lambda0: f64,
    pub e0: f64,
    /// `‖|y|Q‖₂²`
    pub m2: f64,
}

pub const LAMBDA0_DEFAULT: f64 = 1e-2;

impl LawParams {
    /// Build from the profile coefficients; `lambda0 = None` uses the default
    /// `1e-2`. Fails if `α ∉ (0,2)`, `β₁ ≤ 0`, or the radicand positivity
    /// condition `−2β₁/(2−α) log λ₀ + β′₁ + C₀ λ₀^{2−α} > 0` is violated.
    pub fn new(betas: &Betas, e0: f64, lambda0: Option<f64>) -> Result<Self> {
        let lambda0 = lambda0.unwrap_or(LAMBDA0_DEFAULT);
        let p = LawParams {
            sigma: betas.sigma,
            alpha: betas.alpha,
            beta1: betas.beta1,
            beta2: betas.beta2,
            beta1_prime: betas.beta1_prime,
            c0: 8.0 * e0 / betas.m2,
            lambda0,
            e0,
            m2: betas.m2,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::Config(format!("alpha must be in (0,2), got {}", self.alpha)));
        }
        if !(self.beta1 > 0.0) {
            return Err(Error::Config(format!("beta1 must be positive, got {}", self.beta1)));
        }
        if !(self.lambda0 > 0.0) {
            return Err(Error::Config(format!("lambda0 must be positive, got {}", self.lambda0)));
        }
        if !(self.radicand_f(self.lambda0) > 0.0) {
            return Err(Error::Config(format!(
                "radicand not positive at lambda0 = {}: {}",
                self.lambda0,
                self.radicand_f(self.lambda0)
            )));
        }
        Ok(())
    }

    /// `k = 2β₁/(2−α) = β₁/σ`
    pub fn k(&self) -> f64 {
        2.0 * self.beta1 / (2.0 - self.alpha)
    }

    /// Radicand of `J`: `β′₁ − k log λ` (equal to
    /// `−2β₁/(2−α)² + 2β₂/(2−α) − 2β₁/(2−α)·log λ` by the β identity).
    pub fn radicand_j(&self, lambda: f64) -> f64 {
        self.beta1_prime - self.k() * lambda.ln()
    }

    /// Radicand of `𝓕`: `β′₁ − k log λ + C₀ λ^{2−α}`.
    pub fn radicand_f(&self, lambda: f64) -> f64 {
        self.radicand_j(lambda) + self.c0 * lambda.powf(2.0 - self.alpha)
    }

    /// Smallest value of the `𝓕` radicand on `[lambda, lambda0]`.
    fn min_radicand_f(&self, lambda: f64) -> f64 {
        let mut m = self.radicand_f(lambda).min(self.radicand_f(self.lambda0));
        // interior critical point of −k log μ + C₀ μ^{2−α} (only for C₀ > 0)
        if self.c0 > 0.0 {
            let ta = 2.0 - self.alpha;
            let mu = (self.k() / (self.c0 * ta)).powf(1.0 / ta);
            if mu > lambda && mu < self.lambda0 {
                m = m.min(self.radicand_f(mu));
            }
        }
        m
    }
}

fn check_lambda(lambda: f64, p: &LawParams) -> Result<()> {
    if !(lambda > 0.0 && lambda <= p.lambda0) {
        return Err(Error::OutOfRange(format!(
            "lambda = {lambda} outside (0, lambda0 = {}]",
            p.lambda0
        )));
    }
    Ok(())
}

/// `J(λ) = ∫_λ^{λ₀} dμ/[μ^{α/2+1}√(β′₁ − k log μ)]`, via `μ = e^{-v}`.
pub fn eval_j(lambda: f64, p: &LawParams) -> Result<f64> {
    check_lambda(lambda, p)?;
    if !(p.radicand_j(lambda) > 0.0 && p.radicand_j(p.lambda0) > 0.0) {
        return Err(Error::LawDomainViolated);
    }
    Ok(j_of_v(-lambda.ln(), p))
}

/// `𝓕(λ)`: same integral with the `C₀ μ^{2−α}` energy shift in the radicand.
pub fn eval_f(lambda: f64, p: &LawParams) -> Result<f64> {
    check_lambda(lambda, p)?;
    if !(p.min_radicand_f(lambda) > 0.0) {
        return Err(Error::LawDomainViolated);
    }
    Ok(f_of_v(-lambda.ln(), p))
}

/// `J` as a function of `v = −log λ` (no domain checks).
fn j_of_v(v1: f64, p: &LawParams) -> f64 {
    let (a2, bp, k) = (0.5 * p.alpha, p.beta1_prime, p.k());
    let v0 = -p.lambda0.ln();
    quad::integrate(|v: f64| ((a2 * v).exp()) / (bp + k * v).sqrt(), v0, v1, 1e-12)
}

fn f_of_v(v1: f64, p: &LawParams) -> f64 {
    let (a2, bp, k, c0, ta) = (0.5 * p.alpha, p.beta1_prime, p.k(), p.c0, 2.0 - p.alpha);
    let v0 = -p.lambda0.ln();
    quad::integrate(
        |v: f64| ((a2 * v).exp()) / (bp + k * v + c0 * (-ta * v).exp()).sqrt(),
        v0,
        v1,
        1e-12,
    )
}

/// Invert a strictly increasing function of `v = −log λ` by bracketed Newton.
fn invert_increasing<F, D>(s: f64, v0: f64, f: F, df: D) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(s > 0.0) {
        return Err(Error::OutOfRange(format!("target {s} not positive")));
    }
    // bracket: double the v-window until f exceeds s
    let mut lo = v0;
    let mut step = 1.0;
    let mut hi = v0 + step;
    let mut f_hi = f(hi);
    while f_hi < s {
        if hi - v0 > 700.0 {
            return Err(Error::OutOfRange(format!("target {s} beyond invertible range")));
        }
        lo = hi;
        step *= 2.0;
        hi = v0 + step;
        f_hi = f(hi);
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fv = f(v);
        if (fv - s).abs() <= 1e-13 * s.abs().max(1e-300) {
            return Ok(v);
        }
        if fv > s {
            hi = v;
        } else {
            lo = v;
        }
        // when f is nearly flat (t_app's tail) the value gap stalls at the
        // quadrature noise floor; a tight v-bracket is then the exit
        if (hi - lo) <= 1e-13 * v.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
        let mut vn = v - (fv - s) / df(v);
        if !(vn > lo && vn < hi) {
            vn = 0.5 * (lo + hi);
        }
        v = vn;
    }
    Ok(v)
}

/// `λ_app(s) = J⁻¹(s)` for `s > 0`.
pub fn invert_j(s: f64, p: &LawParams) -> Result<f64> {
    let v0 = -p.lambda0.ln();
    let (a2, bp, k) = (0.5 * p.alpha, p.beta1_prime, p.k());
    let v = invert_increasing(
        s,
        v0,
        |v| j_of_v(v, p),
        |v| ((a2 * v).exp()) / (bp + k * v).sqrt(),
    )?;
    Ok((-v).exp())
}

/// `𝓕⁻¹(s)` for `s > 0`.
pub fn invert_f(s: f64, p: &LawParams) -> Result<f64> {
    if !(p.min_radicand_f(p.lambda0 * 1e-12) > 0.0) {
        return Err(Error::LawDomainViolated);
    }
    let v0 = -p.lambda0.ln();
    let (a2, bp, k, c0, ta) = (0.5 * p.alpha, p.beta1_prime, p.k(), p.c0, 2.0 - p.alpha);
    let v = invert_increasing(
        s,
        v0,
        |v| f_of_v(v, p),
        |v| ((a2 * v).exp()) / (bp + k * v + c0 * (-ta * v).exp()).sqrt(),
    )?;
    Ok((-v).exp())
}

/// `b_app(s) = λ_app(s)^{α/2} √(β′₁ − k log λ_app(s))`.
pub fn b_app(s: f64, p: &LawParams) -> Result<f64> {
    let lam = invert_j(s, p)?;
    let rad = p.radicand_j(lam);
    if !(rad > 0.0) {
        return Err(Error::LawDomainViolated);
    }
    Ok(lam.powf(0.5 * p.alpha) * rad.sqrt())
}

/// Energy-matched initial data for the rescaled flow at time `s1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InitialData {
    pub lambda1: f64,
    pub b1: f64,
}

/// Leading-order initial data: `𝓕(λ₁) = s1` and
/// `b₁ = λ₁^{α/2}√(−k log λ₁ + β′₁ + C₀λ₁^{2−α})`, without the energy
/// correction.
pub fn choose_initial_leading(s1: f64, p: &LawParams) -> Result<InitialData> {
    let lambda1 = invert_f(s1, p)?;
    let rad = p.radicand_f(lambda1);
    if !(rad > 0.0) {
        return Err(Error::LawDomainViolated);
    }
    Ok(InitialData { lambda1, b1: lambda1.powf(0.5 * p.alpha) * rad.sqrt() })
}

/// `(λ₁, b₁)` with `𝓕(λ₁) = s1` and `b₁` corrected by a scalar root-find so
/// that the full profile energy equals `E₀` to 1e−9.
pub fn choose_initial(s1: f64, p: &LawParams, profile: &ProfileOrder1) -> Result<InitialData> {
    if (profile.sigma - p.sigma).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "profile sigma {} does not match law sigma {}",
            profile.sigma, p.sigma
        )));
    }
    let lead = choose_initial_leading(s1, p)?;
    let lambda1 = lead.lambda1;
    let g = |b: f64| -> Result<f64> { Ok(profile.profile_energy(lambda1, b)? - p.e0) };
    // the energy is strictly increasing in b ≥ 0 (the b²‖yP‖²/(8λ²) kinetic
    // term dominates); bracket around the leading-order value
    let mut lo = 0.0;
    let mut g_lo = g(lo)?;
    if g_lo > 0.0 {
        return Err(Error::EnergyMatchingFailed);
    }
    let mut hi = (2.0 * lead.b1).max(1e-8);
    let mut g_hi = g(hi)?;
    let mut tries = 0;
    while g_hi < 0.0 {
        tries += 1;
        if tries > 60 {
            return Err(Error::EnergyMatchingFailed);
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi)?;
    }
    let _ = g_lo;
    // bisection with a secant accelerator
    let mut b = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gb = g(b)?;
        if gb.abs() < 1e-9 {
            return Ok(InitialData { lambda1, b1: b });
        }
        if gb > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        b = mid;
    }
    let b_final = 0.5 * (lo + hi);
    if g(b_final)?.abs() < 1e-8 {
        Ok(InitialData { lambda1, b1: b_final })
    } else {
        Err(Error::EnergyMatchingFailed)
    }
}

/// `t_app(s) = −∫_s^∞ λ_app(μ)² dμ`. Substituting `μ = J(λ)` turns this into
/// `−∫_0^{λ_app(s)} λ^{1−α/2}/√(β′₁ − k log λ) dλ`, whose `e^{-v}` form decays
/// like `e^{-(2-α/2)v}`; the window is cut where the remainder is below
/// 1e−18 of the total.
pub fn t_app(s: f64, p: &LawParams) -> Result<f64> {
    let lam = invert_j(s, p)?;
    Ok(-time_to_zero(lam, p))
}

/// `∫_0^λ λ'^{1−α/2}/√(β′₁ − k log λ') dλ'` — the |t| remaining until blow-up
/// when the scale is `λ`.
fn time_to_zero(lambda: f64, p: &LawParams) -> f64 {
    let (bp, k) = (p.beta1_prime, p.k());
    let decay = 2.0 - 0.5 * p.alpha;
    let vs = -lambda.ln();
    let window = 45.0 / decay;
    quad::integrate(
        |v: f64| (-decay * v).exp() / (bp + k * v).sqrt(),
        vs,
        vs + window,
        1e-15,
    )
}

/// Inverse of `t_app`: the rescaled time at which the lab time is `t < 0`.
pub fn s_of_t(t: f64, p: &LawParams) -> Result<f64> {
    if !(t < 0.0) {
        return Err(Error::OutOfRange(format!("t = {t} must be negative")));
    }
    if -t >= time_to_zero(p.lambda0, p) {
        return Err(Error::OutOfRange(format!("t = {t} before the law window")));
    }
    let (bp, k) = (p.beta1_prime, p.k());
    let decay = 2.0 - 0.5 * p.alpha;
    // T(v) = time_to_zero(e^{-v}) is strictly decreasing in v; invert −T
    let v0 = -p.lambda0.ln();
    let t0 = time_to_zero(p.lambda0, p);
    let v = invert_increasing(
        t0 + t, // T(v0) − T(v) = t0 − |t|, increasing in v
        v0,
        |v| t0 - time_to_zero((-v).exp(), p),
        |v| (-decay * v).exp() / (bp + k * v).sqrt(),
    )?;
    eval_j((-v).exp(), p)
}

/// Worst margins of the two-sided Lambert bracket
/// `(1−ε)u − 2/ε < −W₋₁(−e^{−u−1}) − 1 − √(2u) < u` over a sample set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WpropReport {
    pub eps: f64,
    pub samples: usize,
    /// min over samples of `mid − lower`; positive iff the lower bound holds
    pub worst_lower_margin: f64,
    /// min over samples of `upper − mid`; positive iff the upper bound holds
    pub worst_upper_margin: f64,
    pub all_hold: bool,
}

pub fn wprop_check(u_samples: &[f64], eps: f64) -> Result<WpropReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps = {eps} outside (0,1)")));
    }
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for &u in u_samples {
        if !(u > 0.0) {
            return Err(Error::OutOfRange(format!("u = {u} must be positive")));
        }
        let mid = -wm1_of_exponent(u)? - 1.0 - (2.0 * u).sqrt();
        let (lo, hi) = wm1_bracket(u, eps);
        worst_lower = worst_lower.min(mid - lo);
        worst_upper = worst_upper.min(hi - mid);
    }
    Ok(WpropReport {
        eps,
        samples: u_samples.len(),
        worst_lower_margin: worst_lower,
        worst_upper_margin: worst_upper,
        all_hold: worst_lower > 0.0 && worst_upper > 0.0,
    })
}

/// Maximum finite-difference residuals of the modulation ODEs
/// `λ_s/λ + b = 0` and `b_s + b² + β₁λ^α log λ − β₂λ^α = 0` along the
/// approximate trajectory, over `n` log-spaced `s ∈ [s0, s1]`.
pub fn ode_residuals(p: &LawParams, s0: f64, s1: f64, n: usize) -> Result<(f64, f64)> {
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..n {
        let s = s0 * (s1 / s0).powf(i as f64 / (n - 1) as f64);
        let h = 1e-3 * s;
        let lam_m = invert_j(s - h, p)?;
        let lam_p = invert_j(s + h, p)?;
        let lam = invert_j(s, p)?;
        let b_m = b_app(s - h, p)?;
        let b_p = b_app(s + h, p)?;
        let b = b_app(s, p)?;
        let dlam = (lam_p - lam_m) / (2.0 * h);
        let db = (b_p - b_m) / (2.0 * h);
        let r1 = (dlam / lam + b).abs();
        let la = lam.powf(p.alpha);
        let r2 = (db + b * b + p.beta1 * la * lam.ln() - p.beta2 * la).abs();
        worst.0 = worst.0.max(r1);
        worst.1 = worst.1.max(r2);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    /// Coefficients for σ = 0.2, N = 1, from the quadrature of the closed-form
    /// ground state (checked against the profile module's oracle test).
    fn params(e0: f64, lambda0: Option<f64>) -> LawParams {
        let sigma = 0.2;
        let q2 = |r: f64| 3.0f64.sqrt() / (2.0 * r).cosh();
        let a = 2.0 * quad::integrate(|r: f64| r.powf(-2.0 * sigma) * q2(r), 0.0, 40.0, 1e-13);
        let i =
            2.0 * quad::integrate(|r: f64| r.powf(-2.0 * sigma) * r.ln() * q2(r), 0.0, 40.0, 1e-13);
        let m2 = 2.0 * quad::integrate(|r: f64| r * r * q2(r), 0.0, 40.0, 1e-13);
        let betas = crate::profile::Betas {
            sigma,
            alpha: 2.0 - 2.0 * sigma,
            beta1: 4.0 * sigma * a / m2,
            beta2: (4.0 / m2) * (a / 2.0 - sigma * i),
            beta1_prime: -4.0 * i / m2,
            a_sigma: a,
            i_log: i,
            m2,
        };
        LawParams::new(&betas, e0, lambda0).unwrap()
    }

    #[test]
    fn params_invariants_enforced() {
        let p = params(0.0, None);
        assert!(p.c0 == 0.0 && p.lambda0 == 1e-2);
        // λ₀ large enough to make the radicand negative is rejected
        let betas = crate::profile::Betas {
            sigma: p.sigma,
            alpha: p.alpha,
            beta1: p.beta1,
            beta2: p.beta2,
            beta1_prime: p.beta1_prime,
            a_sigma: 0.0,
            i_log: 0.0,
            m2: p.m2,
        };
        assert!(LawParams::new(&betas, 0.0, Some(100.0)).is_err());
        let mut bad = betas;
        bad.alpha = 2.5;
        assert!(LawParams::new(&bad, 0.0, Some(1e-2)).is_err());
    }

    #[test]
    fn j_vanishes_at_lambda0_and_decreases() {
        let p = params(0.0, None);
        assert_eq!(eval_j(p.lambda0, &p).unwrap(), 0.0);
        let mut lam = p.lambda0 / 2.0;
        let mut prev = eval_j(lam, &p).unwrap();
        for _ in 0..10 {
            lam /= 2.0;
            let j = eval_j(lam, &p).unwrap();
            assert!(j > prev, "J not decreasing in lambda at {lam}");
            prev = j;
        }
        assert!(eval_j(2.0 * p.lambda0, &p).is_err());
    }

    #[test]
    fn japp_asymptotic_ratio() {
        // J(λ)⁻¹ = (α/2)√k · λ^{α/2}√|log λ| (1 + O(1/|log λ|))
        let p = params(0.0, None);
        let k = p.k();
        let mut devs = Vec::new();
        for &lam in &[1e-4, 1e-6, 1e-8] {
            let j = eval_j(lam, &p).unwrap();
            let leading = (0.5 * p.alpha) * k.sqrt() * lam.powf(0.5 * p.alpha)
                * lam.ln().abs().sqrt();
            let ratio = (1.0 / j) / leading;
            devs.push(((ratio - 1.0).abs(), lam.ln().abs()));
        }
        // deviation ≤ C/|log λ| with stable C, and shrinking as λ → 0
        let cs: Vec<f64> = devs.iter().map(|d| d.0 * d.1).collect();
        assert!(devs[2].0 < devs[0].0, "deviation not shrinking: {devs:?}");
        let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 3.0, "unstable C: {cs:?}");
    }

    #[test]
    fn invert_j_round_trips() {
        let p = params(0.0, None);
        for i in 1..=10 {
            let lam = p.lambda0 * 0.5f64.powi(i);
            let s = eval_j(lam, &p).unwrap();
            let back = invert_j(s, &p).unwrap();
            assert!(
                ((back - lam) / lam).abs() < 1e-9,
                "roundtrip at lambda {lam}: {back}"
            );
        }
        assert!(invert_j(-1.0, &p).is_err());
    }

    #[test]
    fn lambapp_scaling() {
        let p = params(0.0, None);
        let k = p.k();
        let mut ratio1 = Vec::new();
        for &s in &[1e3, 1e4, 1e5, 1e6] {
            let lam = invert_j(s, &p).unwrap();
            // λ_app(s) ≈ s^{−2/α}(log s)^{−1/α}
            ratio1.push(lam * s.powf(2.0 / p.alpha) * s.ln().powf(1.0 / p.alpha));
            // λ^α |log λ| s² → 4/(α² k)
            let c = lam.powf(p.alpha) * lam.ln().abs() * s * s;
            let expect = 4.0 / (p.alpha * p.alpha * k);
            assert!(
                (c / expect - 1.0).abs() < 0.1,
                "s {s}: lambda^a |log| s^2 = {c}, expected {expect}"
            );
        }
        let (lo, hi) = ratio1.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(lo > 0.0 && hi / lo < 3.0, "lambapp ratios {ratio1:?}");
    }

    #[test]
    fn b_app_scaling_and_ode() {
        let p = params(0.0, None);
        // b_app(s)·s bounded above and below
        let mut prods = Vec::new();
        for &s in &[1e3, 1e4, 1e5, 1e6] {
            prods.push(b_app(s, &p).unwrap() * s);
        }
        let (lo, hi) = prods.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(lo > 0.0 && hi / lo < 2.0, "b_app·s products {prods:?}");
        // finite-difference residuals of the two modulation ODEs
        let s0 = eval_j(p.lambda0 / 4.0, &p).unwrap();
        let (r1, r2) = ode_residuals(&p, s0, 10.0 * s0, 20).unwrap();
        assert!(r1 < 1e-6, "lambda ODE residual {r1}");
        assert!(r2 < 1e-6, "b ODE residual {r2}");
    }

    #[test]
    fn closed_form_matches_ode_integration() {
        // RK4 on (λ, b)(s) from the closed form's initial point stays on it
        let p = params(0.0, None);
        let s0 = eval_j(p.lambda0 / 4.0, &p).unwrap();
        let s1 = 10.0 * s0;
        let mut lam = invert_j(s0, &p).unwrap();
        let mut b = b_app(s0, &p).unwrap();
        let n = 4000;
        let h = (s1 - s0) / n as f64;
        let rhs = |lam: f64, b: f64| {
            let la = lam.powf(p.alpha);
            (-lam * b, -b * b - p.beta1 * la * lam.ln() + p.beta2 * la)
        };
        for _ in 0..n {
            let (k1l, k1b) = rhs(lam, b);
            let (k2l, k2b) = rhs(lam + 0.5 * h * k1l, b + 0.5 * h * k1b);
            let (k3l, k3b) = rhs(lam + 0.5 * h * k2l, b + 0.5 * h * k2b);
            let (k4l, k4b) = rhs(lam + h * k3l, b + h * k3b);
            lam += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
            b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        }
        let lam_cf = invert_j(s1, &p).unwrap();
        let b_cf = b_app(s1, &p).unwrap();
        assert!(((lam - lam_cf) / lam_cf).abs() < 1e-6, "lambda drift {}", ((lam - lam_cf) / lam_cf).abs());
        assert!(((b - b_cf) / b_cf).abs() < 1e-6, "b drift {}", ((b - b_cf) / b_cf).abs());
    }

    #[test]
    fn f_reduces_to_j_at_zero_energy_and_stays_close() {
        let p0 = params(0.0, None);
        for i in 1..=6 {
            let lam = p0.lambda0 * 0.5f64.powi(i);
            let j = eval_j(lam, &p0).unwrap();
            let f = eval_f(lam, &p0).unwrap();
            assert!(((f - j) / j).abs() < 1e-10, "C0=0: F != J at {lam}");
        }
        // |𝓕 − J| ≤ C(λ^{−α/4} + λ^{2−3α/2}) on dyadic λ, with stable C
        for &e0 in &[-1.0, 1.0] {
            let p = params(e0, None);
            let mut cs = Vec::new();
            for i in 2..=8 {
                let lam = p.lambda0 * 0.5f64.powi(i);
                let j = eval_j(lam, &p).unwrap();
                let f = eval_f(lam, &p).unwrap();
                let envelope =
                    lam.powf(-0.25 * p.alpha) + lam.powf(2.0 - 1.5 * p.alpha);
                cs.push((f - j).abs() / envelope);
            }
            let hi = cs.iter().cloned().fold(0.0f64, f64::max);
            let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(hi.is_finite() && hi / lo.max(1e-12) < 50.0, "E0 {e0}: C values {cs:?}");
        }
    }

    #[test]
    fn t_app_round_trips_and_scales() {
        let p = params(0.0, None);
        for &s in &[1e3, 1e4, 1e5] {
            let t = t_app(s, &p).unwrap();
            assert!(t < 0.0);
            let back = s_of_t(t, &p).unwrap();
            assert!(((back - s) / s).abs() < 1e-8, "s roundtrip at {s}: {back}");
        }
        // t_app increases toward 0
        assert!(t_app(1e4, &p).unwrap() > t_app(1e3, &p).unwrap());
        // |t_app(s)| ≈ s^{−(4−α)/α}(log s)^{−2/α}
        let mut ratios = Vec::new();
        for &s in &[1e3, 1e4, 1e5, 1e6] {
            let t = t_app(s, &p).unwrap();
            ratios.push(t.abs() * s.powf((4.0 - p.alpha) / p.alpha) * s.ln().powf(2.0 / p.alpha));
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(lo > 0.0 && hi / lo < 3.0, "t_app ratios {ratios:?}");
        assert!(s_of_t(0.1, &p).is_err());
    }

    #[test]
    fn composed_rate_matches_theorem_scaling() {
        // λ_app(s_of_t(t)) ≈ |t|^{1/(1+σ)} |log|t||^{1/(2+2σ)}
        let p = params(0.0, None);
        let mut ratios = Vec::new();
        for &s in &[1e3, 1e4, 1e5, 1e6] {
            let t = t_app(s, &p).unwrap();
            let lam = invert_j(s_of_t(t, &p).unwrap(), &p).unwrap();
            let model = t.abs().powf(1.0 / (1.0 + p.sigma))
                * t.abs().ln().abs().powf(1.0 / (2.0 + 2.0 * p.sigma));
            ratios.push(lam / model);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(lo > 0.0 && hi / lo < 3.0, "composed-rate ratios {ratios:?}");
        // exponent identity 2/(4−α) = 1/(1+σ) for α = 2−2σ
        for &sigma in &[0.1f64, 0.2, 0.25, 0.3, 0.4] {
            let alpha = 2.0 - 2.0 * sigma;
            assert!((2.0 / (4.0 - alpha) - 1.0 / (1.0 + sigma)).abs() < 1e-15);
        }
    }

    #[test]
    fn wprop_bracket_report() {
        let us: Vec<f64> = (0..100)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 99.0))
            .collect();
        let rep = wprop_check(&us, 0.1).unwrap();
        assert!(rep.all_hold, "{rep:?}");
        assert_eq!(rep.samples, 100);
        let rep2 = wprop_check(&[1.0], 0.5).unwrap();
        assert!(rep2.all_hold);
        let rep3 = wprop_check(&[1e-6], 0.5).unwrap();
        assert!(rep3.all_hold);
        assert!(wprop_check(&us, 1.5).is_err());
        assert!(wprop_check(&[-1.0], 0.5).is_err());
    }

    #[test]
    fn initial_data_matches_target_energy() {
        use crate::grid::GridSpec;
        use crate::ground_state::solve_ground_state;
        use crate::linops::LinearizedPair;
        use std::sync::Arc;

        let grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, grid, 1e-12).unwrap();
        let pair = LinearizedPair::build(Arc::new(gs)).unwrap();
        let prof = crate::profile::solve_s000(&pair, 0.2).unwrap();
        let s1 = 30.0;
        for &e0 in &[-1.0, 0.0, 1.0] {
            let p = LawParams::new(&prof.betas, e0, None).unwrap();
            let init = choose_initial(s1, &p, &prof).unwrap();
            let f1 = eval_f(init.lambda1, &p).unwrap();
            assert!(
                ((f1 - s1) / s1).abs() < 1e-10,
                "E0 {e0}: F(lambda1) = {f1} vs s1 = {s1}"
            );
            let e = prof.profile_energy(init.lambda1, init.b1).unwrap();
            assert!((e - e0).abs() < 1e-8, "E0 {e0}: energy {e}");
            // b1 stays near the leading-order radicand formula
            let lead = choose_initial_leading(s1, &p).unwrap();
            assert!(
                ((init.b1 - lead.b1) / lead.b1).abs() < 0.2,
                "E0 {e0}: b1 {} vs leading {}",
                init.b1,
                lead.b1
            );
        }
        // profile with the wrong sigma is rejected
        let p = LawParams::new(&prof.betas, 0.0, None).unwrap();
        let mut wrong = p;
        wrong.sigma = 0.1;
        assert!(matches!(choose_initial(s1, &wrong, &prof), Err(Error::Config(_))));
    }

    #[test]
    fn initial_data_tracks_j_at_large_s() {
        // |s1⁻¹/J(λ₁)⁻¹ − 1| ≲ s1^{−1/2}√log s1 + s1^{2−4/α}√log s1 at E₀ = ±1
        for &e0 in &[-1.0f64, 1.0] {
            let p = params(e0, None);
            let mut cs = Vec::new();
            for &s1 in &[1e3, 1e4, 1e5] {
                let lead = choose_initial_leading(s1, &p).unwrap();
                let j1 = eval_j(lead.lambda1, &p).unwrap();
                let dev_s = (j1 / s1 - 1.0).abs();
                let dev_b = (lead.b1 / b_app(j1, &p).unwrap() - 1.0).abs();
                let envelope = s1.ln().sqrt()
                    * (s1.powf(-0.5) + s1.powf(2.0 - 4.0 / p.alpha));
                cs.push((dev_s + dev_b) / envelope);
            }
            let hi = cs.iter().cloned().fold(0.0f64, f64::max);
            assert!(hi < 10.0, "E0 {e0}: envelope multiples {cs:?}");
        }
    }

    #[test]
    fn quadrature_refinement_converges() {
        // composite Simpson on the v-form integrand: Richardson ratio ≈ 16
        let p = params(0.0, None);
        let (a2, bp, k) = (0.5 * p.alpha, p.beta1_prime, p.k());
        let g = |v: f64| ((a2 * v).exp()) / (bp + k * v).sqrt();
        let (v0, v1) = (-p.lambda0.ln(), -(1e-4f64).ln());
        let simpson = |n: usize| {
            let h = (v1 - v0) / n as f64;
            let mut acc = g(v0) + g(v1);
            for i in 1..n {
                acc += g(v0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        let exact = eval_j(1e-4, &p).unwrap();
        let e1 = (simpson(64) - exact).abs();
        let e2 = (simpson(128) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 4.0, "Richardson ratio {ratio}");
    }
}
