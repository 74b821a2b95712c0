//! Radial time integrator for
//!
//! ```text
//! i ∂ₜu + Δu + |u|^{4/N} u + sign·|x|^{-2σ} log|x| u = 0
//! ```
//!
//! using Strang splitting: a Crank–Nicolson half-step of the linear flow
//! (Laplacian plus potential), the exact pointwise phase rotation of the
//! nonlinear substep, and another linear half-step. Both substeps preserve the
//! discrete L² mass exactly (the Crank–Nicolson update is a Cayley transform
//! of a self-adjoint operator), so mass is conserved to solver roundoff.
//!
//! `sigma = 0` disables the potential entirely; this is the validation path
//! against the explicit pseudo-conformal solution of the free equation.

use std::io::Write as IoWrite;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_sigma, RadialField, RadialGrid};
use crate::ground_state::GroundState;

/// Full simulation configuration. Every field is mandatory in the JSON form —
/// there are no silent defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dim: usize,
    /// `0` disables the potential (validation runs); otherwise
    /// `0 < sigma < min(N/4, 1)`.
    pub sigma: f64,
    /// Coefficient of the potential term in the equation, `+1` or `-1`.
    /// The blow-up profile is built for the `-1` branch (its conserved energy
    /// carries `+½∫|x|^{-2σ}log|x| |u|²`).
    pub sign: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Initial step; adapted when `step_tol > 0`.
    pub dt_init: f64,
    /// Steps below this abort with a step-collapse error.
    pub dt_min: f64,
    /// Local-error tolerance for adaptive step halving; `0` runs at fixed dt.
    pub step_tol: f64,
    /// Relative mass drift allowed over the whole run.
    pub mass_tol: f64,
    /// Relative energy drift allowed over the whole run.
    pub energy_tol: f64,
    /// Stop cleanly when `‖∇u‖₂` exceeds this multiple of its initial value.
    pub grad_ceiling: f64,
    /// Damping rate of the absorbing layer on the outer 10% of the grid;
    /// `0` disables the sponge.
    pub sponge_strength: f64,
    /// Times at which to store full field snapshots.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    ReachedEnd,
    ConcentrationCeiling,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub gradnorm: Vec<f64>,
    pub snapshots: Vec<(f64, RadialField)>,
    pub status: RunStatus,
}

impl SimTrace {
    pub fn to_csv<W: IoWrite>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,mass,energy,gradnorm")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.times[i], self.mass[i], self.energy[i], self.gradnorm[i]
            )?;
        }
        Ok(())
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.to_csv(std::fs::File::create(path)?)
    }
}

/// One Strang step plus the conserved-quantity monitors, with the
/// grid-dependent matrices assembled once.
pub struct Stepper {
    grid: Arc<RadialGrid>,
    /// face conductances `a_N face^{N-1} / h`
    cond: Vec<f64>,
    /// `sign · r^{-2σ} log r` as dual-cell averages (zero when the potential
    /// is off)
    pot: Vec<f64>,
    /// sponge damping rate per node
    sponge: Vec<f64>,
    /// nonlinearity exponent `2 + 4/N` of the density
    pw: f64,
}

impl Stepper {
    pub fn new(cfg: &SimConfig, grid: Arc<RadialGrid>) -> Result<Stepper> {
        if grid.dim() != cfg.dim {
            return Err(Error::GridMismatch);
        }
        if cfg.sign != 1.0 && cfg.sign != -1.0 {
            return Err(Error::Config(format!("sign must be +1 or -1, got {}", cfg.sign)));
        }
        if cfg.sigma != 0.0 {
            check_sigma(cfg.sigma, cfg.dim)?;
        }
        let n = grid.len();
        let r = grid.nodes();
        let a = grid.angular();
        let nn = cfg.dim as f64;
        let cond = (0..n - 1)
            .map(|i| {
                let face = 0.5 * (r[i] + r[i + 1]);
                a * face.powf(nn - 1.0) / (r[i + 1] - r[i])
            })
            .collect();
        let pot = if cfg.sigma == 0.0 {
            vec![0.0; n]
        } else {
            // cell averages of r^{-2σ} log r with exact singular moments: the
            // innermost cell carries the analytic [0, r_min) contribution, so
            // the discrete operator (and the energy) are insensitive to where
            // the grid cuts the origin
            let ones = vec![1.0; n];
            grid.cell_averages(&ones, -2.0 * cfg.sigma, true)
                .into_iter()
                .map(|v| cfg.sign * v)
                .collect()
        };
        let r_sponge = 0.9 * grid.r_max();
        let sponge = r
            .iter()
            .map(|&ri| {
                if ri > r_sponge {
                    let x = (ri - r_sponge) / (grid.r_max() - r_sponge);
                    cfg.sponge_strength * x * x
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Stepper { grid, cond, pot, sponge, pw: 2.0 + 4.0 / nn })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Crank–Nicolson over `tau` for `i∂ₜu = Au`, `A = -Δ - pot`:
    /// `(I + i(τ/2)A) u⁺ = (I - i(τ/2)A) u`. Unitary in the discrete inner
    /// product because `A` is self-adjoint with respect to the weights.
    fn linear_substep(&self, u: &mut [Complex64], tau: f64) {
        let n = u.len();
        let w = self.grid.weights();
        let half = Complex64::new(0.0, 0.5 * tau);
        // rows of A
        let a_diag = |i: usize| -> f64 {
            let mut d = -self.pot[i];
            if i > 0 {
                d += self.cond[i - 1] / w[i];
            }
            if i + 1 < n {
                d += self.cond[i] / w[i];
            }
            d
        };
        // rhs = (I - i(τ/2)A) u
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut au = u[i] * a_diag(i);
            if i > 0 {
                au -= u[i - 1] * (self.cond[i - 1] / w[i]);
            }
            if i + 1 < n {
                au -= u[i + 1] * (self.cond[i] / w[i]);
            }
            rhs[i] = u[i] - half * au;
        }
        // Thomas solve of (I + i(τ/2)A) u⁺ = rhs; the matrix is strictly
        // diagonally dominant (unit real part on the diagonal), no pivoting
        // needed
        let mut cp = vec![Complex64::new(0.0, 0.0); n - 1];
        let mut dp = vec![Complex64::new(0.0, 0.0); n];
        let sup = |i: usize| half * (-self.cond[i] / w[i]);
        let diag = |i: usize| Complex64::new(1.0, 0.0) + half * a_diag(i);
        let mut denom = diag(0);
        cp[0] = sup(0) / denom;
        dp[0] = rhs[0] / denom;
        for i in 1..n {
            let l = half * (-self.cond[i - 1] / w[i]);
            denom = diag(i) - l * cp[i - 1];
            if i < n - 1 {
                cp[i] = sup(i) / denom;
            }
            dp[i] = (rhs[i] - l * dp[i - 1]) / denom;
        }
        u[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = dp[i] - cp[i] * u[i + 1];
        }
    }

    /// One Strang step over `dt` (negative `dt` steps backward).
    pub fn step(&self, u: &RadialField, dt: f64) -> Result<RadialField> {
        if !u.is_finite() {
            return Err(Error::Config("non-finite field entering step".into()));
        }
        let mut v = u.values().to_vec();
        self.linear_substep(&mut v, 0.5 * dt);
        let e = 0.5 * (self.pw - 2.0); // |u|^{4/N} = (|u|²)^{2/N}
        for vi in v.iter_mut() {
            let phase = dt * vi.norm_sqr().powf(e);
            *vi *= Complex64::from_polar(1.0, phase);
        }
        self.linear_substep(&mut v, 0.5 * dt);
        if self.sponge.iter().any(|&s| s > 0.0) {
            for (vi, &s) in v.iter_mut().zip(&self.sponge) {
                if s > 0.0 {
                    *vi *= (-dt.abs() * s).exp();
                }
            }
        }
        RadialField::new(self.grid.clone(), v)
    }

    /// The conserved energy of the discrete flow:
    /// `½‖∇u‖² − (1/(2+4/N))∫|u|^{2+4/N} − (sign/2)∫|x|^{-2σ}log|x| |u|²`,
    /// with the potential sampled exactly as in the evolution matrix.
    pub fn energy(&self, u: &RadialField) -> f64 {
        let w = self.grid.weights();
        let mut nl = 0.0;
        let mut pe = 0.0;
        for ((v, &wi), &p) in u.values().iter().zip(w).zip(&self.pot) {
            let m = v.norm_sqr();
            nl += wi * m.powf(self.pw / 2.0);
            pe += wi * p * m;
        }
        0.5 * u.grad_norm_sq() - nl / self.pw - 0.5 * pe
    }
}

/// Integrate from `cfg.t_start` to `cfg.t_end`, recording mass, energy and
/// `‖∇u‖₂` at every accepted step. Stops early with
/// [`RunStatus::ConcentrationCeiling`] when the gradient norm exceeds
/// `grad_ceiling` times its initial value.
pub fn run(cfg: &SimConfig, u0: &RadialField) -> Result<SimTrace> {
    if !(cfg.t_start < cfg.t_end) {
        return Err(Error::Config("t_start must precede t_end".into()));
    }
    if !(cfg.dt_init > 0.0 && cfg.dt_min > 0.0) {
        return Err(Error::Config("dt_init and dt_min must be positive".into()));
    }
    let stepper = Stepper::new(cfg, u0.grid().clone())?;
    let mut snapshot_times: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .cloned()
        .filter(|&t| t > cfg.t_start && t <= cfg.t_end)
        .collect();
    snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut u = u0.clone();
    let mut t = cfg.t_start;
    let mass0 = u.l2_norm_sq();
    let grad0 = u.grad_norm_sq().sqrt();
    if mass0 == 0.0 {
        // the zero field stays zero; report a trivial trace
        return Ok(SimTrace {
            times: vec![cfg.t_start, cfg.t_end],
            mass: vec![0.0, 0.0],
            energy: vec![0.0, 0.0],
            gradnorm: vec![0.0, 0.0],
            snapshots: Vec::new(),
            status: RunStatus::ReachedEnd,
        });
    }
    let ceiling = cfg.grad_ceiling * grad0;
    let mut trace = SimTrace {
        times: vec![t],
        mass: vec![mass0],
        energy: vec![stepper.energy(&u)],
        gradnorm: vec![grad0],
        snapshots: Vec::new(),
        status: RunStatus::ReachedEnd,
    };
    let mut dt = cfg.dt_init;
    let mut next_snap = 0usize;
    while t < cfg.t_end - 1e-14 * cfg.t_end.abs().max(1.0) {
        let mut dt_eff = dt.min(cfg.t_end - t);
        if next_snap < snapshot_times.len() {
            dt_eff = dt_eff.min(snapshot_times[next_snap] - t);
        }
        if cfg.step_tol > 0.0 {
            // step-doubling local error control
            let coarse = stepper.step(&u, dt_eff)?;
            let fine = stepper.step(&stepper.step(&u, 0.5 * dt_eff)?, 0.5 * dt_eff)?;
            let err = coarse.sub(&fine)?.l2_norm_sq().sqrt() / mass0.sqrt();
            if err > cfg.step_tol {
                dt = 0.5 * dt_eff;
                if dt < cfg.dt_min {
                    return Err(Error::StepCollapse(t));
                }
                continue;
            }
            u = fine;
            if err < 0.05 * cfg.step_tol {
                dt = 1.5 * dt_eff;
            }
        } else {
            u = stepper.step(&u, dt_eff)?;
        }
        t += dt_eff;
        let mass = u.l2_norm_sq();
        let grad = u.grad_norm_sq().sqrt();
        trace.times.push(t);
        trace.mass.push(mass);
        trace.energy.push(stepper.energy(&u));
        trace.gradnorm.push(grad);
        if ((mass - mass0) / mass0).abs() > cfg.mass_tol {
            return Err(Error::Config(format!(
                "mass drift {:.3e} exceeds tolerance at t = {t}",
                ((mass - mass0) / mass0).abs()
            )));
        }
        if next_snap < snapshot_times.len()
            && (t - snapshot_times[next_snap]).abs() < 1e-12 * t.abs().max(1.0)
        {
            trace.snapshots.push((t, u.clone()));
            next_snap += 1;
        }
        if grad > ceiling {
            trace.status = RunStatus::ConcentrationCeiling;
            break;
        }
    }
    Ok(trace)
}

/// The explicit pseudo-conformal blow-up solution of the free (`σ = 0`)
/// equation, `S(t,x) = |t|^{-N/2} Q(x/|t|) e^{i|x|²/(4t)} e^{-i/t}` for
/// `t < 0`, sampled on `grid` with the shooting-accurate ground-state
/// interpolant.
pub fn pseudo_conformal(gs: &GroundState, grid: Arc<RadialGrid>, t: f64) -> Result<RadialField> {
    if !(t < 0.0) {
        return Err(Error::OutOfRange(format!("pseudo-conformal solution needs t < 0, got {t}")));
    }
    let at = -t;
    let amp = at.powf(-(grid.dim() as f64) / 2.0);
    let fine = gs.fine();
    Ok(RadialField::from_fn(grid, |r| {
        let q = fine.eval(r / at);
        Complex64::from_polar(amp * q, r * r / (4.0 * t) - 1.0 / t)
    }))
}

/// Lab-frame field of a rescaled profile:
/// `u(x) = λ^{-N/2} P(x/λ) e^{-i b |x|²/(4λ²)} e^{iγ}`, with `P` interpolated
/// off its own grid.
pub fn rescale_to_lab(
    p: &RadialField,
    lambda: f64,
    b: f64,
    gamma: f64,
    grid: Arc<RadialGrid>,
) -> Result<RadialField> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("lambda must be positive, got {lambda}")));
    }
    let amp = lambda.powf(-(grid.dim() as f64) / 2.0);
    Ok(RadialField::from_fn(grid, |r| {
        let y = r / lambda;
        let val = p.interpolate(y);
        val * Complex64::from_polar(amp, -b * y * y / 4.0 + gamma)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::ground_state::solve_ground_state;

    fn cfg_free() -> SimConfig {
        SimConfig {
            dim: 1,
            sigma: 0.0,
            sign: -1.0,
            t_start: -0.5,
            t_end: -0.4,
            dt_init: 2e-4,
            dt_min: 1e-9,
            step_tol: 0.0,
            mass_tol: 1e-8,
            energy_tol: 1e-6,
            grad_ceiling: 1e3,
            sponge_strength: 0.0,
            snapshot_times: vec![],
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = RadialGrid::uniform(1, 64, 8.0).unwrap();
        let trace = run(&cfg_free(), &RadialField::zeros(grid)).unwrap();
        assert!(trace.mass.iter().all(|&m| m == 0.0));
        assert_eq!(trace.status, RunStatus::ReachedEnd);
    }

    #[test]
    fn pseudo_conformal_solution_is_tracked() {
        // σ = 0 ground truth on a uniform grid with >= 2^12 nodes
        let grid = RadialGrid::uniform(1, 4500, 20.0).unwrap();
        let gs_grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, gs_grid, 1e-12).unwrap();
        let mut cfg = cfg_free();
        cfg.dt_init = 5e-5; // splitting energy drift scales as dt²
        let u0 = pseudo_conformal(&gs, grid.clone(), cfg.t_start).unwrap();
        let trace = run(&cfg, &u0).unwrap();
        assert_eq!(trace.status, RunStatus::ReachedEnd);
        // mass and energy conservation over the run
        let mdrift = (trace.mass.last().unwrap() - trace.mass[0]).abs() / trace.mass[0];
        assert!(mdrift < 1e-8, "mass drift {mdrift}");
        let e0 = trace.energy[0];
        let edrift = (trace.energy.last().unwrap() - e0).abs() / e0.abs().max(1.0);
        assert!(edrift < 1e-6, "energy drift {edrift}");
        // final-state L2 error against the closed form
        let stepper = Stepper::new(&cfg, grid.clone()).unwrap();
        let mut u = u0;
        let n_steps = ((cfg.t_end - cfg.t_start) / cfg.dt_init).round() as usize;
        for _ in 0..n_steps {
            u = stepper.step(&u, cfg.dt_init).unwrap();
        }
        let exact = pseudo_conformal(&gs, grid, cfg.t_end).unwrap();
        let err = u.sub(&exact).unwrap().l2_norm_sq().sqrt() / exact.l2_norm_sq().sqrt();
        assert!(err < 1e-3, "L2 error vs closed form {err}");
    }

    #[test]
    fn solitary_wave_phase_rotation() {
        // σ = 0: u(t) = Q e^{it}; weighted-average phase after unit time
        let grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, grid.clone(), 1e-12).unwrap();
        let mut cfg = cfg_free();
        cfg.t_start = 0.0;
        cfg.t_end = 1.0;
        let stepper = Stepper::new(&cfg, grid).unwrap();
        let mut u = gs.q().clone();
        let dt = 2.5e-4f64;
        let n = (1.0 / dt).round() as usize;
        for _ in 0..n {
            u = stepper.step(&u, dt).unwrap();
        }
        // phase of the projection onto Q
        let w = u.grid().weights().to_vec();
        let mut ip = Complex64::new(0.0, 0.0);
        for ((v, q), &wi) in u.values().iter().zip(gs.q().values()).zip(&w) {
            ip += v * q.conj() * wi;
        }
        let phase_err = (ip.arg() - 1.0).abs();
        assert!(phase_err < 1e-6, "phase error {phase_err}");
    }

    #[test]
    fn second_order_in_dt() {
        // self-convergence on the pseudo-conformal solution
        let grid = RadialGrid::uniform(1, 2000, 15.0).unwrap();
        let gs_grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, gs_grid, 1e-12).unwrap();
        let cfg = cfg_free();
        let u0 = pseudo_conformal(&gs, grid.clone(), -0.5).unwrap();
        let stepper = Stepper::new(&cfg, grid).unwrap();
        let advance = |dt: f64| {
            let mut u = u0.clone();
            let n = (0.02 / dt).round() as usize;
            for _ in 0..n {
                u = stepper.step(&u, dt).unwrap();
            }
            u
        };
        let u1 = advance(4e-4);
        let u2 = advance(2e-4);
        let u3 = advance(1e-4);
        let e12 = u1.sub(&u2).unwrap().l2_norm_sq().sqrt();
        let e23 = u2.sub(&u3).unwrap().l2_norm_sq().sqrt();
        let order = (e12 / e23).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn step_is_reversible_and_mass_preserving() {
        // with the log potential on: forward dt then backward dt returns u
        let grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, grid.clone(), 1e-12).unwrap();
        let mut cfg = cfg_free();
        cfg.sigma = 0.2;
        let stepper = Stepper::new(&cfg, grid).unwrap();
        let u = gs.q().map(|v| v * Complex64::new(1.0, 0.3));
        let dt = 1e-4;
        let forward = stepper.step(&u, dt).unwrap();
        let mass_ratio = (forward.l2_norm_sq() / u.l2_norm_sq() - 1.0).abs();
        assert!(mass_ratio < 1e-12, "per-step mass drift {mass_ratio}");
        let back = stepper.step(&forward, -dt).unwrap();
        let diff = back.sub(&u).unwrap().l2_norm_sq().sqrt() / u.l2_norm_sq().sqrt();
        assert!(diff < 1e-10, "reversibility defect {diff}");
    }

    /// Profile initial data at `lambda1 = 0.1` sampled on a coarse simulation
    /// grid (the full production grid is needlessly fine for a qualitative
    /// blow-up run). Returns the grid, the lab-frame field, and the matched
    /// start time `t1 < 0`.
    fn blowup_initial() -> (Arc<RadialGrid>, RadialField, f64) {
        use crate::law::{choose_initial, eval_f, t_app, LawParams};
        use crate::linops::LinearizedPair;
        use crate::profile::solve_s000;

        let gs_grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, gs_grid, 1e-12).unwrap();
        let pair = LinearizedPair::build(Arc::new(gs)).unwrap();
        let prof = solve_s000(&pair, 0.2).unwrap();
        let p = LawParams::new(&prof.betas, 0.0, Some(0.5)).unwrap();
        let s1 = eval_f(0.1, &p).unwrap();
        let init = choose_initial(s1, &p, &prof).unwrap();
        let t1 = t_app(s1, &p).unwrap();
        let prof_field = prof.assemble_profile(init.lambda1, init.b1).unwrap();
        let sim_grid = GridSpec { r_max: 15.0, growth: 1.03, h: 5e-3, ..GridSpec::standard(1) }
            .build()
            .unwrap();
        let u0 =
            rescale_to_lab(&prof_field, init.lambda1, init.b1, 0.0, sim_grid.clone()).unwrap();
        (sim_grid, u0, t1)
    }

    #[test]
    fn profile_run_concentrates() {
        let (_grid, u0, t1) = blowup_initial();
        let cfg = SimConfig {
            dim: 1,
            sigma: 0.2,
            sign: -1.0,
            t_start: t1,
            t_end: 0.25 * t1,
            dt_init: 2e-6,
            dt_min: 1e-12,
            step_tol: 0.0,
            mass_tol: 1e-5,
            energy_tol: 1e-4,
            grad_ceiling: 1e3,
            sponge_strength: 5.0,
            snapshot_times: vec![],
        };
        let trace = run(&cfg, &u0).unwrap();
        // ‖∇u‖ grows monotonically after transients (checked on the last
        // three quarters of the run, coarse-grained against step noise)
        let g = &trace.gradnorm;
        assert!(g.len() > 20, "too few steps: {}", g.len());
        let start = g.len() / 4;
        let coarse: Vec<f64> = (0..8)
            .map(|k| g[start + (g.len() - 1 - start) * k / 7])
            .collect();
        for w in coarse.windows(2) {
            assert!(w[1] > w[0], "gradnorm not increasing: {coarse:?}");
        }
        assert!(
            g.last().unwrap() / g[0] > 1.5,
            "no concentration: {} -> {}",
            g[0],
            g.last().unwrap()
        );
    }

    #[test]
    fn concentration_ceiling_stops_cleanly() {
        let (_grid, u0, t1) = blowup_initial();
        let cfg = SimConfig {
            dim: 1,
            sigma: 0.2,
            sign: -1.0,
            t_start: t1,
            t_end: 0.05 * t1,
            dt_init: 2e-6,
            dt_min: 1e-12,
            step_tol: 0.0,
            mass_tol: 1e-5,
            energy_tol: 1e-4,
            grad_ceiling: 1.5, // low ceiling: triggers early
            sponge_strength: 5.0,
            snapshot_times: vec![],
        };
        let trace = run(&cfg, &u0).unwrap();
        assert_eq!(trace.status, RunStatus::ConcentrationCeiling);
        assert!(trace.times.last().unwrap() < &cfg.t_end);
    }

    #[test]
    fn origin_cutoff_insensitivity() {
        // halving r_min leaves mass and energy at the quadrature-noise level
        // and moves the gradient norm only at the spatial-discretization
        // scale (the two grids place their nodes differently everywhere, so
        // 1e-4 is the honest comparison floor for a derivative norm)
        let gs_grid = GridSpec::standard(1).build().unwrap();
        let gs = solve_ground_state(1, gs_grid, 1e-12).unwrap();
        let mut cfg = cfg_free();
        cfg.sigma = 0.2;
        cfg.t_start = -0.5;
        cfg.t_end = -0.49;
        cfg.dt_init = 1e-4;
        let run_with = |r_min: f64| {
            let spec = GridSpec { r_min, ..GridSpec::standard(1) };
            let grid = spec.build().unwrap();
            let u0 = RadialField::from_fn(grid.clone(), |r| {
                Complex64::new(gs.fine().eval(r), 0.0)
            });
            let trace = run(&cfg, &u0).unwrap();
            (
                *trace.mass.last().unwrap(),
                *trace.energy.last().unwrap(),
                *trace.gradnorm.last().unwrap(),
            )
        };
        let (m1, e1, g1) = run_with(1e-3);
        let (m2, e2, g2) = run_with(5e-4);
        assert!(((m1 - m2) / m1).abs() < 1e-8, "mass sensitivity {}", ((m1 - m2) / m1).abs());
        assert!(
            (e1 - e2).abs() < 1e-6 * e1.abs().max(1.0),
            "energy sensitivity {}",
            (e1 - e2).abs()
        );
        assert!(((g1 - g2) / g1).abs() < 1e-4, "gradnorm sensitivity {}", ((g1 - g2) / g1).abs());
    }

    #[test]
    fn config_validation() {
        let grid = RadialGrid::uniform(1, 64, 8.0).unwrap();
        let u = RadialField::from_real_fn(grid, |r| (-r * r).exp());
        let mut cfg = cfg_free();
        cfg.t_end = cfg.t_start; // empty window
        assert!(run(&cfg, &u).is_err());
        let mut cfg = cfg_free();
        cfg.sign = 0.5;
        assert!(run(&cfg, &u).is_err());
        let mut cfg = cfg_free();
        cfg.sigma = 0.3; // >= N/4 for N = 1
        assert!(run(&cfg, &u).is_err());
    }
}
