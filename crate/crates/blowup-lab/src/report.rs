//! Machine-readable verification reports: named checks with a value, a
//! bound, and a pass flag, grouped per module and serialized as
//! deterministic JSON.

use serde::Serialize;
use serde_json::Value;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{GridSpec, RadialField, RadialGrid};
use crate::ground_state::{gn_check, solve_ground_state};
use crate::law::{self, LawParams};
use crate::linops::LinearizedPair;
use crate::profile::{solve_s000, ProfileOrder1};

/// One named verification check. `reference` describes the mathematical
/// statement being tested; `pass` is `value < bound` unless the check is a
/// two-sided or sign condition (then `value`/`bound` carry the quantities
/// named in `reference`).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub reference: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// A check that passes when `value` stays strictly below `bound`.
    pub fn below(name: &str, reference: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.to_string(),
            reference: reference.to_string(),
            value,
            bound,
            pass: value.is_finite() && value < bound,
        }
    }

    /// A check that passes when `value` stays strictly above `bound`.
    pub fn above(name: &str, reference: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.to_string(),
            reference: reference.to_string(),
            value,
            bound,
            pass: value.is_finite() && value > bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub crate_version: String,
    pub config_hash: String,
}

/// Aggregate report for one command invocation. Serialization is
/// deterministic given identical inputs and seed: struct field order is
/// fixed and JSON maps sort their keys.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub command: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub versions: Versions,
}

impl VerificationReport {
    pub fn new(command: &str, inputs: Value) -> VerificationReport {
        let canonical = serde_json::to_string(&inputs).unwrap_or_default();
        VerificationReport {
            command: command.to_string(),
            inputs,
            checks: Vec::new(),
            versions: Versions {
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash: format!("{:016x}", fnv1a64(canonical.as_bytes())),
            },
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Shared context for the check builders: the ground state and linearized
/// pair on the standard grid of the requested dimension.
pub struct VerifyContext {
    pub pair: LinearizedPair,
}

impl VerifyContext {
    pub fn build(dim: usize) -> Result<VerifyContext> {
        let grid = GridSpec::standard(dim).build()?;
        let gs = solve_ground_state(dim, grid, 1e-12)?;
        Ok(VerifyContext { pair: LinearizedPair::build(Arc::new(gs))? })
    }
}

/// Ground-state checks: closed-form comparison (N=1), critical energy, and
/// the sharp interpolation constant.
pub fn checks_ground_state(ctx: &VerifyContext) -> Result<Vec<Check>> {
    let gs = ctx.pair.gs();
    let mut out = Vec::new();
    if gs.dim() == 1 {
        let max_err = gs
            .grid()
            .nodes()
            .iter()
            .zip(gs.q().values())
            .map(|(&r, v)| {
                let exact = 3f64.powf(0.25) / (2.0 * r).cosh().sqrt();
                (v.re - exact).abs()
            })
            .fold(0.0f64, f64::max);
        out.push(Check::below(
            "q_closed_form_max_error",
            "Q(r) = 3^{1/4} sech^{1/2}(2r) in one dimension",
            max_err,
            1e-6,
        ));
    }
    out.push(Check::below(
        "critical_energy",
        "E_crit(Q) = 0",
        gs.e_crit.abs(),
        1e-6,
    ));
    out.push(Check::below(
        "interpolation_constant",
        "sharp interpolation ratio equals 1 at Q",
        (gn_check(gs.q(), gs)? - 1.0).abs(),
        1e-6,
    ));
    out.push(Check::below(
        "pde_residual",
        "‖−ΔQ + Q − Q^{1+4/N}‖₂ relative to ‖Q‖₂",
        gs.pde_residual,
        1e-6,
    ));
    Ok(out)
}

/// Linearized-operator checks: the five algebraic identities and the
/// empirical coercivity minimum.
pub fn checks_linops(ctx: &VerifyContext, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for ir in ctx.pair.identity_residuals()? {
        out.push(Check::below(
            &format!("identity_{}", ir.name),
            &ir.formula,
            ir.residual,
            1e-5,
        ));
    }
    let mu = ctx.pair.coercivity_check(100, seed)?;
    out.push(Check::above(
        "coercivity_minimum",
        "projected quadratic form positive over random orthogonalized fields",
        mu,
        0.0,
    ));
    Ok(out)
}

/// Profile checks at one `σ`: equation residuals, the orthogonality of the
/// first corrector, and the exact relation among the β constants.
pub fn checks_profile(ctx: &VerifyContext, sigma: f64) -> Result<(ProfileOrder1, Vec<Check>)> {
    let prof = solve_s000(&ctx.pair, sigma)?;
    let mut out = Vec::new();
    for er in &prof.residuals {
        out.push(Check::below(
            &format!("profile_residual_{}", er.name),
            "first-order profile system residual",
            er.residual,
            1e-7,
        ));
    }
    let q = ctx.pair.gs().q();
    let ortho = prof.p1_plus.inner(q)?.abs();
    out.push(Check::below(
        "p1_plus_orthogonality",
        "(P̃₁⁺, Q)₂ = 0",
        ortho,
        1e-8,
    ));
    let bt = &prof.betas;
    let a = bt.alpha;
    let identity = (bt.beta1_prime + 2.0 * bt.beta1 / ((2.0 - a) * (2.0 - a))
        - 2.0 * bt.beta2 / (2.0 - a))
        .abs();
    out.push(Check::below(
        "beta_identity",
        "β′₁ = −2β₁/(2−α)² + 2β₂/(2−α)",
        identity,
        1e-10,
    ));
    Ok((prof, out))
}

/// Blow-up-law checks for one `(σ, E₀)`: ODE residuals of the closed form,
/// inversion round-trips, energy matching of the initial data, the scaling
/// identity of the exponents, and the Lambert-bracket report.
pub fn checks_law(prof: &ProfileOrder1, e0: f64) -> Result<Vec<Check>> {
    let p = LawParams::new(&prof.betas, e0, None)?;
    let mut out = Vec::new();

    let s0 = law::eval_j(p.lambda0 / 4.0, &p)?;
    let (r1, r2) = law::ode_residuals(&p, s0, 10.0 * s0, 25)?;
    out.push(Check::below(
        "ode_residual_scale",
        "λ_s/λ + b = 0 along the closed form",
        r1,
        1e-6,
    ));
    out.push(Check::below(
        "ode_residual_phase",
        "b_s + b² − θ = 0 along the closed form",
        r2,
        1e-6,
    ));

    let mut worst_rt = 0.0f64;
    for s in [s0, 3.0 * s0, 10.0 * s0] {
        let lam = law::invert_j(s, &p)?;
        worst_rt = worst_rt.max((law::eval_j(lam, &p)? - s).abs() / s);
    }
    out.push(Check::below("j_round_trip", "J(J⁻¹(s)) = s", worst_rt, 1e-8));

    let mut worst_t = 0.0f64;
    for s in [1e3, 1e4, 1e5] {
        let t = law::t_app(s, &p)?;
        worst_t = worst_t.max((law::s_of_t(t, &p)? - s).abs() / s);
    }
    out.push(Check::below("t_round_trip", "s(t_app(s)) = s", worst_t, 1e-8));

    let s1 = law::eval_f(p.lambda0 / 5.0, &p)?;
    let init = law::choose_initial(s1, &p, prof)?;
    let e_err = (prof.profile_energy(init.lambda1, init.b1)? - e0).abs();
    out.push(Check::below(
        "initial_energy_match",
        "E(P at λ₁, b₁) = E₀",
        e_err,
        1e-8,
    ));

    let a = p.alpha;
    let ident = (2.0 / (4.0 - a) - 1.0 / (1.0 + p.sigma)).abs();
    out.push(Check::below(
        "exponent_identity",
        "2/(4−α) = 1/(1+σ) with α = 2−2σ",
        ident,
        1e-14,
    ));

    let us: Vec<f64> = (0..100)
        .map(|i| 1e-3 * (1e6f64).powf(i as f64 / 99.0))
        .collect();
    let wrep = law::wprop_check(&us, 0.1)?;
    out.push(Check {
        name: "lambert_bracket".to_string(),
        reference: "W₋₁ branch bracketed on 100 log-spaced arguments".to_string(),
        value: wrep.worst_lower_margin.min(wrep.worst_upper_margin),
        bound: 0.0,
        pass: wrep.all_hold,
    });
    Ok(out)
}

/// Fast simulator checks on the potential-free equation: mass conservation,
/// splitting reversibility, and self-convergence order on a reduced grid.
pub fn checks_simulate(ctx: &VerifyContext) -> Result<Vec<Check>> {
    use crate::sim::{pseudo_conformal, SimConfig, Stepper};
    let gs = ctx.pair.gs();
    let grid = RadialGrid::uniform(gs.dim(), 1500, 15.0)?;
    let cfg = SimConfig {
        dim: gs.dim(),
        sigma: 0.0,
        sign: -1.0,
        t_start: -0.5,
        t_end: -0.48,
        dt_init: 1e-4,
        dt_min: 1e-9,
        step_tol: 0.0,
        mass_tol: 1e-8,
        energy_tol: 1e-6,
        grad_ceiling: 1e3,
        sponge_strength: 0.0,
        snapshot_times: vec![],
    };
    let stepper = Stepper::new(&cfg, grid.clone())?;
    let u0 = pseudo_conformal(gs, grid, cfg.t_start)?;

    let advance = |dt: f64, span: f64| -> Result<RadialField> {
        let mut u = u0.clone();
        let n = (span / dt).round() as usize;
        for _ in 0..n {
            u = stepper.step(&u, dt)?;
        }
        Ok(u)
    };
    let u1 = advance(2e-4, 0.02)?;
    let mass_drift = (u1.l2_norm_sq() / u0.l2_norm_sq() - 1.0).abs();
    let mut out = vec![Check::below(
        "mass_conservation",
        "splitting substeps unitary in the discrete inner product",
        mass_drift,
        1e-10,
    )];

    let back = {
        let mut u = u1.clone();
        let n = (0.02f64 / 2e-4).round() as usize;
        for _ in 0..n {
            u = stepper.step(&u, -2e-4)?;
        }
        u
    };
    let rev = back.sub(&u0)?.l2_norm_sq().sqrt() / u0.l2_norm_sq().sqrt();
    out.push(Check::below(
        "time_reversibility",
        "forward then backward propagation returns the field",
        rev,
        1e-10,
    ));

    let u2 = advance(1e-4, 0.02)?;
    let u3 = advance(5e-5, 0.02)?;
    let e12 = u1.sub(&u2)?.l2_norm_sq().sqrt();
    let e23 = u2.sub(&u3)?.l2_norm_sq().sqrt();
    let order = (e12 / e23).log2();
    out.push(Check::below(
        "dt_convergence_order",
        "self-convergence order 2 in the step size (deviation from 2)",
        (order - 2.0).abs(),
        0.2,
    ));
    Ok(out)
}

/// Modulation checks: exact-profile recovery and the quadratic scaling of
/// the remainder energy functional.
pub fn checks_decompose(ctx: &VerifyContext, prof: &ProfileOrder1) -> Result<Vec<Check>> {
    use crate::modulation::{decompose, Guess};
    use crate::sim::rescale_to_lab;
    let dim = ctx.pair.gs().dim();
    let lab = GridSpec { r_max: 15.0, growth: 1.03, h: 5e-3, ..GridSpec::standard(dim) }.build()?;
    let (lambda, b, gamma) = (0.1, 0.05, 0.3);
    let pf = prof.assemble_profile(lambda, b)?;
    let u = rescale_to_lab(&pf, lambda, b, gamma, lab)?;
    let st = decompose(
        &u,
        &Guess { lambda: 0.11, b: 0.03, gamma: 0.25 },
        prof,
        ctx.pair.rho(),
        0.5,
    )?;
    let par_err = (st.lambda - lambda)
        .abs()
        .max((st.b - b).abs())
        .max((st.gamma - gamma).abs());
    Ok(vec![
        Check::below(
            "parameter_recovery",
            "decomposition of an exact rescaled profile returns its parameters",
            par_err,
            1e-8,
        ),
        Check::below(
            "orthogonality_residual",
            "(ε,iΛP)₂ = (ε,|y|²P)₂ = (ε,iρ)₂ = 0 at the accepted state",
            st.ortho_residual,
            1e-10,
        ),
        Check::below(
            "remainder_floor",
            "‖ε‖_{H¹} at an exact profile input",
            st.eps_h1(),
            1e-8,
        ),
    ])
}
