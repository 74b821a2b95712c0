//! Numerical laboratory for minimal-mass blow-up of the mass-critical
//! nonlinear Schrödinger equation with an inverse-log potential
//!
//! ```text
//! i u_t + Δu + |u|^{4/N} u ± |x|^{-2σ} log|x| u = 0
//! ```
//!
//! The crate provides, on radially symmetric grids:
//!
//! * ground-state computation (shooting) and its derived constants,
//! * the linearized operators `L+`, `L-`, their inversion and a coercivity probe,
//! * the first-order blow-up profile `P` and phase coefficient `θ`,
//! * the scalar blow-up law (`J`, `λ_app`, `b_app`, `t_app`, Lambert-W helpers),
//! * a radial Crank–Nicolson / split-step time integrator,
//! * modulation decomposition `u ↦ (λ, b, γ, ε)` and the energy functional `H`,
//! * a CLI (`blowup-lab`) that wires everything into reproducible commands.

pub mod error;
pub mod grid;
pub mod ground_state;
pub mod lambert;
pub mod law;
pub mod linops;
pub mod modulation;
pub mod profile;
pub mod quad;
pub mod rate;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use grid::{GridSpec, RadialField, RadialGrid};
pub use ground_state::GroundState;
