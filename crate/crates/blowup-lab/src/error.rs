use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch")]
    GridMismatch,
    #[error("grid too small")]
    GridTooSmall,
    #[error("sigma out of range (index2): sigma={0}, dim={1}")]
    SigmaOutOfRange(f64, usize),
    #[error("zero field")]
    ZeroField,
    #[error("shooting bracket exhausted")]
    ShootingBracketExhausted,
    #[error("Fredholm condition violated: (rhs, Q)_2 = {0:.3e}")]
    FredholmViolated(f64),
    #[error("linear solve did not converge: residual {0:.3e}")]
    SolveDiverged(f64),
    #[error("outside branch domain: branch {branch}, z = {z}")]
    OutsideBranchDomain { branch: i32, z: f64 },
    #[error("law domain violated")]
    LawDomainViolated,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("profile expansion invalid: lambda = {0}")]
    ProfileExpansionInvalid(f64),
    #[error("energy matching failed")]
    EnergyMatchingFailed,
    #[error("step collapse: dt underflow at t = {0}")]
    StepCollapse(f64),
    #[error("outside decomposition tube")]
    OutsideDecompositionTube,
    #[error("non-monotone rescaled time")]
    NonMonotoneTime,
    #[error("insufficient concentration: lambda window spans {0:.3} decades")]
    InsufficientConcentration(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
