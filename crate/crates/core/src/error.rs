use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("number of modes must be at least 1 (got {0})")]
    InvalidModes(usize),

    #[error("time must be non-negative (got {0})")]
    NegativeTime(f64),

    #[error("observation time {t} precedes the impulse time {tau}")]
    TimeBeforeImpulse { t: f64, tau: f64 },

    #[error("control bound must be non-negative (got {0})")]
    NegativeBound(f64),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("secular equation did not converge after {iterations} steps (|‖u‖ - M| = {gap:e})")]
    SecularNotConverged { iterations: usize, gap: f64 },

    #[error("fixed-point iteration did not converge after {iterations} steps (last step {step:e})")]
    FixedPointNotConverged { iterations: usize, step: f64 },

    #[error("norm constraint is inactive; the fixed-point iteration only applies on the sphere")]
    ConstraintInactive,

    #[error("initial state is zero; no admissible-time bound")]
    ZeroInitialState,

    #[error("inconsistent bisection bracket: {0}")]
    InconsistentBracket(String),

    #[error("oracle supports at most {max} modes (got {got})")]
    OracleTooLarge { max: usize, got: usize },

    #[error("certificate not applicable: {0}")]
    NotApplicable(String),

    #[error("adjoint direction vanishes on the actuator; optimality certificate undefined")]
    ZeroAdjoint,

    #[error("perturbed instance left the nontrivial region: {0}")]
    LeftNontrivialRegion(String),
}
