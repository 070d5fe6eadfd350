use thiserror::Error;

pub type Result<T, E = IlcError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IlcError {
    #[error("transfer function is not proper: numerator degree {numerator} exceeds denominator degree {denominator}")]
    NotProper { numerator: usize, denominator: usize },

    #[error("transfer function denominator has a zero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("transfer function has an empty coefficient list")]
    EmptyPolynomial,

    #[error("sample time must be positive and finite, got {0}")]
    InvalidSampleTime(f64),

    #[error("sample times differ: {left} s vs {right} s")]
    SampleTimeMismatch { left: f64, right: f64 },

    #[error("matrix exponential did not converge (‖A·T‖₁ = {norm:e})")]
    MatrixExponential { norm: f64 },

    #[error("algebraic loop is ill-posed: 1 + D_plant·D_controller = {value:e}")]
    IllPosedLoop { value: f64 },

    #[error("closed loop is not internally stable: spectral radius {spectral_radius}")]
    UnstableLoop { spectral_radius: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Markov parameter list is empty")]
    EmptyMarkov,

    #[error("{name} must be nonnegative")]
    NegativeWeight { name: &'static str },

    #[error("weight premise violated: {0}")]
    WeightPremise(String),

    #[error("{what} is numerically singular (reciprocal condition estimate {rcond:e})")]
    Singular { what: &'static str, rcond: f64 },

    #[error("iteration does not converge: ‖ξ‖₂ = {norm}")]
    NotConvergent { norm: f64 },

    #[error("eigenvalue computation failed for {0}")]
    Eigen(&'static str),

    #[error("invalid reference: {0}")]
    InvalidReference(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("policy {policy} diverged at trial {trial}: total cost {cost:e} exceeds {limit:e}")]
    Divergence {
        policy: String,
        trial: usize,
        cost: f64,
        limit: f64,
    },

    #[error("game analysis needs matching traces: {0}")]
    TraceMismatch(String),
}
