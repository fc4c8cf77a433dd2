use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid sieve range [{lo}, {hi})")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("block of {len} integers exceeds capacity {capacity}")]
    BlockTooLarge { len: u64, capacity: usize },

    #[error("base primes incomplete: need every prime up to {needed}, have up to {have}")]
    IncompleteBasePrimes { needed: u64, have: u64 },

    #[error("{m} is outside the factorization table (bound {bound})")]
    OutOfSieveBound { m: u64, bound: u64 },

    #[error("cannot factorize 0")]
    FactorizeZero,

    #[error("bound {requested} exceeds configured cap {cap}")]
    BoundExceedsCap { requested: u64, cap: u64 },

    #[error("{function}: non-finite value at p={p}, alpha={alpha}{}", at_m(*m))]
    PrimePowerEvaluation {
        function: String,
        p: u64,
        alpha: u32,
        m: Option<u64>,
    },

    #[error("{function}: non-finite value at m={m}")]
    PointwiseEvaluation { function: String, m: u64 },

    #[error("{function}: {reason}")]
    WrongKind { function: String, reason: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("grid must be non-empty and strictly increasing")]
    InvalidGrid,

    #[error("grid point {n} is below the model floor {floor}")]
    BelowModelFloor { n: u64, floor: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureDiverged { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all residuals in the fit window are zero")]
    ExactMatch,

    #[error("exponent fit needs {needed} nonzero residuals, have {have}")]
    InsufficientPoints { needed: usize, have: usize },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_m(m: Option<u64>) -> String {
    m.map(|m| format!(" (m={m})")).unwrap_or_default()
}
