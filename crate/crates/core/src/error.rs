use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameters ({alpha}, {beta}) are not stationary: |alpha| + |beta| must be < 1")]
    NonStationary { alpha: f64, beta: f64 },

    #[error("Appell F4 series diverges: sqrt|x| + sqrt|y| = {0} >= 1")]
    Divergent(f64),

    #[error("binomial representation needs k*l >= 0, got ({k}, {l})")]
    WrongQuadrant { k: i64, l: i64 },

    #[error("matrix is not symmetric positive definite (after jitter {jitter:e})")]
    NotSpd { jitter: f64 },

    #[error("simulation method {method} does not support {dist} innovations")]
    MethodUnsupported { method: String, dist: String },

    #[error("field has no value at lattice index ({0}, {1})")]
    MissingValues(i64, i64),

    #[error("field was built without innovations")]
    MissingInnovations,

    #[error("normal-equation matrix is singular: det {det:e} against scale {scale:e}")]
    SingularDesign { det: f64, scale: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("omega is indeterminate: both schedules vanish")]
    Indeterminate,

    #[error("matrix is singular")]
    Singular,

    #[error("rate undefined: gamma(m)^2 == delta(m)^2 at m = {0}")]
    RateUndefined(u64),

    #[error("{singular} of {reps} replications had a singular design (limit 1%)")]
    TooManySingular { singular: usize, reps: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
