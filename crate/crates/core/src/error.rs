use thiserror::Error;

/// Errors surfaced by constructions and certifications in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("m = {0} is outside the supported range 1..=10")]
    UnsupportedM(usize),

    #[error("degenerate multiplicities for m = {m}, l = {l}: m2 = l - m - 1 = {m2} must be positive")]
    DegenerateFamily { m: usize, l: usize, m2: i64 },

    #[error("clifford systems do not match: {0}")]
    Mismatch(String),

    #[error("clifford system is not extendable: {0}")]
    NotExtendable(String),

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("projection did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("retraction undefined: |p(y)| = {norm:e}")]
    RetractionUndefined { norm: f64 },

    #[error("point is not on the focal submanifold: membership residual {0:e}")]
    NotOnFocal(f64),

    #[error("focal point of the function, pattern undefined: {0}")]
    FocalPointOfFunction(String),

    #[error("ambiguous eigenvalue {0} while bucketing a shape operator spectrum")]
    Bucketing(f64),

    #[error("finite-difference check failed: {0}")]
    FiniteDifference(String),

    #[error("unknown family: {0}")]
    UnknownFamily(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
