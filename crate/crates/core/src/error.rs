use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("log-derivative evaluated at a root (x = {0})")]
    Pole(f64),

    #[error("derivative of a degree-one polynomial has no roots")]
    EmptyResult,

    #[error("construction error: {0}")]
    Construction(String),

    #[error("numerical breakdown at step {step}: {msg}")]
    Breakdown { step: usize, msg: String },

    #[error("time step collapsed to {dt:e} at step {step}")]
    Stagnation { step: usize, dt: f64 },

    #[error("growth overflow: mode {mode} at t = {t} exceeds the representable range")]
    GrowthOverflow { mode: usize, t: f64 },

    #[error("growth exponent undefined for the zero state")]
    UndefinedExponent,

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
