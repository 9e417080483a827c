use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("closed-form solution needs an underdamped oscillator (0 <= b < 2), got b = {0}")]
    NotUnderdamped(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite {what} at ({x}, {y})")]
    NonFinite { what: &'static str, x: f64, y: f64 },

    #[error("fixed-point iteration diverged from t = {t} after {iterations} iterations")]
    Divergence { t: f64, iterations: u32 },

    #[error("step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("cannot fit convergence order: {0}")]
    DegenerateFit(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
