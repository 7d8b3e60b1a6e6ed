use thiserror::Error;

/// Errors raised by the lattice, convergence and martingale routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("model mismatch: expected dimension {expected}, found {found}")]
    ModelMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("horizon {0} is too short, at least 2 terms are required")]
    ShortHorizon(usize),

    #[error("battery of positive test vectors is empty")]
    EmptyBattery,

    #[error("hypotheses unmet: {0}")]
    Hypothesis(String),

    #[error("view is not normalized: x0star(x0) = {0}, rescale the functional first")]
    NotNormalized(f64),

    #[error("fiber weak unit missing")]
    MissingWeakUnit,

    #[error("linear program failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ModelMismatch { expected, found })
    }
}
