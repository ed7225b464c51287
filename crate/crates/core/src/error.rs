use thiserror::Error;

use crate::schemes::LimitDiagnostics;

/// Errors raised by model construction, the incremental schemes and the
/// verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// The energy model violates one of its structural requirements
    /// (positivity on the verification grid, dimension mismatch, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A caller-supplied argument is outside the documented range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A non-finite value was produced while evaluating an objective.
    #[error("non-finite objective value {value} at {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    /// A numerical procedure failed to make progress.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The initial datum is not a local minimizer of `E(0, .) + Psi(. - x0)`.
    #[error("initial state is not stable: objective drops by {drop:e} at {witness:?}")]
    InitialInstability { drop: f64, witness: Vec<f64> },

    /// The limit driver could not certify convergence on the supplied
    /// parameter sequences.
    #[error("limit not converged: {}", .0.summary())]
    NonConvergence(Box<LimitDiagnostics>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Ok(value)` if finite, otherwise the `NonFinite` error carrying
/// the offending point.
pub(crate) fn finite(value: f64, point: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            value,
            point: point.to_vec(),
        })
    }
}
