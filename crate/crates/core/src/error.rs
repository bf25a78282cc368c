use thiserror::Error;

/// Failures reported by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("observable variance {0:.3e} is too small for a moment estimate")]
    DegenerateObservable(f64),

    #[error(
        "analytic slope {analytic:.12e} disagrees with finite difference {finite_difference:.12e}"
    )]
    DerivativeMismatch {
        analytic: f64,
        finite_difference: f64,
    },

    #[error("noise model not supported on this path: {0}")]
    UnsupportedNoise(String),

    #[error("probability {mass:.3e} reached the edge of the simulated window (limit {limit:.3e})")]
    Leakage { mass: f64, limit: f64 },

    #[error("wavefront weight {mass:.4} inside the window is below the required {required:.4}")]
    Concentration { mass: f64, required: f64 },

    #[error("dense representation of {0} qubits exceeds the supported size")]
    TooLarge(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
