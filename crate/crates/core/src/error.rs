use thiserror::Error;

/// Errors raised by the linear algebra, spectral, histories and apparatus layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("operator is not hermitian (||X - X^dag||_F = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not unitary (||U^dag U - I||_F = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("vectors are not orthonormal ({what}: deviation {deviation:e})")]
    NotOrthonormal { what: &'static str, deviation: f64 },

    #[error("invalid projective decomposition: {reason}")]
    InvalidDecomposition { reason: String },

    #[error("operators do not commute (||[X, Y]||_F = {norm:e})")]
    NotCommuting { norm: f64 },

    #[error("decompositions are incompatible (max ||[P_i, Q_j]||_F = {max_commutator:e}); no single framework contains both")]
    IncompatibleDecompositions { max_commutator: f64 },

    #[error("unknown outcome label {label:?} at time {time:?}")]
    UnknownLabel { time: String, label: String },

    #[error("unknown time label {0:?}")]
    UnknownTime(String),

    #[error(
        "family is inconsistent (max |D(o, o')| = {max_offdiag:e}); probabilities are not defined"
    )]
    Inconsistent { max_offdiag: f64 },

    #[error(
        "conditioning event {event} has probability {probability:e}; conditional is undefined"
    )]
    ZeroProbabilityCondition { event: String, probability: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
