use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (jitter repair exhausted)")]
    NotPositiveDefinite,

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation region has probability below 1e-12")]
    DegenerateTruncation,

    #[error("component {component} became empty (responsibility mass {mass:.3e} < {threshold:.3e})")]
    EmptyComponent {
        component: usize,
        mass: f64,
        threshold: f64,
    },

    #[error("could not build a usable starting point: {0}")]
    SingularStart(String),

    #[error("models are not comparable: {0}")]
    MismatchedModels(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
