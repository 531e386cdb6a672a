use thiserror::Error;

/// Errors produced by the numerical core.
///
/// Variants are coarse on purpose: callers dispatch on the class of failure
/// (bad input, resource cap, numerical breakdown), the message carries the
/// module-qualified detail.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent sizes, out-of-range parameters, or non-finite data.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A potential violated its positivity floor at some lattice site.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// A coefficient (or its regularization) lost strict positivity.
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    /// Problem size exceeds a configured resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An iterative or quadrature routine failed to reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Mutually inconsistent experiment setup (e.g. mismatched boxes).
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
