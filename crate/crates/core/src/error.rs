use thiserror::Error;

/// Errors raised by the numerical operations of the crate.
///
/// Domain-level negative answers (a matrix outside a group, a field outside an
/// orbit) are ordinary return values; these variants are reserved for inputs
/// an operation cannot meaningfully process.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (|det| = {det:e} below threshold {threshold:e})")]
    SingularMatrix { det: f64, threshold: f64 },

    #[error("matrix violates the observer symmetry condition (max deviation {deviation:e})")]
    SymmetryViolated { deviation: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("values outside the fiber group at {} site(s), first at {}", sites.len(), sites.first().copied().unwrap_or(0))]
    NotInFiberGroup { sites: Vec<usize> },

    #[error("gauge map differs from the identity on its boundary collar at {} site(s)", sites.len())]
    CollarViolation { sites: Vec<usize> },

    #[error("principal matrix logarithm undefined: {0}")]
    LogBranchFailure(String),

    #[error("metric is singular at site {site}")]
    SingularMetric { site: usize },

    #[error("observer frame is singular at site {site}")]
    SingularFrame { site: usize },

    #[error("bilinear form is not invariant under the fiber group (defect {defect:e})")]
    NonInvariantForm { defect: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
