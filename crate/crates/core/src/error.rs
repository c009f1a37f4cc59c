use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
    #[error("element {element} has nonpositive Jacobian determinant {det:e}")]
    InvertedElement { element: usize, det: f64 },
    #[error("weighted assembly needs a region tag on every element")]
    MissingRegionTags,
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error(
        "eigensolver did not converge after {iterations} iterations (worst residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },
    #[error("first eigenvalue is degenerate (relative gap {gap:e})")]
    DegenerateGroundState { gap: f64 },
    #[error("unknown boundary tag '{0}'")]
    UnknownTag(String),
    #[error("series is not valid at x1 = {0} (needs 0 < x1 <= R)")]
    SeriesDomain(f64),
    #[error("potential undefined at x3 = {0}")]
    PotentialUndefined(f64),
    #[error("nonpositive eigenvalue difference at R = {0}; shrink the fit window")]
    NonpositiveDifference(f64),
    #[error("mu - lambda has no sign change on the search interval")]
    NoSignChange,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("{dofs} degrees of freedom exceed the guard of {limit}")]
    DofGuard { dofs: usize, limit: usize },
    #[error("prerequisite computation failed: {0}")]
    Dependency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
