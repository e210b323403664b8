use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative slack {value:e} at vertex {vertex}, facet {facet}")]
    NegativeSlack { vertex: usize, facet: usize, value: f64 },

    #[error("degenerate incidence: {0}")]
    DegenerateIncidence(String),

    #[error("points are not in simplicial position: {0}")]
    NotSimplicial(String),

    #[error("points do not span the full dimension")]
    NotFullDimensional,

    #[error("vertex {0} lies on no facet")]
    InteriorPoint(usize),

    #[error("gave up after {0} resamples")]
    RetryLimit(usize),

    #[error("vertex centroid lies on the sphere (norm {0})")]
    CentroidOnSphere(f64),

    #[error("border row deviates from e1 by {0:e}")]
    BorderViolation(f64),

    #[error("extracted vertex {0} has (near) zero norm")]
    ZeroVertex(usize),

    #[error("unsupported parameters n={n}, d={d}")]
    Unsupported { n: usize, d: usize },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("infeasible {side} point: {detail}")]
    InfeasiblePoint { side: &'static str, detail: String },

    #[error("solver did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}
