use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hausdorff undefined on empty set")]
    EmptySet,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("point {x} outside domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("B-spline order must be at least 3, got {0}")]
    BsplineOrder(usize),
    #[error("global iteration requires contractions (map {index} has factor {factor})")]
    NotContractive { index: usize, factor: f64 },
    #[error("code not admissible at position {position}")]
    CodeNotAdmissible { position: usize },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("operator not sup-norm contractive (s = {s})")]
    OperatorNotContractive { s: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {last})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        residuals: Vec<f64>,
    },
    #[error("scaling factor {value} of piece {piece} must satisfy |s| < 1")]
    ScalingTooLarge { piece: usize, value: f64 },
    #[error("endpoint conditions violated: {}", .0.join("; "))]
    EndpointConditions(Vec<String>),
    #[error("insufficient smoothness: {0}")]
    InsufficientSmoothness(String),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("bound diverges: {0}")]
    BoundDiverges(String),
    #[error("unknown norm tag `{0}`")]
    UnknownNorm(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
