use thiserror::Error;

/// Errors raised by the geometry, optimization and checking routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("antipodal points ({context}): 1 + <p,q> = {gap:e}")]
    AntipodalPoints { context: String, gap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate immersion at u = {u:?}: {reason}")]
    DegenerateImmersion { u: Vec<f64>, reason: String },

    #[error("chart seam mismatch on axis {axis}: gap {gap:e}")]
    SeamMismatch { axis: usize, gap: f64 },

    #[error("gauss map singular at sample {index}: |det| = {det:e}")]
    SingularGaussMap { index: usize, det: f64 },

    #[error("degree quadrature did not round to an integer: raw = {raw}, residual = {residual}")]
    NonIntegerDegree { raw: f64, residual: f64 },

    #[error("empty point set")]
    EmptyInput,

    #[error("enclosing ball degenerate: radius {radius} is within 1e-6 of pi")]
    DegenerateEnclosure { radius: f64 },

    #[error("ambient dimension {dim} exceeds oracle limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("theta = {0} outside (0, pi/6)")]
    ThetaOutOfRange(f64),

    #[error("point outside the open upper hemisphere: last coordinate {last:e}")]
    OutsideHemisphere { last: f64 },

    #[error("group has only the identity element")]
    TrivialGroup,

    #[error("invalid group element {index}: {reason}")]
    InvalidGroup { index: usize, reason: String },

    #[error("fundamental domain boundary sample is empty")]
    SamplingTooCoarse,

    #[error("mesh not invariant under element {element}: distance {distance:e}")]
    NotInvariant { element: usize, distance: f64 },

    #[error("R = {radius} is not below r/2 = {half_separation}")]
    RTooLarge { radius: f64, half_separation: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
