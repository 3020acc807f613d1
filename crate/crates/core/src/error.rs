use thiserror::Error;

/// Errors raised by field evaluation, metric construction and spray evaluation.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain of validity")]
    OutsideDomain { x: f64, y: f64 },
    #[error("convexity violated at ({x}, {y}): speed^2 - |W|^2 = {lambda}")]
    Convexity { x: f64, y: f64, lambda: f64 },
    #[error("non-positive ship speed {speed} at ({x}, {y})")]
    NonPositiveSpeed { x: f64, y: f64, speed: f64 },
    #[error("background metric is not positive definite at ({x}, {y})")]
    NotPositiveDefinite { x: f64, y: f64 },
    #[error("zero tangent vector where a non-zero one is required")]
    DegenerateVector,
    #[error("fundamental form degenerate: L_uu L_vv - L_uv^2 = {det}")]
    Degenerate { det: f64 },
    #[error("non-finite value encountered at ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
