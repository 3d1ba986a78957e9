use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole: denominator of the Mobius action is numerically zero")]
    Pole,

    #[error("singular matrix (determinant zero)")]
    SingularMatrix,

    #[error("invalid discriminant: {0}")]
    InvalidDiscriminant(String),

    #[error("point is not in the upper half-plane")]
    NotInUpperHalfPlane,

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("interpolation of level {level} failed at the maximum precision of {prec} bits")]
    PrecisionExhausted { level: u32, prec: u32 },

    #[error("expansion of level {0} has a nonzero imaginary part")]
    NonRealExpansion(u32),

    #[error("invalid geodesic matrix: {0}")]
    InvalidGeodesic(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("certification failed for level {level} at ({x}, {y}): {reason}")]
    CertificationFailed { level: u32, x: f64, y: f64, reason: String },

    #[error("no seeds: {0}")]
    NoSeeds(String),

    #[error("curve is horizontal or vertical")]
    HorizontalVertical,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
