use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideMesh { x: f64, y: f64 },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("M(ln h) is not positive definite at h = {h}; it is positive definite only for h < {h0}")]
    NotPositiveDefinite { h: f64, h0: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("A0 is undetermined in the alpha = 0 regime and no value was supplied")]
    UnknownA0,

    #[error("truncation indicator {indicator:.3e} exceeds the requested tolerance {tol:.3e}")]
    Truncation { indicator: f64, tol: f64 },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
