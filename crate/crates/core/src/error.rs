use thiserror::Error;

/// Errors raised by the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate triangle (signed area {area:e})")]
    DegenerateTriangle { area: f64 },

    #[error("non-finite value {value} encountered {context}")]
    NonFinite { value: f64, context: String },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("degenerate polynomial construction: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutsideDomain { x: f64, y: f64 },

    #[error("reconstruction failed at (mu={mu}, sigma={sigma}): {source}")]
    GridPoint {
        mu: f64,
        sigma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_finite(value: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            value,
            context: context(),
        })
    }
}
