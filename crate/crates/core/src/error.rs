use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value or model fails its construction invariants.
    #[error("invalid construction: {0}")]
    Construction(String),

    /// A truncated probability mass function retains too much tail mass.
    #[error(
        "truncation error: tail mass {tail_mass:.3e} exceeds ceiling {ceiling:.3e} at n_max={n_max}; raise n_max"
    )]
    Truncation {
        tail_mass: f64,
        ceiling: f64,
        n_max: usize,
    },

    /// Quadrature failed to reach the requested tolerance.
    #[error(
        "numeric error: {context} (achieved tolerance {achieved:.3e}, requested {requested:.3e})"
    )]
    Quadrature {
        context: String,
        achieved: f64,
        requested: f64,
    },

    /// A requested quantity overflows its representable range.
    #[error("range error: {0}")]
    Range(String),

    /// I/O failure while reading or writing an external file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file being imported does not match the expected format.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
