use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("field is singular at {point:?}")]
    Singular { point: Vec<f64> },

    #[error("cannot parse {what} from '{input}': {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid step {h} is too coarse for eps = {eps} (need h <= eps/4)")]
    GridTooCoarse { h: f64, eps: f64 },

    #[error("problem too large: {0}")]
    Infeasible(String),

    #[error("shrinking by {delta} leaves an empty domain")]
    EmptyShrink { delta: f64 },

    #[error("lattice data missing: {0}")]
    Unpopulated(String),

    #[error("degree undefined on plaquette {cell:?}: antipodal bond")]
    AntipodalBond { cell: [i64; 3] },

    #[error("operation requires unit-circle values")]
    NotUnitValued,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
