use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight parameter alpha = {0} must be greater than -2")]
    AlphaOutOfRange(f64),

    #[error("{op} requires alpha > -1, got alpha = {alpha}")]
    AlphaNotAboveMinusOne { op: &'static str, alpha: f64 },

    #[error("point {0} is not inside the open unit disk")]
    OutsideDisk(Complex64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symbol has |phi(0)| = {0} >= 1 and cannot be normalized")]
    UnimodularConstant(f64),

    #[error("{0} kernel requires a symbol")]
    MissingSymbol(&'static str),

    #[error("monomial scale is unresolved; bind the symbol to a weight parameter first")]
    UnresolvedScale,

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("operator kind {0} is not a defect operator")]
    NotDefect(String),

    #[error("kernel nearly vanishes at points ({i}, {j}): |K| = {value:e}")]
    DivisionHazard { i: usize, j: usize, value: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{op} {}: {source}", path.display())]
    Io {
        op: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(op: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            op,
            path: path.into(),
            source,
        }
    }
}
