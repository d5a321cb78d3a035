use thiserror::Error;

/// Errors raised by the numerical kernels and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A profile left the admissible set `r > 0`. Reports the first bad node.
    #[error("profile not positive at node {node} (value {value:e})")]
    Domain { node: usize, value: f64 },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// The requested CMC curve exists but is not a positive periodic graph.
    #[error("curve with B = {b} is a {kind}, not representable as a periodic graph")]
    Classification { b: f64, kind: &'static str },

    #[error("no volume-matching lift: radicand {radicand:e} is not positive")]
    NoLift { radicand: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
