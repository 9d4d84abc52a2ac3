use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a measure, map, or table.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data: profile files, value tables, configuration.
    #[error("format error: {0}")]
    Format(String),

    /// A numerical routine exceeded its budget or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A pointwise evaluation failed at specific grid nodes.
    #[error("evaluation error at nodes {nodes:?}: {message}")]
    Evaluation { message: String, nodes: Vec<usize> },

    /// An iterative solver stopped before reaching its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
