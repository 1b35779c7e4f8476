use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),
    #[error("{what}: no convergence within {terms} terms")]
    NoConvergence { what: &'static str, terms: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported order alpha = {alpha}, beta = {beta}")]
    Unsupported { alpha: f64, beta: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("symbol not integrable: {0}")]
    NonIntegrableSymbol(String),
    #[error("resonance at m = {m}: 1 - (m+1) alpha vanishes")]
    Resonance { m: usize },
    #[error("parameters are not mild: {0}")]
    NonMild(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("overflow: {0}")]
    Overflow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
