use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid cost model: {0}")]
    InvalidCost(String),
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: String },
    #[error("failed to converge: {0}")]
    Convergence(String),
    #[error("degenerate root configuration: {0}")]
    Degenerate(String),
    #[error("integrability violated: {0}")]
    Integrability(String),
    #[error("Q has no sign change on [-1e6, 1e6]")]
    NoRoot,
    #[error("averaging function violates the sign/monotonicity structure: {0}")]
    Assumption4Violation(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
}
