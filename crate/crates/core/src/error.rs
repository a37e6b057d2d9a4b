use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("non-finite value {value} at r = {r} (node {node})")]
    NonFinite { node: usize, r: f64, value: f64 },

    #[error("right-hand side is not integrable against r^(N-1) near the origin")]
    NonIntegrable,

    #[error("singular linear system at row {row}")]
    SingularSystem { row: usize },

    #[error("maximum principle violated at node {node} of level {level}: value {value}")]
    MaximumPrinciple { level: usize, node: usize, value: f64 },

    #[error("hypothesis {name} failed: {detail}")]
    Hypothesis { name: String, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("least-squares fit is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("no node satisfies the supersolution inequality")]
    NoSupersolutionRadius,

    #[error("no sampled exponent admits charge {alpha}")]
    NoAdmissibleGamma { alpha: f64 },

    #[error("sample t = {t} outside tabulated range [{lo}, {hi}]")]
    OutOfTable { t: f64, lo: f64, hi: f64 },
}
