use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("degenerate operand: {0}")]
    DegenerateOperand(&'static str),
    #[error("empty fuzzy set")]
    EmptySet,
    #[error("length mismatch in {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("invalid membership function: {0}")]
    InvalidMf(String),
    #[error("input set is not normal (peak grade {0})")]
    NotNormal(f64),
    #[error("no exact closed form for {0}")]
    NoClosedForm(&'static str),
    #[error("membership grade {0} outside [0, 1]")]
    GradeOutOfRange(f64),
    #[error("embedded-set explosion: {count} selections exceed cap {cap}")]
    EmbeddedExplosion { count: u128, cap: u128 },
    #[error("no rule fired")]
    NoRuleFired,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("arity mismatch: expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("unsupported set kind: {0}")]
    Unsupported(String),
    #[error("invalid interval weights: {0}")]
    InvalidWeights(String),
}

pub type Result<T> = std::result::Result<T, FuzzyError>;
