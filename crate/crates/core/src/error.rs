use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("alphabet mismatch between operands")]
    AlphabetMismatch,
    #[error("free group rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("automaton has no initial vertex `*`")]
    MissingInitial,
    #[error("vertex {0} is unreachable from the initial vertex")]
    UnreachableVertex(String),
    #[error("dangling vertex reference {0} at line {1}")]
    DanglingVertex(usize, usize),
    #[error("element `{0}` is outside the coding image / evaluator table")]
    OutsideTable(String),
    #[error("memory budget exceeded: reachable set has {reachable} entries, budget {budget}")]
    BudgetExceeded { reachable: usize, budget: usize },
    #[error("word radius {radius} exceeds the configured budget {budget}; lower T")]
    RadiusBudget { radius: usize, budget: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("root bracketing failed: {0}")]
    Bracketing(String),
    #[error("empty component")]
    EmptyComponent,
    #[error("cylinder depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("normalization failed: {0}")]
    Degenerate(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("translation-length bracket too wide: width {width} > requested {requested}")]
    BracketTooWide { width: f64, requested: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
