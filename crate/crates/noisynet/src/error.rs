use thiserror::Error;

/// Errors produced by estimation, sampling and parsing routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("adjacency matrices have different sizes ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("degenerate denominator in {context}: |{value:.3e}| below tolerance")]
    DegenerateDenominator { context: &'static str, value: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last alpha iterates {last:?})")]
    NoConvergence { iterations: usize, last: [f64; 2] },

    #[error("no admissible bootstrap (gamma1, gamma2) for alpha={alpha}, beta={beta}: {reason}")]
    NoValidGamma { alpha: f64, beta: f64, reason: String },

    #[error("rewiring stopped after {proposals} proposals with two-star gap {two_star_gap} and triangle gap {triangle_gap}")]
    TargetNotReached {
        proposals: u64,
        two_star_gap: u64,
        triangle_gap: u64,
    },

    #[error("clustering coefficient undefined: graph has no two-stars")]
    ZeroTwoStars,

    #[error("pattern needs {needed} distinct vertices but the graph has only {available}")]
    PatternTooLarge { needed: usize, available: usize },

    #[error("operation supports only two-star and triangle patterns, got {0}")]
    UnsupportedKind(String),

    #[error("pattern enumeration exceeded the work budget of {budget} slot visits")]
    WorkBudgetExceeded { budget: u64 },

    #[error("matrix shapes are not conformable: {0}")]
    ShapeMismatch(String),

    #[error("estimated variance {value:.3e} for {context} is negative beyond numerical tolerance")]
    NegativeVariance { context: &'static str, value: f64 },

    #[error("replicate set has {n} samples; the Fisher transform needs at least 4")]
    InsufficientSamples { n: usize },

    #[error("gene {gene:?} has zero variance within a replicate set")]
    ConstantGene { gene: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
