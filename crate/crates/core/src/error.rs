use std::fmt;

use thiserror::Error;

/// Hypotheses of the exponential moment inequality, numbered as in the lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// i) the martingale is centered, `tau(x_k) = x_0 = 0`
    Centered,
    /// ii) `||d_k|| <= M`
    DifferenceBound,
    /// iii) `sum_k E_{k-1}(d_k^2) <= D^2 1`
    Bracket,
    /// `lambda` outside `[0, sqrt(eps) / (M (1 + eps))]`
    LambdaRange,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::Centered => "i (centering)",
            Hypothesis::DifferenceBound => "ii (difference bound)",
            Hypothesis::Bracket => "iii (bracket domination)",
            Hypothesis::LambdaRange => "lambda admissibility",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("norm exponent p = {0} is below 1")]
    InvalidExponent(f64),

    #[error("function undefined at eigenvalue {0}")]
    Domain(f64),

    #[error("t = {0} outside (0, 1)")]
    InvalidQuantile(f64),

    #[error("operator family is empty")]
    EmptyFamily,

    #[error("not a projection: eigenvalue {0} is not in {{0, 1}}")]
    NotProjection(f64),

    #[error("dimension {dim} exceeds the dense-dimension cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("filtration level {level} outside 0..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("operator is not an element of the algebra: {0}")]
    NotInAlgebra(&'static str),

    #[error("hypothesis {0} violated: {1}")]
    Hypothesis(Hypothesis, String),

    #[error("input is not a martingale (difference residual {0:.3e})")]
    NotMartingale(f64),

    #[error("dominator is infeasible (violation {0:.3e})")]
    InfeasibleDominator(f64),

    #[error("operator is not positive (minimum eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error(
        "series convergence gate: exponent beta^2 (1+delta)^2 / (4 (1+eps)) = {0} must exceed 1"
    )]
    ConvergenceGate(f64),

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
