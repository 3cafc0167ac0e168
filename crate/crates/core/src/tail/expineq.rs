use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};
use crate::martingale::BracketPath;
use crate::operator::Operator;

/// Absolute tolerance for `tau(x_n) = 0`.
pub const CENTERING_TOL: f64 = 1e-9;
const HYPOTHESIS_RTOL: f64 = 1e-10;

/// Inputs of the exponential moment inequality
/// `tau(e^{λ x_n}) <= exp((1 + ε) λ^2 D^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpIneqParams {
    /// Uniform bound `||d_k|| <= M`.
    pub m: f64,
    /// Bracket dominator `sum_k E_{k-1}(d_k^2) <= D^2 1`.
    pub d2: f64,
    pub eps: f64,
    pub lambda: f64,
}

impl ExpIneqParams {
    /// `sqrt(ε) / (M (1 + ε))`, infinite when `M = 0`.
    pub fn lambda_max(m: f64, eps: f64) -> f64 {
        eps.sqrt() / (m * (1.0 + eps))
    }

    /// The tightest admissible parameters for a path at step `n`:
    /// `M = max_{k<=n} ||d_k||`, `D^2 = s_n^2`.
    pub fn tight<P: BracketPath + ?Sized>(path: &P, n: usize, eps: f64, lambda: f64) -> Self {
        let stats = path.stats();
        let m = stats.dnorm()[1..=n].iter().copied().fold(0.0, f64::max);
        ExpIneqParams {
            m,
            d2: stats.s2()[n],
            eps,
            lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::param("eps", format!("{} outside (0, 1]", self.eps)));
        }
        if !(self.m >= 0.0 && self.d2 >= 0.0) {
            return Err(Error::param("M, D^2", "must be nonnegative"));
        }
        let max = Self::lambda_max(self.m, self.eps);
        if !(self.lambda >= 0.0) || self.lambda > max * (1.0 + 1e-12) {
            return Err(Error::Hypothesis(
                Hypothesis::LambdaRange,
                format!("lambda = {} outside [0, {max}]", self.lambda),
            ));
        }
        Ok(())
    }
}

/// Both sides of the exponential moment inequality, with logs kept so that
/// overflowing exponentials still compare correctly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpMomentSides {
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub holds: bool,
}

impl ExpMomentSides {
    /// `log rhs - log lhs`; nonnegative when the inequality holds.
    pub fn margin(&self) -> f64 {
        self.log_rhs - self.log_lhs
    }
}

/// `ln tau(exp(λ x))` from the spectrum, by log-sum-exp.
pub fn log_trace_exp(x: &Operator, lambda: f64) -> Result<f64> {
    let eig = x.eigenvalues()?;
    let scaled: Vec<f64> = eig.iter().map(|v| lambda * v).collect();
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = scaled.iter().map(|v| (v - top).exp()).sum();
    Ok(top + sum.ln() - (eig.len() as f64).ln())
}

/// Checks the three hypotheses at step `n`, then evaluates both sides.
pub fn exp_moment_sides<P: BracketPath + ?Sized>(
    path: &P,
    n: usize,
    params: &ExpIneqParams,
) -> Result<ExpMomentSides> {
    params.validate()?;
    let stats = path.stats();
    if n > stats.horizon() {
        return Err(Error::param("n", format!("{n} beyond horizon {}", stats.horizon())));
    }
    let x = path.partial_operator(n)?;
    let center = x.tau();
    if center.abs() > CENTERING_TOL {
        return Err(Error::Hypothesis(
            Hypothesis::Centered,
            format!("tau(x_{n}) = {center:e}"),
        ));
    }
    if let Some((k, d)) = stats.dnorm()[1..=n]
        .iter()
        .enumerate()
        .find(|(_, d)| **d > params.m * (1.0 + HYPOTHESIS_RTOL))
    {
        return Err(Error::Hypothesis(
            Hypothesis::DifferenceBound,
            format!("||d_{}|| = {d} > M = {}", k + 1, params.m),
        ));
    }
    // the bracket sum is positive, so its top eigenvalue is s_n^2
    let s2 = stats.s2()[n];
    if s2 > params.d2 * (1.0 + HYPOTHESIS_RTOL) {
        return Err(Error::Hypothesis(
            Hypothesis::Bracket,
            format!("s_{n}^2 = {s2} > D^2 = {}", params.d2),
        ));
    }
    let log_lhs = log_trace_exp(&x, params.lambda)?;
    let log_rhs = (1.0 + params.eps) * params.lambda * params.lambda * params.d2;
    Ok(ExpMomentSides {
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        log_lhs,
        log_rhs,
        holds: log_lhs <= log_rhs + (1.0 + 1e-10f64).ln(),
    })
}
