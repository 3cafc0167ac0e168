//! Self-adjoint martingales, bracket statistics and the η-adic stopping rule.
//!
//! Index conventions: every per-step sequence is stored with index `0`
//! meaning step `n = 0` (`x_0 = 0`, `s_0^2 = 0`, `u_0 = 1`), so `s2[n]` is
//! `s_n^2` directly.

mod dense;
mod gue;
mod sampled;

use std::borrow::Cow;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::Operator;

pub use dense::{bracket_norms, gen_martingale, BoundSequence, Coupling, GeneratorSpec, MartingalePath, SiteLaw};
pub use gue::{gen_gue_increments, GueStream};
pub use sampled::{DiagonalMartingale, IncrementLaw, PartialSums, SampledSpec, VarianceProfile};

/// Common view of dense and sampled martingales.
pub trait BracketPath {
    fn stats(&self) -> &PathStats;

    /// `x_n`, borrowed when stored and regenerated when streamed.
    fn partial_operator(&self, n: usize) -> Result<Cow<'_, Operator>>;

    /// Short label for reports.
    fn label(&self) -> String;

    fn horizon(&self) -> usize {
        self.stats().horizon()
    }
}

impl BracketPath for MartingalePath {
    fn stats(&self) -> &PathStats {
        MartingalePath::stats(self)
    }

    fn partial_operator(&self, n: usize) -> Result<Cow<'_, Operator>> {
        if n > self.horizon() {
            return Err(Error::param("n", format!("{n} beyond horizon {}", self.horizon())));
        }
        Ok(Cow::Borrowed(self.partial(n)))
    }

    fn label(&self) -> String {
        let m = self.model();
        format!("{:?}(m={},n={})", m.kind(), m.site_dim(), m.depth()).to_lowercase()
    }
}

impl BracketPath for DiagonalMartingale {
    fn stats(&self) -> &PathStats {
        DiagonalMartingale::stats(self)
    }

    fn partial_operator(&self, n: usize) -> Result<Cow<'_, Operator>> {
        Ok(Cow::Owned(self.partial(n)?))
    }

    fn label(&self) -> String {
        format!("sampled(P={},N={})", self.paths(), self.horizon())
    }
}

/// `e^e`: below this `L` is clamped to 1.
pub const ITERLOG_FLOOR: f64 = 15.154262241479262;

/// `L(x) = max{1, ln ln x}` for `x > 0`.
pub fn iterlog(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(x));
    }
    Ok(iterlog_clamped(x))
}

/// `L` extended by 1 to `x <= e^e`, including `x = 0` (the zero bracket).
fn iterlog_clamped(x: f64) -> f64 {
    if x <= ITERLOG_FLOOR {
        1.0
    } else {
        x.ln().ln().max(1.0)
    }
}

/// `u = L(s^2)^{1/2}`, equal to 1 while the clamp is active.
pub fn normalizer(s2: f64) -> f64 {
    iterlog_clamped(s2).sqrt()
}

/// `α_n = c / ln(n + 2)`, the default vanishing growth sequence.
pub fn default_alpha(c: f64, n: usize) -> f64 {
    c / ((n + 2) as f64).ln()
}

/// Bracket statistics of one path: `s_n^2`, `u_n` and `||d_n||_inf`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathStats {
    s2: Vec<f64>,
    u: Vec<f64>,
    dnorm: Vec<f64>,
}

impl Default for PathStats {
    fn default() -> Self {
        PathStats {
            s2: vec![0.0],
            u: vec![1.0],
            dnorm: vec![0.0],
        }
    }
}

impl PathStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends step `n + 1`. The bracket is monotone in exact arithmetic; a
    /// rounding dip below the previous value is lifted back to it.
    pub fn push(&mut self, s2: f64, dnorm: f64) {
        let prev = *self.s2.last().expect("s2[0] always present");
        let s2 = s2.max(prev);
        self.s2.push(s2);
        self.u.push(normalizer(s2));
        self.dnorm.push(dnorm);
    }

    pub fn horizon(&self) -> usize {
        self.s2.len() - 1
    }

    /// `s_n^2` for `n = 0..=N`.
    pub fn s2(&self) -> &[f64] {
        &self.s2
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn dnorm(&self) -> &[f64] {
        &self.dnorm
    }

    pub fn s(&self, n: usize) -> f64 {
        self.s2[n].sqrt()
    }

    /// `s_n u_n`, the LIL normalizer of `x_n`.
    pub fn scale(&self, n: usize) -> f64 {
        self.s(n) * self.u[n]
    }

    /// Whether `L(s_n^2)` is the clamped value 1 rather than `ln ln s_n^2`.
    pub fn clamped(&self, n: usize) -> bool {
        self.s2[n] <= ITERLOG_FLOOR
    }

    /// Realized `α_n = ||d_n|| u_n / s_n`; undefined while `s_n = 0`.
    pub fn alpha(&self, n: usize) -> Option<f64> {
        (n >= 1 && self.s2[n] > 0.0).then(|| self.dnorm[n] * self.u[n] / self.s(n))
    }

    /// Summary CSV with columns `n, s2, u, dnorm, alpha`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "s2", "u", "dnorm", "alpha"])?;
        for n in 0..=self.horizon() {
            let alpha = self.alpha(n).map(|a| a.to_string()).unwrap_or_default();
            out.write_record([
                n.to_string(),
                self.s2[n].to_string(),
                self.u[n].to_string(),
                self.dnorm[n].to_string(),
                alpha,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Block ratio `η ∈ (1, 2)`. Stores `η^2` as given when built from it, so
/// thresholds `η^{2n}` are exact for `η^2 = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Eta {
    eta: f64,
    eta2: f64,
}

impl Eta {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 1.0 && eta < 2.0) {
            return Err(Error::param("eta", format!("{eta} outside (1, 2)")));
        }
        Ok(Eta { eta, eta2: eta * eta })
    }

    pub fn from_squared(eta2: f64) -> Result<Self> {
        let eta = eta2.sqrt();
        Self::new(eta).map(|_| Eta { eta, eta2 })
    }

    pub fn get(self) -> f64 {
        self.eta
    }

    pub fn squared(self) -> f64 {
        self.eta2
    }

    /// `η^{2n}`.
    pub fn threshold(self, n: usize) -> f64 {
        self.eta2.powi(n as i32)
    }

    /// `ln η^{2n} = (2 ln η) n`, computed without forming `η^{2n}`.
    pub fn log_threshold(self, n: usize) -> f64 {
        self.eta2.ln() * n as f64
    }
}

impl TryFrom<f64> for Eta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Eta::new(v)
    }
}

impl From<Eta> for f64 {
    fn from(e: Eta) -> f64 {
        e.eta
    }
}

/// Block boundaries `k_0 = 0 < k_1 <= ...` of the stopping rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoppingIndices {
    pub k: Vec<usize>,
    /// The horizon ended before `k_count` existed.
    pub truncated: bool,
}

impl StoppingIndices {
    /// Complete blocks `(n, k_n, k_{n+1})`.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.k.windows(2).enumerate().map(|(n, w)| (n, w[0], w[1]))
    }
}

fn stopping_index(s2: &[f64], threshold: f64) -> Option<usize> {
    // first j >= 0 with s2[j + 1] >= threshold; s2 is nondecreasing
    let pos = s2[1..].partition_point(|v| *v < threshold);
    (pos < s2.len() - 1).then_some(pos)
}

/// `k_n = inf{j : s_{j+1}^2 >= η^{2n}}` for `n = 0..=count`, with
/// `s2[n] = s_n^2` and `s2[0] = 0`.
pub fn stopping_indices(s2: &[f64], eta: Eta, count: usize) -> StoppingIndices {
    let mut k = vec![0];
    for n in 1..=count {
        match stopping_index(s2, eta.threshold(n)) {
            Some(j) => k.push(j),
            None => return StoppingIndices { k, truncated: true },
        }
    }
    StoppingIndices { k, truncated: false }
}

/// Every `k_n` that exists within the horizon.
pub fn all_stopping_indices(s2: &[f64], eta: Eta) -> StoppingIndices {
    let mut k = vec![0];
    let mut n = 1;
    while let Some(j) = stopping_index(s2, eta.threshold(n)) {
        k.push(j);
        n += 1;
    }
    StoppingIndices { k, truncated: false }
}

/// Realized growth sequence of a path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    /// `alpha[n]`, `None` while `s_n = 0` (and at `n = 0`).
    pub alpha: Vec<Option<f64>>,
    /// No `α_n` is defined: the path is identically zero.
    pub undefined: bool,
    /// `α_n <= target_n` at every defined `n`.
    pub within_target: Option<bool>,
    /// First `n` from which `α_m <= target_m` holds through the horizon.
    pub within_target_from: Option<usize>,
    /// Least-squares slope of `ln α_n` against `ln n` over the last decade
    /// `n ∈ (N/10, N]`; negative means `α_n` is still decaying.
    pub decade_slope: Option<f64>,
}

/// Realized `α_n`, an optional comparison with `target[n]` and the decay
/// slope over the last decade.
pub fn growth_profile(stats: &PathStats, target: Option<&[f64]>) -> GrowthProfile {
    let horizon = stats.horizon();
    let alpha: Vec<Option<f64>> = (0..=horizon).map(|n| stats.alpha(n)).collect();
    let undefined = alpha.iter().all(Option::is_none);
    let (within_target, within_target_from) = match target {
        None => (None, None),
        Some(t) => {
            let ok = |n: usize| alpha[n].is_none_or(|a| t.get(n).is_none_or(|b| a <= *b));
            let all = (1..=horizon).all(ok);
            let from = (1..=horizon)
                .rev()
                .take_while(|n| ok(*n))
                .last()
                .or((horizon == 0).then_some(0));
            (Some(all), from)
        }
    };
    let points: Vec<(f64, f64)> = (horizon / 10 + 1..=horizon)
        .filter_map(|n| alpha[n].filter(|a| *a > 0.0).map(|a| ((n as f64).ln(), a.ln())))
        .collect();
    GrowthProfile {
        alpha,
        undefined,
        within_target,
        within_target_from,
        decade_slope: slope(&points),
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
