//! Free counterexample: for free semicirculars `||Σ g_i|| / √n → 2`, so
//! `||Σ g_i|| / sqrt(n L(n))` has no positive limsup.

use serde::{Deserialize, Serialize};

use super::log_grid;
use crate::error::{Error, Result};
use crate::martingale::{normalizer, GueStream};
use crate::operator::{CMatrix, Operator};

pub const MIN_SIZE: usize = 50;
/// Step at which the spectral law is compared with the semicircle.
pub const KS_STEP: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicircularConfig {
    pub size: usize,
    pub steps: usize,
    pub seed: u64,
    /// Checkpoints per decade.
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_per_decade() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemicircularPoint {
    pub n: usize,
    /// `||Σ_{i<=n} g_i||`
    pub norm: f64,
    /// `norm / sqrt(n L(n))`
    pub statistic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemicircularReport {
    pub config: SemicircularConfig,
    pub points: Vec<SemicircularPoint>,
    /// Statistic at the last checkpoint is strictly below the one at
    /// `n = 100` (or the first checkpoint for shorter runs).
    pub decreasing: bool,
    /// Kolmogorov–Smirnov distance of the spectrum of `Σ_{i<=100} g_i / 10`
    /// to the semicircle law; `None` when `steps < 100`.
    pub ks_distance: Option<f64>,
}

/// CDF of the semicircle law on `[-2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
}

/// Two-sided KS distance of an ascending sample to `cdf`.
fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn semicircular_demo(config: &SemicircularConfig) -> Result<SemicircularReport> {
    if config.size < MIN_SIZE {
        return Err(Error::param("size", format!("{} < {MIN_SIZE}", config.size)));
    }
    if config.steps == 0 {
        return Err(Error::param("steps", "must be positive"));
    }
    let mut grid = log_grid(config.steps, config.per_decade.max(1));
    if config.steps >= KS_STEP && !grid.contains(&KS_STEP) {
        grid.push(KS_STEP);
        grid.sort_unstable();
    }
    let mut stream = GueStream::new(config.size, config.seed)?;
    let mut sum = CMatrix::zeros(config.size, config.size);
    let mut points = Vec::with_capacity(grid.len());
    let mut ks = None;
    let mut next = 0;
    for n in 1..=config.steps {
        sum += stream.next_matrix();
        if grid.get(next) != Some(&n) {
            continue;
        }
        next += 1;
        let spectrum = Operator::hermitian(sum.clone())?.eigenvalues()?;
        let norm = spectrum[0].abs().max(spectrum[spectrum.len() - 1].abs());
        let nf = n as f64;
        points.push(SemicircularPoint {
            n,
            norm,
            statistic: norm / (nf.sqrt() * normalizer(nf)),
        });
        if n == KS_STEP {
            let scaled: Vec<f64> = spectrum.iter().map(|v| v / nf.sqrt()).collect();
            ks = Some(ks_distance(&scaled, semicircle_cdf));
        }
    }
    let reference = points
        .iter()
        .find(|p| p.n == KS_STEP)
        .or(points.first())
        .expect("at least one checkpoint");
    let decreasing = points.last().expect("at least one checkpoint").statistic < reference.statistic;
    Ok(SemicircularReport {
        config: config.clone(),
        decreasing,
        ks_distance: ks,
        points,
    })
}
