//! Classical martingales on `P` sampled paths, as multiplication operators
//! on `P` points with the uniform trace.
//!
//! Paths are streamed, never stored: path `p` is regenerated from its own
//! keyed stream whenever it is visited. Conditional expectations are those of
//! the increment law (independent, centered increments), so
//! `E_{k-1}(d_k^2) = v_k` and `s_n^2 = v_1 + ... + v_n` hold exactly, and
//! `||d_k||` is the essential supremum of the law.
//!
//! With antithetic pairing, paths `2q` and `2q + 1` are mirror images, so the
//! empirical trace of every odd function of `x_n` (in particular `x_n`
//! itself) vanishes exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{default_alpha, PathStats};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::rng::{self, StreamRng};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Unit-variance increment law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncrementLaw {
    /// Fair signs.
    #[default]
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
}

impl IncrementLaw {
    /// Essential supremum of `|ξ|`.
    pub fn ess_sup(self) -> f64 {
        match self {
            IncrementLaw::Rademacher => 1.0,
            IncrementLaw::Uniform => SQRT3,
        }
    }
}

/// Variances `v_k` of the increments `d_k = σ_k ξ_k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceProfile {
    #[default]
    Unit,
    /// `v_1, v_2, ...`
    Explicit(Vec<f64>),
    /// `||d_k|| = α_k s_{k-1}/u_{k-1}`, `α_k = c / ln(k + 2)`, `s_0/u_0 := 1`.
    Growth { c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSpec {
    pub paths: usize,
    pub horizon: usize,
    #[serde(default)]
    pub law: IncrementLaw,
    #[serde(default)]
    pub profile: VarianceProfile,
    #[serde(default = "default_true")]
    pub antithetic: bool,
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl SampledSpec {
    /// Rademacher, unit variance, antithetic.
    pub fn rademacher(paths: usize, horizon: usize, seed: u64) -> Self {
        SampledSpec {
            paths,
            horizon,
            law: IncrementLaw::Rademacher,
            profile: VarianceProfile::Unit,
            antithetic: true,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagonalMartingale {
    spec: SampledSpec,
    sigma: Vec<f64>,
    stats: PathStats,
}

impl DiagonalMartingale {
    pub fn new(spec: SampledSpec) -> Result<Self> {
        if spec.horizon < 1 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        if spec.paths < 2 {
            return Err(Error::param("paths", "need at least 2 paths"));
        }
        if spec.antithetic && !spec.paths.is_multiple_of(2) {
            return Err(Error::param("paths", "antithetic pairing needs an even path count"));
        }
        let ess = spec.law.ess_sup();
        let mut sigma = vec![0.0];
        let mut stats = PathStats::new();
        let mut s2 = 0.0;
        for k in 1..=spec.horizon {
            let sd = match &spec.profile {
                VarianceProfile::Unit => 1.0,
                VarianceProfile::Explicit(v) => {
                    let v = *v.get(k - 1).ok_or_else(|| {
                        Error::param("profile", format!("{} variances for horizon {}", v.len(), spec.horizon))
                    })?;
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::param("profile", format!("variance v_{k} = {v}")));
                    }
                    v.sqrt()
                }
                VarianceProfile::Growth { c } => {
                    let prev = if k == 1 { 1.0 } else { stats.s(k - 1) / stats.u()[k - 1] };
                    default_alpha(*c, k) * prev / ess
                }
            };
            s2 += sd * sd;
            if !s2.is_finite() {
                return Err(Error::param("profile", format!("bracket overflows at step {k}")));
            }
            sigma.push(sd);
            stats.push(s2, sd * ess);
        }
        Ok(DiagonalMartingale { spec, sigma, stats })
    }

    pub fn spec(&self) -> &SampledSpec {
        &self.spec
    }

    pub fn paths(&self) -> usize {
        self.spec.paths
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    /// Deterministic bracket statistics shared by every path.
    pub fn stats(&self) -> &PathStats {
        &self.stats
    }

    /// Partial sums `x_1(p), ..., x_N(p)` of path `p`.
    pub fn path(&self, p: usize) -> PartialSums<'_> {
        assert!(p < self.spec.paths, "path {p} out of range");
        let (replica, sign) = if self.spec.antithetic {
            (p / 2, if p.is_multiple_of(2) { 1.0 } else { -1.0 })
        } else {
            (p, 1.0)
        };
        PartialSums {
            owner: self,
            rng: rng::stream(self.spec.seed, replica as u64, "sampled-path"),
            sign,
            n: 0,
            x: 0.0,
            bits: 0,
            left: 0,
        }
    }

    /// `x_n` as a multiplication operator for each requested `n`, in one
    /// sweep over the paths.
    pub fn partials_at(&self, ns: &[usize]) -> Result<Vec<Operator>> {
        let last = ns.iter().copied().max().unwrap_or(0);
        if last > self.horizon() {
            return Err(Error::param("n", format!("{last} beyond horizon {}", self.horizon())));
        }
        let mut values = vec![vec![0.0; self.paths()]; ns.len()];
        for p in 0..self.paths() {
            let mut it = self.path(p);
            let mut xs = vec![0.0; last + 1];
            for n in 1..=last {
                xs[n] = it.next().expect("within horizon");
            }
            for (slot, n) in values.iter_mut().zip(ns) {
                slot[p] = xs[*n];
            }
        }
        Ok(values.into_iter().map(Operator::diagonal).collect())
    }

    pub fn partial(&self, n: usize) -> Result<Operator> {
        Ok(self.partials_at(&[n])?.remove(0))
    }
}

/// Streaming iterator over one path's partial sums.
pub struct PartialSums<'a> {
    owner: &'a DiagonalMartingale,
    rng: StreamRng,
    sign: f64,
    n: usize,
    x: f64,
    bits: u64,
    left: u32,
}

impl PartialSums<'_> {
    fn draw(&mut self) -> f64 {
        match self.owner.spec.law {
            IncrementLaw::Rademacher => {
                if self.left == 0 {
                    self.bits = self.rng.random();
                    self.left = 64;
                }
                let b = self.bits & 1;
                self.bits >>= 1;
                self.left -= 1;
                if b == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            IncrementLaw::Uniform => self.rng.random_range(-SQRT3..=SQRT3),
        }
    }
}

impl Iterator for PartialSums<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.n == self.owner.spec.horizon {
            return None;
        }
        self.n += 1;
        let xi = self.draw();
        self.x += self.sign * self.owner.sigma[self.n] * xi;
        Some(self.x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.owner.spec.horizon - self.n;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PartialSums<'_> {}
