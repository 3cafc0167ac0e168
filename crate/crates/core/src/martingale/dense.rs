use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{default_alpha, PathStats};
use crate::error::{Error, Result};
use crate::filtration::{AlgebraModel, ModelKind};
use crate::operator::Operator;
use crate::random::{random_symmetry, random_traceless};
use crate::rng;

/// Residual accepted for `E_{k-1}(d_k) = 0` and adaptedness.
pub const MARTINGALE_TOL: f64 = 1e-9;

/// Size `M_k` of the site factor of `d_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSequence {
    Constant(f64),
    /// `M_1, M_2, ...`
    Explicit(Vec<f64>),
    /// `M_k = α_k s_{k-1} / u_{k-1}` with `α_k = c / ln(k + 2)` and
    /// `s_0 / u_0` read as 1, so `||d_k|| <= α_k s_{k-1}/u_{k-1}` holds by
    /// construction with the previous bracket.
    Growth { c: f64 },
}

/// Left factor `w_{k-1} ∈ N_{k-1}` of `d_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// `w = 1`: commuting differences.
    #[default]
    None,
    /// `w` a random self-adjoint unitary `U diag(±1) U*` with Haar `U`
    /// (random signs on the diagonal model).
    Haar,
}

/// New-site factor `a_k`, traceless and self-adjoint on `C^m`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteLaw {
    /// Centered Gaussian hermitian (diagonal on the diagonal model).
    #[default]
    Random,
    /// The same matrix at every step, rescaled to norm `M_k`.
    Fixed(Operator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub bounds: BoundSequence,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default)]
    pub site: SiteLaw,
    /// Number of differences; defaults to the model depth.
    #[serde(default)]
    pub horizon: Option<usize>,
}

impl GeneratorSpec {
    pub fn new(bounds: BoundSequence, coupling: Coupling) -> Self {
        GeneratorSpec {
            bounds,
            coupling,
            site: SiteLaw::Random,
            horizon: None,
        }
    }
}

/// A finite self-adjoint martingale `x_n = d_1 + ... + d_n` in a dense or
/// enumerated model, with its conditional brackets.
#[derive(Clone, Debug, Serialize)]
pub struct MartingalePath {
    model: AlgebraModel,
    differences: Vec<Operator>,
    partials: Vec<Operator>,
    brackets: Vec<Operator>,
    stats: PathStats,
}

struct Brackets {
    partials: Vec<Operator>,
    brackets: Vec<Operator>,
    stats: PathStats,
}

impl Brackets {
    fn new(dim: usize) -> Self {
        Brackets {
            partials: vec![Operator::zeros(dim)],
            brackets: vec![Operator::zeros(dim)],
            stats: PathStats::new(),
        }
    }

    /// Appends `d_k`, `k = len`, after checking adaptedness and centering.
    fn push(&mut self, model: &AlgebraModel, d: &Operator) -> Result<()> {
        let k = self.partials.len();
        if d.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                actual: d.dim(),
            });
        }
        if !d.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: d.hermitian_residual(),
            });
        }
        let dnorm = d.norm_inf();
        let tol = MARTINGALE_TOL * dnorm.max(1.0);
        if model.expect(d, k)?.dist(d) > tol {
            return Err(Error::NotInAlgebra("difference d_k is not in N_k"));
        }
        let centered = model.expect(d, k - 1)?.norm_inf();
        if centered > tol {
            return Err(Error::NotMartingale(centered));
        }
        let b = self.brackets[k - 1].plus(&model.expect(&d.square(), k - 1)?);
        self.stats.push(b.max_eigenvalue()?.max(0.0), dnorm);
        self.brackets.push(b);
        self.partials.push(self.partials[k - 1].plus(d));
        Ok(())
    }
}

/// `s_n^2 = ||sum_{i<=n} E_{i-1}(d_i^2)||` and `u_n` for validated differences.
pub fn bracket_norms(model: &AlgebraModel, differences: &[Operator]) -> Result<PathStats> {
    let mut acc = Brackets::new(model.dim());
    check_horizon(model, differences.len())?;
    for d in differences {
        acc.push(model, d)?;
    }
    Ok(acc.stats)
}

fn check_horizon(model: &AlgebraModel, horizon: usize) -> Result<()> {
    if horizon > model.depth() {
        return Err(Error::LevelOutOfRange {
            level: horizon,
            depth: model.depth(),
        });
    }
    Ok(())
}

impl MartingalePath {
    /// Validates `d_k ∈ N_k`, `E_{k-1}(d_k) = 0` and self-adjointness.
    pub fn from_differences(model: AlgebraModel, differences: Vec<Operator>) -> Result<Self> {
        check_horizon(&model, differences.len())?;
        let mut acc = Brackets::new(model.dim());
        for d in &differences {
            acc.push(&model, d)?;
        }
        Ok(MartingalePath {
            model,
            differences,
            partials: acc.partials,
            brackets: acc.brackets,
            stats: acc.stats,
        })
    }

    pub fn model(&self) -> &AlgebraModel {
        &self.model
    }

    pub fn horizon(&self) -> usize {
        self.differences.len()
    }

    /// `d_1, ..., d_N`.
    pub fn differences(&self) -> &[Operator] {
        &self.differences
    }

    /// `d_k` for `1 <= k <= N`.
    pub fn difference(&self, k: usize) -> &Operator {
        &self.differences[k - 1]
    }

    /// `x_0 = 0, x_1, ..., x_N`.
    pub fn partials(&self) -> &[Operator] {
        &self.partials
    }

    pub fn partial(&self, n: usize) -> &Operator {
        &self.partials[n]
    }

    /// `sum_{i<=n} E_{i-1}(d_i^2)`.
    pub fn bracket(&self, n: usize) -> &Operator {
        &self.brackets[n]
    }

    pub fn stats(&self) -> &PathStats {
        &self.stats
    }

    /// `max_k ||E_{k-1}(d_k)||`.
    pub fn martingale_residual(&self) -> Result<f64> {
        self.differences
            .iter()
            .enumerate()
            .try_fold(0.0f64, |acc, (i, d)| Ok(acc.max(self.model.expect(d, i)?.norm_inf())))
    }

    /// `max_{j<k} ||[d_j, d_k]||`: zero for commuting paths.
    pub fn max_commutator(&self) -> f64 {
        let d = &self.differences;
        let mut worst = 0.0f64;
        for k in 1..d.len() {
            for j in 0..k {
                worst = worst.max(d[j].commutator(&d[k]).norm_inf());
            }
        }
        worst
    }
}

fn site_factor<R: Rng + ?Sized>(
    model: &AlgebraModel,
    law: &SiteLaw,
    norm: f64,
    rng: &mut R,
) -> Result<Operator> {
    let m = model.site_dim();
    match law {
        SiteLaw::Random if model.kind() == ModelKind::Diagonal => {
            let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let mean = g.iter().sum::<f64>() / m as f64;
            let centered: Vec<f64> = g.iter().map(|v| v - mean).collect();
            let peak = centered.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Ok(if peak == 0.0 {
                Operator::zeros(m)
            } else {
                Operator::diagonal(centered.iter().map(|v| v * norm / peak).collect())
            })
        }
        SiteLaw::Random => Ok(random_traceless(m, norm, rng)),
        SiteLaw::Fixed(a) => {
            if a.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: a.dim(),
                });
            }
            if !a.is_hermitian() || a.tau().abs() > MARTINGALE_TOL {
                return Err(Error::param("site", "fixed site matrix must be traceless hermitian"));
            }
            if model.kind() == ModelKind::Diagonal && !a.is_diagonal() {
                return Err(Error::NotInAlgebra("the diagonal model needs a diagonal site matrix"));
            }
            let a_norm = a.norm_inf();
            if a_norm == 0.0 {
                return Err(Error::param("site", "fixed site matrix is zero"));
            }
            Ok(a.scale(norm / a_norm))
        }
    }
}

fn coupling_factor<R: Rng + ?Sized>(
    model: &AlgebraModel,
    coupling: Coupling,
    dim: usize,
    rng: &mut R,
) -> Operator {
    match coupling {
        Coupling::None => Operator::identity(dim),
        Coupling::Haar if model.kind() == ModelKind::Diagonal => Operator::diagonal(
            (0..dim)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        ),
        Coupling::Haar => random_symmetry(dim, rng),
    }
}

/// Generates `d_k = w_{k-1} ⊗ a_k` placed in `N_k`: `w_{k-1}` acts on the
/// first `k - 1` sites, `a_k` is traceless on site `k`, so
/// `E_{k-1}(d_k) = w_{k-1} tau(a_k) = 0` and `||d_k|| = M_k`.
pub fn gen_martingale(model: AlgebraModel, spec: &GeneratorSpec, seed: u64) -> Result<MartingalePath> {
    let horizon = spec.horizon.unwrap_or(model.depth());
    check_horizon(&model, horizon)?;
    let mut rng = rng::stream(seed, 0, "martingale");
    let mut acc = Brackets::new(model.dim());
    let mut differences = Vec::with_capacity(horizon);
    let m = model.site_dim();
    for k in 1..=horizon {
        let bound = match &spec.bounds {
            BoundSequence::Constant(c) => *c,
            BoundSequence::Explicit(v) => *v.get(k - 1).ok_or_else(|| {
                Error::param("bounds", format!("{} entries for horizon {horizon}", v.len()))
            })?,
            BoundSequence::Growth { c } => {
                let prev = if k == 1 {
                    1.0
                } else {
                    acc.stats.s(k - 1) / acc.stats.u()[k - 1]
                };
                default_alpha(*c, k) * prev
            }
        };
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::param("bounds", format!("M_{k} = {bound}")));
        }
        let a = site_factor(&model, &spec.site, bound, &mut rng)?;
        let w = coupling_factor(&model, spec.coupling, m.pow(k as u32 - 1), &mut rng);
        let small = match model.kind() {
            ModelKind::Pinching => a.kron(&w),
            _ => w.kron(&a),
        };
        let d = model.embed(&small, k)?;
        acc.push(&model, &d)?;
        differences.push(d);
    }
    Ok(MartingalePath {
        model,
        differences,
        partials: acc.partials,
        brackets: acc.brackets,
        stats: acc.stats,
    })
}
