//! Finite-dimensional models of a tracial algebra with a filtration
//! `N_0 = C 1 ⊆ N_1 ⊆ ... ⊆ N_n = N` and trace-preserving conditional
//! expectations `E_k : N -> N_k`.
//!
//! * `tensor`: `N = M_m^{⊗n}`, `N_k = M_m^{⊗k} ⊗ 1`. `E_k` is the normalized
//!   partial trace over the trailing `n - k` factors, computed by index
//!   contraction.
//! * `pinching`: `N = M_{m^n}` with `N_k` the block-diagonal matrices whose
//!   `m^{n-k}` diagonal blocks of size `m^k` are all equal. `E_k` pinches onto
//!   the diagonal blocks and replaces each block by the block average.
//! * `diagonal`: `N = l_inf` of `m^n` sample points with the uniform trace,
//!   `N_k` the functions of the first `k` digits. `E_k` averages over cells.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{CMatrix, Operator};
use crate::random::{random_hermitian, random_positive};
use crate::rng;

/// Side length cap for the dense kinds.
pub const DENSE_DIM_CAP: usize = 4096;

/// Sample-point cap for the diagonal kind.
pub const DIAGONAL_DIM_CAP: usize = 1 << 24;

/// Worst residual accepted by [`AlgebraModel::verify_ce_axioms`].
pub const CE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tensor,
    Pinching,
    Diagonal,
}

/// JSON descriptor `{kind, m, n}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub kind: ModelKind,
    pub m: usize,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelDescriptor", into = "ModelDescriptor")]
pub struct AlgebraModel {
    kind: ModelKind,
    m: usize,
    n: usize,
    dim: usize,
}

/// Index `k` of `E_k`, validated against a model depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FiltrationLevel(usize);

impl FiltrationLevel {
    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<ModelDescriptor> for AlgebraModel {
    type Error = Error;
    fn try_from(d: ModelDescriptor) -> Result<Self> {
        AlgebraModel::new(d.kind, d.m, d.n)
    }
}

impl From<AlgebraModel> for ModelDescriptor {
    fn from(a: AlgebraModel) -> Self {
        ModelDescriptor {
            kind: a.kind,
            m: a.m,
            n: a.n,
        }
    }
}

impl AlgebraModel {
    /// Model with the default dimension caps.
    pub fn new(kind: ModelKind, m: usize, n: usize) -> Result<Self> {
        let cap = match kind {
            ModelKind::Diagonal => DIAGONAL_DIM_CAP,
            _ => DENSE_DIM_CAP,
        };
        Self::with_cap(kind, m, n, cap)
    }

    pub fn with_cap(kind: ModelKind, m: usize, n: usize, cap: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", format!("site dimension {m} < 2")));
        }
        if n < 1 {
            return Err(Error::param("n", "depth must be at least 1"));
        }
        let dim = u32::try_from(n)
            .ok()
            .and_then(|n| m.checked_pow(n))
            .filter(|d| *d <= cap)
            .ok_or(Error::DimensionCap {
                dim: (m as f64).powi(n as i32).min(usize::MAX as f64) as usize,
                cap,
            })?;
        Ok(AlgebraModel { kind, m, n, dim })
    }

    pub fn tensor(m: usize, n: usize) -> Result<Self> {
        Self::new(ModelKind::Tensor, m, n)
    }

    pub fn pinching(m: usize, n: usize) -> Result<Self> {
        Self::new(ModelKind::Pinching, m, n)
    }

    pub fn diagonal(m: usize, n: usize) -> Result<Self> {
        Self::new(ModelKind::Diagonal, m, n)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn site_dim(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    /// `m^n`: matrix side length (dense kinds) or number of sample points.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self, k: usize) -> Result<FiltrationLevel> {
        if k > self.n {
            Err(Error::LevelOutOfRange {
                level: k,
                depth: self.n,
            })
        } else {
            Ok(FiltrationLevel(k))
        }
    }

    fn pow(&self, e: usize) -> usize {
        self.m.pow(e as u32)
    }

    fn check_input(&self, x: &Operator) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        if self.kind == ModelKind::Diagonal && !x.is_diagonal() {
            return Err(Error::NotInAlgebra(
                "the diagonal model holds multiplication operators only",
            ));
        }
        Ok(())
    }

    /// `E_k(x)`.
    pub fn conditional_expectation(&self, x: &Operator, k: FiltrationLevel) -> Result<Operator> {
        self.check_input(x)?;
        let k = self.level(k.0)?.0;
        let out = match x.diagonal_values() {
            Some(v) => Operator::diagonal(self.expect_diagonal(v, k)),
            None => {
                let m = x.matrix();
                let out = match self.kind {
                    ModelKind::Tensor => self.partial_trace(&m, k),
                    ModelKind::Pinching => self.pinch_average(&m, k),
                    ModelKind::Diagonal => unreachable!("rejected by check_input"),
                };
                Operator::new(out)?
            }
        };
        if x.is_hermitian() {
            out.into_hermitian()
        } else {
            Ok(out)
        }
    }

    /// Shorthand for `conditional_expectation(x, level(k)?)`.
    pub fn expect(&self, x: &Operator, k: usize) -> Result<Operator> {
        self.conditional_expectation(x, self.level(k)?)
    }

    /// `E_k` restricted to multiplication operators.
    fn expect_diagonal(&self, v: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        match self.kind {
            // high digits kept, cells of size m^{n-k} averaged
            ModelKind::Tensor | ModelKind::Diagonal => {
                let cell = self.pow(self.n - k);
                for (src, dst) in v.chunks(cell).zip(out.chunks_mut(cell)) {
                    let mean = src.iter().sum::<f64>() / cell as f64;
                    dst.fill(mean);
                }
            }
            // low digits kept, averaged across the m^{n-k} blocks
            ModelKind::Pinching => {
                let block = self.pow(k);
                let blocks = self.pow(self.n - k);
                for r in 0..block {
                    let mean = (0..blocks).map(|l| v[l * block + r]).sum::<f64>() / blocks as f64;
                    for l in 0..blocks {
                        out[l * block + r] = mean;
                    }
                }
            }
        }
        out
    }

    /// Normalized partial trace over factors `k+1..n`, tensored back with 1.
    fn partial_trace(&self, x: &CMatrix, k: usize) -> CMatrix {
        let kept = self.pow(k);
        let traced = self.pow(self.n - k);
        let norm = 1.0 / traced as f64;
        let mut reduced = CMatrix::zeros(kept, kept);
        for a2 in 0..kept {
            for a1 in 0..kept {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..traced {
                    acc += x[(a1 * traced + c, a2 * traced + c)];
                }
                reduced[(a1, a2)] = acc * norm;
            }
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for a2 in 0..kept {
            for a1 in 0..kept {
                let v = reduced[(a1, a2)];
                for b in 0..traced {
                    out[(a1 * traced + b, a2 * traced + b)] = v;
                }
            }
        }
        out
    }

    /// Pinching `sum_l P_l x P_l` onto the `m^{n-k}` diagonal blocks of size
    /// `m^k`, then each block replaced by the block average.
    fn pinch_average(&self, x: &CMatrix, k: usize) -> CMatrix {
        let size = self.pow(k);
        let blocks = self.pow(self.n - k);
        let mut avg = CMatrix::zeros(size, size);
        for l in 0..blocks {
            avg += x.view((l * size, l * size), (size, size));
        }
        avg *= Complex64::new(1.0 / blocks as f64, 0.0);
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for l in 0..blocks {
            out.view_mut((l * size, l * size), (size, size)).copy_from(&avg);
        }
        out
    }

    /// Places an element of the level-`k` factor into `N_k`.
    ///
    /// For the dense kinds `small` is an `m^k`-dimensional operator; for the
    /// diagonal kind it is a function on the `m^k` level-`k` cells.
    pub fn embed(&self, small: &Operator, k: usize) -> Result<Operator> {
        let k = self.level(k)?.0;
        let kept = self.pow(k);
        if small.dim() != kept {
            return Err(Error::DimensionMismatch {
                expected: kept,
                actual: small.dim(),
            });
        }
        let fill = Operator::identity(self.pow(self.n - k));
        Ok(match self.kind {
            ModelKind::Tensor => small.kron(&fill),
            ModelKind::Pinching => fill.kron(small),
            ModelKind::Diagonal => match small.diagonal_values() {
                Some(_) => small.kron(&fill),
                None => {
                    return Err(Error::NotInAlgebra(
                        "the diagonal model embeds multiplication operators only",
                    ))
                }
            },
        })
    }

    /// Random self-adjoint element of `N_k`: a Gaussian on the level-`k`
    /// factor (or cells), symmetrized and embedded.
    pub fn random_element<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Operator> {
        let kept = self.pow(self.level(k)?.0);
        let small = match self.kind {
            ModelKind::Diagonal => {
                Operator::diagonal((0..kept).map(|_| rng.sample(StandardNormal)).collect())
            }
            _ => random_hermitian(kept, rng),
        };
        self.embed(&small, k)
    }

    /// Random positive element of `N_k`.
    pub fn random_positive_element<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Operator> {
        let kept = self.pow(self.level(k)?.0);
        let small = match self.kind {
            ModelKind::Diagonal => Operator::diagonal(
                (0..kept)
                    .map(|_| {
                        let g: f64 = rng.sample(StandardNormal);
                        g * g
                    })
                    .collect(),
            ),
            _ => random_positive(kept, rng),
        };
        self.embed(&small, k)
    }

    /// Whether `x ∈ N_k`, tested as `E_k(x) = x`.
    pub fn contains(&self, x: &Operator, k: usize, tol: f64) -> Result<bool> {
        Ok(self.expect(x, k)?.max_abs_diff(x) <= tol * (1.0 + x.max_abs_entry()))
    }

    /// Property run of the conditional-expectation axioms on random samples.
    pub fn verify_ce_axioms(&self, sample_count: usize, seed: u64) -> Result<CeReport> {
        if sample_count == 0 {
            return Err(Error::param("sample_count", "must be at least 1"));
        }
        let mut rng = rng::stream(seed, 0, "ce-axioms");
        let mut r = CeReport {
            samples: sample_count,
            ..CeReport::default()
        };
        let one = Operator::identity(self.dim);
        for k in 0..=self.n {
            r.unit = r.unit.max(self.expect(&one, k)?.max_abs_diff(&one));
        }
        let levels = self.n + 1;
        for s in 0..sample_count {
            let k = s % levels;
            let j = rng.random_range(0..levels);
            let x = self.random_element(self.n, &mut rng)?;
            let a = self.random_element(k, &mut rng)?;
            let b = self.random_element(k, &mut rng)?;
            let xn = x.norm_inf();
            let ex = self.expect(&x, k)?;

            let axb = a.product(&x).product(&b);
            let lhs = self.expect(&axb, k)?;
            let rhs = a.product(&ex).product(&b);
            let scale = 1.0 + a.norm_inf() * xn * b.norm_inf();
            r.module = r.module.max(lhs.dist(&rhs) / scale);

            r.trace = r.trace.max((ex.tau() - x.tau()).abs() / (1.0 + xn));

            let tower = self.expect(&self.expect(&x, k)?, j)?;
            let direct = self.expect(&x, j.min(k))?;
            r.tower = r.tower.max(tower.dist(&direct) / (1.0 + xn));
            let reversed = self.expect(&self.expect(&x, j)?, k)?;
            r.tower = r.tower.max(reversed.dist(&direct) / (1.0 + xn));

            r.idempotence = r
                .idempotence
                .max(self.expect(&ex, k)?.dist(&ex) / (1.0 + xn));

            // E_k of a hermitian input, computed without re-flagging
            let raw = if x.is_diagonal() {
                ex.clone()
            } else {
                let m = x.matrix();
                Operator::new(match self.kind {
                    ModelKind::Tensor => self.partial_trace(&m, k),
                    _ => self.pinch_average(&m, k),
                })?
            };
            r.self_adjoint = r.self_adjoint.max(raw.hermitian_residual() / (1.0 + xn));

            let y = self.random_positive_element(self.n, &mut rng)?;
            let ey = self.expect(&y, k)?;
            r.positivity = r
                .positivity
                .max((-ey.min_eigenvalue()?).max(0.0) / (1.0 + y.norm_inf()));

            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let before = x.lp_norm(p)?;
                let after = ex.lp_norm(p)?;
                r.contraction = r.contraction.max((after - before).max(0.0) / (1.0 + before));
            }

            let jensen = self.expect(&x.square(), k)?.minus(&ex.square());
            r.jensen = r
                .jensen
                .max((-jensen.min_eigenvalue()?).max(0.0) / (1.0 + xn * xn));
        }
        r.worst = [
            r.unit,
            r.module,
            r.trace,
            r.tower,
            r.idempotence,
            r.self_adjoint,
            r.positivity,
            r.contraction,
            r.jensen,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        r.passes = r.worst <= CE_TOL;
        Ok(r)
    }
}

/// Worst relative residuals of the conditional-expectation axioms.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CeReport {
    pub samples: usize,
    /// `E_k(1) = 1`
    pub unit: f64,
    /// `E_k(a x b) = a E_k(x) b` for `a, b ∈ N_k`
    pub module: f64,
    /// `tau ∘ E_k = tau`
    pub trace: f64,
    /// `E_j E_k = E_{min(j,k)}`
    pub tower: f64,
    pub idempotence: f64,
    pub self_adjoint: f64,
    /// negative part of the spectrum of `E_k(y)`, `y ⪰ 0`
    pub positivity: f64,
    /// excess of `||E_k x||_p` over `||x||_p`, `p ∈ {1, 2, 4, inf}`
    pub contraction: f64,
    /// negative part of `E_k(x^2) - E_k(x)^2`
    pub jensen: f64,
    pub worst: f64,
    pub passes: bool,
}
