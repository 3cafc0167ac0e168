//! Spectral decomposition and functional calculus for self-adjoint operators.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{CMatrix, Operator, Projection, Repr};
use crate::error::{Error, Result};

/// Eigenvalues within this distance of an interval endpoint are snapped to it.
pub const ENDPOINT_SNAP: f64 = 1e-12;

/// Left-open, right-closed interval `(lo, hi]`; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// `(-inf, inf]`
    pub fn all() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `(s, inf]`
    pub fn above(s: f64) -> Self {
        Interval::new(s, f64::INFINITY)
    }

    /// `(-inf, t]`
    pub fn at_most(t: f64) -> Self {
        Interval::new(f64::NEG_INFINITY, t)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above_lo = self.lo == f64::NEG_INFINITY || v - self.lo > ENDPOINT_SNAP;
        let below_hi = self.hi == f64::INFINITY || v - self.hi <= ENDPOINT_SNAP;
        above_lo && below_hi
    }
}

#[derive(Clone, Debug)]
enum Basis {
    Unitary(CMatrix),
    /// Eigenvalue `i` lives on coordinate `perm[i]`.
    Permutation(Vec<usize>),
}

/// `x = U diag(eigenvalues) U*` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: Basis,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvectors(&self) -> CMatrix {
        match &self.basis {
            Basis::Unitary(u) => u.clone(),
            Basis::Permutation(perm) => {
                let n = perm.len();
                let mut u = CMatrix::zeros(n, n);
                for (i, &p) in perm.iter().enumerate() {
                    u[(p, i)] = Complex64::new(1.0, 0.0);
                }
                u
            }
        }
    }

    /// `U f(Λ) U*` from already-evaluated eigenvalue images.
    fn assemble(&self, values: &[f64]) -> Operator {
        match &self.basis {
            Basis::Permutation(perm) => {
                let mut out = vec![0.0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    out[p] = values[i];
                }
                Operator::diagonal(out)
            }
            Basis::Unitary(u) => {
                let mut scaled = u.clone();
                for (j, v) in values.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(*v);
                }
                let mut m = scaled * u.adjoint();
                super::symmetrize(&mut m);
                Operator {
                    repr: Repr::Dense(m),
                    hermitian: true,
                }
            }
        }
    }

    /// Functional calculus `f(x)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Operator> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&ev| {
                let y = f(ev);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Domain(ev))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.assemble(&values))
    }

    pub fn reconstruct(&self) -> Operator {
        self.assemble(&self.eigenvalues)
    }

    /// Spectral projection `1_A(x)`.
    pub fn projection(&self, interval: Interval) -> Projection {
        let values: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&ev| if interval.contains(ev) { 1.0 } else { 0.0 })
            .collect();
        Projection::from_trusted(self.assemble(&values))
    }

    /// Number of eigenvalues in `interval`.
    pub fn count_in(&self, interval: Interval) -> usize {
        self.eigenvalues
            .iter()
            .filter(|ev| interval.contains(**ev))
            .count()
    }
}

fn sorted_decomposition(values: Vec<f64>, vectors: Option<CMatrix>) -> SpectralDecomposition {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let basis = match vectors {
        Some(u) => Basis::Unitary(u.select_columns(order.iter())),
        None => Basis::Permutation(order),
    };
    SpectralDecomposition { eigenvalues, basis }
}

/// Scalar `c` when `m` is `c 1` exactly.
fn scalar_multiple(m: &CMatrix) -> Option<f64> {
    let c = m[(0, 0)];
    if c.im != 0.0 {
        return None;
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let expected = if i == j { c } else { Complex64::new(0.0, 0.0) };
            if m[(i, j)] != expected {
                return None;
            }
        }
    }
    Some(c.re)
}

impl Operator {
    fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                residual: self.hermitian_residual(),
            })
        }
    }

    /// Eigendecomposition of a hermitian operator.
    pub fn eigh(&self) -> Result<SpectralDecomposition> {
        self.require_hermitian()?;
        Ok(match &self.repr {
            Repr::Diagonal(v) => sorted_decomposition(v.clone(), None),
            Repr::Dense(m) => {
                let mut h = m.clone();
                super::symmetrize(&mut h);
                let eig = SymmetricEigen::new(h);
                sorted_decomposition(eig.eigenvalues.iter().copied().collect(), Some(eig.eigenvectors))
            }
        })
    }

    /// Ascending eigenvalues of a hermitian operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        Ok(match &self.repr {
            Repr::Diagonal(v) => {
                let mut v = v.clone();
                v.sort_by(f64::total_cmp);
                v
            }
            Repr::Dense(m) => {
                let mut h = m.clone();
                super::symmetrize(&mut h);
                let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            }
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("dim >= 1"))
    }

    /// `f(x)` by functional calculus; exact on scalar multiples of the identity.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Result<Operator> {
        self.require_hermitian()?;
        if let Repr::Dense(m) = &self.repr {
            if let Some(c) = scalar_multiple(m) {
                let y = f(c);
                if !y.is_finite() {
                    return Err(Error::Domain(c));
                }
                return Ok(Operator::scalar(self.dim(), y));
            }
        }
        self.eigh()?.map(f)
    }

    /// Spectral projection of `x` on `interval`.
    pub fn spectral_projection(&self, interval: Interval) -> Result<Projection> {
        Ok(self.eigh()?.projection(interval))
    }

    /// `|x| = (x* x)^{1/2}`.
    pub fn abs(&self) -> Operator {
        if self.hermitian {
            self.apply_function(f64::abs).expect("abs is total")
        } else {
            self.gram()
                .apply_function(|v| v.max(0.0).sqrt())
                .expect("sqrt of clamped value is total")
        }
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = match &self.repr {
            Repr::Diagonal(v) => v.iter().map(|x| x.abs()).collect(),
            Repr::Dense(m) if self.hermitian => {
                let mut h = m.clone();
                super::symmetrize(&mut h);
                h.symmetric_eigenvalues().iter().map(|x| x.abs()).collect()
            }
            Repr::Dense(m) => m.singular_values().iter().copied().collect(),
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Noncommutative `L_p` norm `tau(|x|^p)^{1/p}`; `p = f64::INFINITY` gives
    /// the operator norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(lp_from_singular(&self.singular_values(), p))
    }
}

/// `L_p` norm from singular values under the normalized trace.
pub(crate) fn lp_from_singular(s: &[f64], p: f64) -> f64 {
    let top = s.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let mean = s.iter().map(|x| (x.abs() / top).powf(p)).sum::<f64>() / s.len() as f64;
    top * mean.powf(1.0 / p)
}
