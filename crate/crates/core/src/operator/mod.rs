//! Operators on a finite-dimensional tracial algebra.
//!
//! An [`Operator`] is either a dense complex matrix or a real diagonal
//! (multiplication operator). The diagonal form is the fast path used by the
//! classical sample-space model, where an operator is a function on sample
//! points and the trace is the sample average.

mod singular;
mod spectral;

use std::borrow::Cow;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use singular::{check_uniform_dist_bound, UniformBoundCheck};
pub use spectral::{Interval, SpectralDecomposition};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for the hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues of a projection must lie this close to 0 or 1.
pub const PROJECTION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Repr {
    Dense(CMatrix),
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct Operator {
    repr: Repr,
    hermitian: bool,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
    }
}

impl Operator {
    /// General (not necessarily self-adjoint) operator.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(Operator {
            repr: Repr::Dense(m),
            hermitian: false,
        })
    }

    /// Self-adjoint operator. The input is checked against [`HERMITIAN_TOL`]
    /// and then replaced by `(m + m*) / 2`.
    pub fn hermitian(m: CMatrix) -> Result<Self> {
        let mut op = Self::new(m)?;
        op.make_hermitian()?;
        Ok(op)
    }

    /// Dense operator from real row-major entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: rows.len(),
            });
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i * dim + j], 0.0));
        let herm = hermitian_residual(&m) <= HERMITIAN_TOL * (1.0 + max_abs(&m));
        let mut op = Self::new(m)?;
        if herm {
            op.make_hermitian()?;
        }
        Ok(op)
    }

    /// Real multiplication operator with the given diagonal.
    ///
    /// # Panics
    /// If `values` is empty.
    pub fn diagonal(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "operator dimension must be at least 1");
        Operator {
            repr: Repr::Diagonal(values),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::scalar(dim, 0.0)
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        Self::diagonal(vec![c; dim])
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.nrows(),
            Repr::Diagonal(v) => v.len(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    /// Diagonal values when the operator is stored as a multiplication operator.
    pub fn diagonal_values(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(v) => Some(v),
            Repr::Dense(_) => None,
        }
    }

    pub fn matrix(&self) -> Cow<'_, CMatrix> {
        match &self.repr {
            Repr::Dense(m) => Cow::Borrowed(m),
            Repr::Diagonal(v) => Cow::Owned(diag_matrix(v)),
        }
    }

    pub fn into_matrix(self) -> CMatrix {
        match self.repr {
            Repr::Dense(m) => m,
            Repr::Diagonal(v) => diag_matrix(&v),
        }
    }

    /// Same operator in dense storage.
    pub fn to_dense(&self) -> Operator {
        Operator {
            repr: Repr::Dense(self.matrix().into_owned()),
            hermitian: self.hermitian,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Dense(m) => m[(i, j)],
            Repr::Diagonal(v) if i == j => Complex64::new(v[i], 0.0),
            Repr::Diagonal(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => max_abs(m),
            Repr::Diagonal(v) => v.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }

    /// Largest entrywise `|x - x*|`.
    pub fn hermitian_residual(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => hermitian_residual(m),
            Repr::Diagonal(_) => 0.0,
        }
    }

    fn make_hermitian(&mut self) -> Result<()> {
        if let Repr::Dense(m) = &mut self.repr {
            let residual = hermitian_residual(m);
            if residual > HERMITIAN_TOL * (1.0 + max_abs(m)) {
                return Err(Error::NotHermitian { residual });
            }
            symmetrize(m);
        }
        self.hermitian = true;
        Ok(())
    }

    /// Sets the hermitian flag after checking the tolerance.
    pub fn into_hermitian(mut self) -> Result<Self> {
        self.make_hermitian()?;
        Ok(self)
    }

    /// Hermitian part `(x + x*) / 2`, flagged hermitian.
    pub fn hermitian_part(&self) -> Operator {
        match &self.repr {
            Repr::Diagonal(_) => self.clone(),
            Repr::Dense(m) => {
                let mut h = m.clone();
                symmetrize(&mut h);
                Operator {
                    repr: Repr::Dense(h),
                    hermitian: true,
                }
            }
        }
    }

    /// Normalized trace `(1/dim) sum_i x_ii`.
    pub fn trace(&self) -> Complex64 {
        let d = self.dim() as f64;
        match &self.repr {
            Repr::Dense(m) => m.diagonal().iter().sum::<Complex64>() / d,
            Repr::Diagonal(v) => Complex64::new(v.iter().sum::<f64>() / d, 0.0),
        }
    }

    /// Real normalized trace. The imaginary residual is asserted below
    /// `1e-10` relative to the entry scale.
    pub fn tau(&self) -> f64 {
        let t = self.trace();
        debug_assert!(
            t.im.abs() <= 1e-10 * (1.0 + self.max_abs_entry()),
            "trace has imaginary residual {}",
            t.im
        );
        t.re
    }

    pub fn adjoint(&self) -> Operator {
        match &self.repr {
            Repr::Diagonal(_) => self.clone(),
            Repr::Dense(m) => Operator {
                repr: Repr::Dense(m.adjoint()),
                hermitian: self.hermitian,
            },
        }
    }

    pub fn scale(&self, c: f64) -> Operator {
        match &self.repr {
            Repr::Diagonal(v) => Operator::diagonal(v.iter().map(|x| x * c).collect()),
            Repr::Dense(m) => Operator {
                repr: Repr::Dense(m * Complex64::new(c, 0.0)),
                hermitian: self.hermitian,
            },
        }
    }

    fn check_dim(&self, other: &Operator) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(f64, f64) -> f64, fc: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Operator {
        self.check_dim(other);
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                Operator::diagonal(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            }
            _ => Operator {
                repr: Repr::Dense(fc(&self.matrix(), &other.matrix())),
                hermitian: self.hermitian && other.hermitian,
            },
        }
    }

    pub fn plus(&self, other: &Operator) -> Operator {
        self.zip_with(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn minus(&self, other: &Operator) -> Operator {
        self.zip_with(other, |a, b| a - b, |a, b| a - b)
    }

    /// `x + c 1`.
    pub fn shift(&self, c: f64) -> Operator {
        match &self.repr {
            Repr::Diagonal(v) => Operator::diagonal(v.iter().map(|x| x + c).collect()),
            Repr::Dense(m) => {
                let mut m = m.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += c;
                }
                Operator {
                    repr: Repr::Dense(m),
                    hermitian: self.hermitian,
                }
            }
        }
    }

    /// Operator product `x y`.
    pub fn product(&self, other: &Operator) -> Operator {
        self.check_dim(other);
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                Operator::diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            (Repr::Diagonal(a), Repr::Dense(m)) => {
                let mut m = m.clone();
                for (i, s) in a.iter().enumerate() {
                    m.row_mut(i).scale_mut(*s);
                }
                Operator {
                    repr: Repr::Dense(m),
                    hermitian: false,
                }
            }
            (Repr::Dense(m), Repr::Diagonal(b)) => {
                let mut m = m.clone();
                for (j, s) in b.iter().enumerate() {
                    m.column_mut(j).scale_mut(*s);
                }
                Operator {
                    repr: Repr::Dense(m),
                    hermitian: false,
                }
            }
            (Repr::Dense(a), Repr::Dense(b)) => Operator {
                repr: Repr::Dense(a * b),
                hermitian: false,
            },
        }
    }

    /// `x * x`, flagged hermitian.
    pub fn gram(&self) -> Operator {
        match &self.repr {
            Repr::Diagonal(v) => Operator::diagonal(v.iter().map(|x| x * x).collect()),
            Repr::Dense(m) => {
                let mut g = m.adjoint() * m;
                symmetrize(&mut g);
                Operator {
                    repr: Repr::Dense(g),
                    hermitian: true,
                }
            }
        }
    }

    /// `x^2` for hermitian `x`, flagged hermitian; otherwise the plain product.
    pub fn square(&self) -> Operator {
        if self.hermitian {
            self.gram()
        } else {
            self.product(self)
        }
    }

    /// `a x a*`, which is hermitian whenever `x` is.
    pub fn conjugate_by(&self, a: &Operator) -> Operator {
        let mut out = a.product(self).product(&a.adjoint());
        if self.hermitian {
            out = out.hermitian_part();
        }
        out
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        self.product(other).minus(&other.product(self))
    }

    /// Kronecker product `x ⊗ y`.
    pub fn kron(&self, other: &Operator) -> Operator {
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Operator::diagonal(
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x * y))
                    .collect(),
            ),
            _ => Operator {
                repr: Repr::Dense(self.matrix().kronecker(&other.matrix())),
                hermitian: self.hermitian && other.hermitian,
            },
        }
    }

    /// Operator norm (largest singular value).
    pub fn norm_inf(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.minus(other).max_abs_entry()
    }

    /// Operator-norm distance to `other`.
    pub fn dist(&self, other: &Operator) -> f64 {
        self.minus(other).norm_inf()
    }
}

fn diag_matrix(v: &[f64]) -> CMatrix {
    let n = v.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, x) in v.iter().enumerate() {
        m[(i, i)] = Complex64::new(*x, 0.0);
    }
    m
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.plus(rhs)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.minus(rhs)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.product(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// A self-adjoint idempotent `e = e* = e^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Operator", into = "Operator")]
pub struct Projection(Operator);

impl Projection {
    /// Validates that `op` is hermitian with spectrum in `{0, 1}`.
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: op.hermitian_residual(),
            });
        }
        for ev in op.eigh()?.eigenvalues() {
            if ev.abs() > PROJECTION_TOL && (ev - 1.0).abs() > PROJECTION_TOL {
                return Err(Error::NotProjection(*ev));
            }
        }
        Ok(Projection(op))
    }

    pub(crate) fn from_trusted(op: Operator) -> Self {
        Projection(op)
    }

    pub fn identity(dim: usize) -> Self {
        Projection(Operator::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Projection(Operator::zeros(dim))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn rank(&self) -> usize {
        match self.0.diagonal_values() {
            Some(v) => v.iter().filter(|x| **x >= 0.5).count(),
            None => (self.0.tau() * self.dim() as f64).round() as usize,
        }
    }

    /// `tau(e) = rank / dim`, exact rather than a rounded trace.
    pub fn trace(&self) -> f64 {
        self.rank() as f64 / self.dim() as f64
    }

    /// Trace deficit `tau(1 - e)`.
    pub fn deficit(&self) -> f64 {
        (self.dim() - self.rank()) as f64 / self.dim() as f64
    }

    pub fn complement(&self) -> Projection {
        Projection(self.0.scale(-1.0).shift(1.0))
    }
}

impl TryFrom<Operator> for Projection {
    type Error = Error;
    fn try_from(op: Operator) -> Result<Self> {
        Projection::new(op)
    }
}

impl From<Projection> for Operator {
    fn from(p: Projection) -> Operator {
        p.0
    }
}

/// Wire format: `{dim, re, im, hermitian}` with row-major entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub hermitian: bool,
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        let dim = op.dim();
        let hermitian = op.hermitian;
        let m = op.into_matrix();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                // `+ 0.0` folds negative zero
                re.push(m[(i, j)].re + 0.0);
                im.push(m[(i, j)].im + 0.0);
            }
        }
        OperatorJson {
            dim,
            re,
            im,
            hermitian,
        }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self> {
        let n = j.dim * j.dim;
        if j.re.len() != n || j.im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: j.re.len().max(j.im.len()),
            });
        }
        let m = CMatrix::from_fn(j.dim, j.dim, |r, c| {
            Complex64::new(j.re[r * j.dim + c], j.im[r * j.dim + c])
        });
        if j.hermitian {
            Operator::hermitian(m)
        } else {
            Operator::new(m)
        }
    }
}
