//! Random matrix ensembles used by the generators and the test suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{CMatrix, Operator};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with `E|z_ij|^2 = 1`.
pub fn gaussian_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(dim, dim, |_, _| Complex64::new(normal(rng) * s, normal(rng) * s))
}

/// `(G + G*) / 2` for a Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = gaussian_matrix(dim, rng);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    Operator::hermitian(h).expect("symmetrized matrix is hermitian")
}

/// `G G* / dim`, positive semidefinite.
pub fn random_positive<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = gaussian_matrix(dim, rng);
    let p = &g * g.adjoint() * Complex64::new(1.0 / dim as f64, 0.0);
    Operator::hermitian(p).expect("gram matrix is hermitian")
}

/// Random hermitian with zero trace, scaled to operator norm `norm`.
/// In dimension one the only traceless element is zero.
pub fn random_traceless<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> Operator {
    let h = random_hermitian(dim, rng);
    let centered = h.shift(-h.tau());
    let n = centered.norm_inf();
    if n == 0.0 {
        Operator::zeros(dim).to_dense()
    } else {
        centered.scale(norm / n)
    }
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// `U diag(±1) U*` with Haar `U` and independent fair signs.
pub fn random_symmetry<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let u = haar_unitary(dim, rng);
    let signs = Operator::diagonal(
        (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
    );
    signs
        .to_dense()
        .conjugate_by(&Operator::new(u).expect("square"))
}
