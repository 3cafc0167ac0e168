//! GUE increments normalized toward the semicircle law on `[-2, 2]`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, Operator};
use crate::rng::{self, StreamRng};

use num_complex::Complex64;

/// Independent GUE matrices `H / √N` with `H_ii ~ N(0, 1)` and off-diagonal
/// entries `(a + ib)/√2`, so `tau(H^2 / N) → 1` and the spectrum fills
/// `[-2, 2]`.
pub struct GueStream {
    size: usize,
    rng: StreamRng,
}

impl GueStream {
    pub fn new(size: usize, seed: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::param("size", format!("GUE size {size} < 2")));
        }
        Ok(GueStream {
            size,
            rng: rng::stream(seed, 0, "gue"),
        })
    }

    /// Next increment as a raw hermitian matrix.
    pub fn next_matrix(&mut self) -> CMatrix {
        let n = self.size;
        let scale = 1.0 / (n as f64).sqrt();
        let off = std::f64::consts::FRAC_1_SQRT_2 * scale;
        let mut h = CMatrix::zeros(n, n);
        for j in 0..n {
            let d: f64 = self.rng.sample(StandardNormal);
            h[(j, j)] = Complex64::new(d * scale, 0.0);
            for i in 0..j {
                let a: f64 = self.rng.sample(StandardNormal);
                let b: f64 = self.rng.sample(StandardNormal);
                let z = Complex64::new(a * off, b * off);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }
}

impl Iterator for GueStream {
    type Item = Operator;

    fn next(&mut self) -> Option<Operator> {
        Some(Operator::hermitian(self.next_matrix()).expect("constructed hermitian"))
    }
}

/// `steps` independent normalized GUE increments of side `size`.
pub fn gen_gue_increments(size: usize, steps: usize, seed: u64) -> Result<Vec<Operator>> {
    Ok(GueStream::new(size, seed)?.take(steps).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint quadrature of `x^2 (2π)^{-1} √(4 - x^2)` on `[-2, 2]`.
    fn semicircle_second_moment() -> f64 {
        let steps = 200_000;
        let h = 4.0 / steps as f64;
        (0..steps)
            .map(|i| {
                let x = -2.0 + (i as f64 + 0.5) * h;
                x * x * (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI) * h
            })
            .sum()
    }

    #[test]
    fn moments_match_semicircle() {
        let target = semicircle_second_moment();
        assert!((target - 1.0).abs() < 1e-6);
        let n = 150;
        let tol = 3.0 / (n as f64).sqrt();
        for g in gen_gue_increments(n, 3, 11).unwrap() {
            assert!(g.tau().abs() < tol);
            assert!((g.square().tau() - target).abs() < tol);
            let edge = g.norm_inf();
            assert!(edge > 1.6 && edge < 2.4, "{edge}");
        }
    }

    #[test]
    fn size_guard() {
        assert!(gen_gue_increments(1, 1, 0).is_err());
    }
}
