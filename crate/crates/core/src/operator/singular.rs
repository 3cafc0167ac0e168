//! Generalized singular numbers `mu_t(x) = inf{s > 0 : tau(1_(s,inf](|x|)) <= t}`.

use super::spectral::Interval;
use super::Operator;
use crate::error::{Error, Result};

/// Largest `j` with `j / dim <= t`, using the same division as the trace of
/// a spectral projection.
fn allowed_count(t: f64, dim: usize) -> usize {
    let d = dim as f64;
    let mut j = ((t * d).floor().max(0.0) as usize).min(dim);
    while j < dim && ((j + 1) as f64) / d <= t {
        j += 1;
    }
    while j > 0 && (j as f64) / d > t {
        j -= 1;
    }
    j
}

/// `mu_t` from singular values sorted descending.
pub(crate) fn singular_number_sorted(desc: &[f64], t: f64) -> f64 {
    let j = allowed_count(t, desc.len());
    // the (j+1)-th largest value; ties collapse because counts use the
    // same snapped interval as spectral projections
    let candidate = if j < desc.len() { desc[j] } else { 0.0 };
    debug_assert!(
        candidate == 0.0
            || desc.iter().filter(|s| Interval::above(candidate).contains(**s)).count() <= j
    );
    candidate.max(0.0)
}

impl Operator {
    /// Generalized singular number `mu_t(x)` for `t` in `(0, 1)`.
    pub fn singular_number(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidQuantile(t));
        }
        Ok(singular_number_sorted(&self.singular_values(), t))
    }
}

/// Outcome of [`check_uniform_dist_bound`].
#[derive(Clone, Debug, PartialEq)]
pub struct UniformBoundCheck {
    pub holds: bool,
    /// `max_t [sup_i mu_t(x_i) - K mu_{t/K}(y)]` over the grid.
    pub worst_gap: f64,
    pub worst_t: f64,
}

/// Checks `sup_i mu_t(x_i) <= K mu_{t/K}(y)` on a grid of `t` values.
pub fn check_uniform_dist_bound(
    xs: &[Operator],
    y: &Operator,
    k: f64,
    grid: &[f64],
) -> Result<UniformBoundCheck> {
    if xs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if !(k >= 1.0) {
        return Err(Error::param("K", format!("{k} < 1")));
    }
    if grid.is_empty() {
        return Err(Error::param("grid", "empty"));
    }
    if let Some(bad) = grid.iter().find(|t| !(**t > 0.0 && **t < 1.0 / k)) {
        return Err(Error::param("grid", format!("t = {bad} outside (0, 1/K)")));
    }
    let sv: Vec<Vec<f64>> = xs.iter().map(Operator::singular_values).collect();
    let sy = y.singular_values();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_t = grid[0];
    for &t in grid {
        let sup = sv
            .iter()
            .map(|s| singular_number_sorted(s, t))
            .fold(0.0, f64::max);
        let gap = sup - k * singular_number_sorted(&sy, t / k);
        if gap > worst_gap {
            worst_gap = gap;
            worst_t = t;
        }
    }
    Ok(UniformBoundCheck {
        holds: worst_gap <= 0.0,
        worst_gap,
        worst_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force infimum over an s-grid, independent of the closed form.
    fn mu_grid(x: &Operator, t: f64, step: f64) -> f64 {
        let eig = x.abs().eigh().unwrap();
        let d = x.dim() as f64;
        let mut s = 0.0;
        loop {
            if eig.count_in(Interval::above(s)) as f64 / d <= t {
                return s;
            }
            s += step;
        }
    }

    #[test]
    fn singular_number_examples() {
        let c = Operator::scalar(5, -2.5);
        for t in [0.1, 0.5, 0.99] {
            assert_eq!(c.singular_number(t).unwrap(), 2.5);
        }
        let x = Operator::diagonal(vec![3.0, 1.0]);
        assert_eq!(x.singular_number(0.25).unwrap(), 3.0);
        assert_eq!(x.singular_number(0.75).unwrap(), 1.0);
        assert_eq!(x.singular_number(0.5).unwrap(), 1.0);
        assert!((mu_grid(&x, 0.75, 1e-4) - 1.0).abs() <= 1e-4);
        assert!(matches!(x.singular_number(0.0), Err(Error::InvalidQuantile(_))));
        assert!(matches!(x.singular_number(1.0), Err(Error::InvalidQuantile(_))));
    }

    #[test]
    fn singular_number_is_nonincreasing_and_right_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_hermitian(10, &mut rng);
        let ts: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        let mu: Vec<f64> = ts.iter().map(|t| x.singular_number(*t).unwrap()).collect();
        assert!(mu.windows(2).all(|w| w[0] >= w[1]));
        // at a jump t = j/dim the value already equals the right limit
        let at = x.singular_number(0.3).unwrap();
        let right = x.singular_number(0.3 + 1e-9).unwrap();
        assert_eq!(at, right);
    }

    #[test]
    fn singular_number_matches_projection_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for dim in [3, 8, 13] {
            let x = Operator::new(gaussian_matrix(dim, &mut rng)).unwrap();
            let abs = x.abs();
            for t in [0.05, 0.2, 0.5, 0.77] {
                let mu = x.singular_number(t).unwrap();
                let e = abs.spectral_projection(Interval::above(mu)).unwrap();
                assert!(e.trace() <= t + 1e-12);
                if mu > 0.0 {
                    let below = abs.spectral_projection(Interval::above(mu - 1e-6)).unwrap();
                    assert!(below.trace() > t);
                }
            }
        }
    }

    #[test]
    fn integrated_singular_numbers_recover_lp_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = Operator::new(gaussian_matrix(9, &mut rng)).unwrap();
        let d = 9;
        for p in [1.0, 2.0, 3.0] {
            // mu_t is constant on [j/d, (j+1)/d); sample the midpoint of each step
            let integral: f64 = (0..d)
                .map(|j| x.singular_number((j as f64 + 0.5) / d as f64).unwrap().powf(p) / d as f64)
                .sum();
            assert!((integral - x.lp_norm(p).unwrap().powf(p)).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_bound_examples() {
        let x = Operator::diagonal(vec![3.0, 1.0]);
        let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let same = check_uniform_dist_bound(std::slice::from_ref(&x), &x, 1.0, &grid).unwrap();
        assert!(same.holds);
        assert_eq!(same.worst_gap, 0.0);

        let ones = Operator::diagonal(vec![1.0, 1.0]);
        let r = check_uniform_dist_bound(std::slice::from_ref(&x), &ones, 1.0, &[0.25]).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst_gap, 2.0);

        let threes = Operator::diagonal(vec![3.0, 3.0]);
        assert!(check_uniform_dist_bound(std::slice::from_ref(&x), &threes, 1.0, &grid).unwrap().holds);

        assert!(matches!(
            check_uniform_dist_bound(&[], &x, 1.0, &grid),
            Err(Error::EmptyFamily)
        ));
        assert!(check_uniform_dist_bound(std::slice::from_ref(&x), &x, 2.0, &[0.75]).is_err());
    }
}
