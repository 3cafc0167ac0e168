//! Constructive column tail probabilities.
//!
//! `Prob_c(sup_i ||x_i|| > t)` is the least trace deficit of a projection `e`
//! with `||x_i e|| <= t` for all `i`. Given a dominator `|b|` with
//! `x_i^* x_i ⪯ |b|^2`, the cutoff `e = 1_{(-inf, t]}(|b|)` is such a
//! projection, since `||x_i e||^2 = ||e x_i^* x_i e|| <= ||e |b|^2 e|| <= t^2`.
//! Its deficit is therefore an upper bound for `Prob_c`.

use serde::Serialize;

use super::column::{dominator_violation, ColumnNormBounds, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::operator::{Interval, Operator, Projection};

#[derive(Clone, Debug, Serialize)]
pub struct ProbcResult {
    pub t: f64,
    /// `tau(1 - e)`
    pub s: f64,
    pub e: Projection,
    /// `max_i ||x_i e||`
    pub max_xe: f64,
}

/// `||x e||` without densifying when both are diagonal.
fn norm_after(x: &Operator, e: &Projection) -> f64 {
    x.product(e.operator()).norm_inf()
}

/// Deficit of the dominator cutoff at `t`, after checking feasibility.
pub fn probc_upper(xs: &[Operator], t: f64, dominator: &Operator) -> Result<ProbcResult> {
    if !(t > 0.0) {
        return Err(Error::param("t", format!("{t} <= 0")));
    }
    if xs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let violation = dominator_violation(xs, dominator)?;
    if violation > FEASIBILITY_TOL {
        return Err(Error::InfeasibleDominator(violation));
    }
    let e = dominator.spectral_projection(Interval::at_most(t))?;
    let max_xe = xs.iter().map(|x| norm_after(x, &e)).fold(0.0, f64::max);
    Ok(ProbcResult {
        t,
        s: e.deficit(),
        e,
        max_xe,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChebyshevCheck {
    pub t: f64,
    pub p: f64,
    pub probc_s: f64,
    /// `t^{-p} ||certificate||_p^p`
    pub cheb_rhs: f64,
    /// Holds with no tolerance at all.
    pub exact: bool,
    pub holds: bool,
}

/// `Prob_c <= t^{-p} ||x||_{L_p(l_inf^c)}^p`, evaluated on the certificate of
/// `bounds`: both sides come from the same dominator, so this reduces to
/// `tau(1_(t,inf)(|b|)) <= t^{-p} tau(|b|^p)`.
pub fn chebyshev_bound(xs: &[Operator], t: f64, p: f64, bounds: &ColumnNormBounds) -> Result<ChebyshevCheck> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("{p} outside [1, inf)")));
    }
    let probc = probc_upper(xs, t, &bounds.certificate)?;
    let upper = if p == bounds.p {
        bounds.upper
    } else {
        bounds.certificate.lp_norm(p)?
    };
    let cheb_rhs = (upper / t).powf(p);
    Ok(ChebyshevCheck {
        t,
        p,
        probc_s: probc.s,
        cheb_rhs,
        exact: probc.s <= cheb_rhs,
        holds: probc.s <= cheb_rhs + FEASIBILITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tail::column_maximal_norm_bounds;
    use crate::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cutoff_example() {
        let x = Operator::diagonal(vec![3.0, 1.0]);
        let r = probc_upper(std::slice::from_ref(&x), 2.0, &x).unwrap();
        assert_eq!(r.s, 0.5);
        assert_eq!(r.e.operator(), &Operator::diagonal(vec![0.0, 1.0]));
        assert_eq!(r.max_xe, 1.0);
        let all = probc_upper(std::slice::from_ref(&x), 3.0, &x).unwrap();
        assert_eq!(all.s, 0.0);
        assert!(matches!(
            probc_upper(&[x], 2.0, &Operator::diagonal(vec![1.0, 1.0])),
            Err(Error::InfeasibleDominator(_))
        ));
    }

    #[test]
    fn chebyshev_example() {
        let x = Operator::diagonal(vec![3.0, 1.0]);
        let b = column_maximal_norm_bounds(std::slice::from_ref(&x), 4.0).unwrap();
        let c = chebyshev_bound(std::slice::from_ref(&x), 2.0, 4.0, &b).unwrap();
        assert_eq!(c.probc_s, 0.5);
        assert!((c.cheb_rhs - 2.5625).abs() < 1e-12);
        assert!(c.holds);
        let far = chebyshev_bound(&[x], 1e6, 4.0, &b).unwrap();
        assert_eq!(far.probc_s, 0.0);
        assert!(far.cheb_rhs < 1e-20);
    }

    #[test]
    fn diagonal_family_gives_empirical_probability() {
        let xs = vec![
            Operator::diagonal(vec![0.5, -2.5, 1.0, 0.0]),
            Operator::diagonal(vec![1.5, 0.5, -0.2, 3.0]),
        ];
        let b = column_maximal_norm_bounds(&xs, 4.0).unwrap();
        for t in [0.1, 0.7, 1.2, 2.0, 2.9, 3.5] {
            let r = probc_upper(&xs, t, &b.certificate).unwrap();
            let brute = (0..4)
                .filter(|&i| xs.iter().any(|x| x.diagonal_values().unwrap()[i].abs() > t))
                .count() as f64
                / 4.0;
            assert_eq!(r.s, brute, "t={t}");
        }
    }

    #[test]
    fn monotone_in_t_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xs: Vec<Operator> = (0..3).map(|_| random_hermitian(10, &mut rng)).collect();
        let b = column_maximal_norm_bounds(&xs, 4.0).unwrap();
        let grid: Vec<f64> = (1..=20).map(|i| 0.15 * i as f64).collect();
        let s: Vec<f64> = grid
            .iter()
            .map(|t| probc_upper(&xs, *t, &b.certificate).unwrap().s)
            .collect();
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
        for t in &grid {
            let r = probc_upper(&xs, *t, &b.certificate).unwrap();
            assert!(r.max_xe <= t + 1e-8);
            assert!(chebyshev_bound(&xs, *t, 4.0, &b).unwrap().exact);
        }
        // scaling by c > 1: the scaled certificate c|b| dominates the scaled
        // family, its bound scales by c^p and its deficit cannot drop
        let scaled: Vec<Operator> = xs.iter().map(|x| x.scale(1.5)).collect();
        let mut bs = b.clone();
        bs.certificate = b.certificate.scale(1.5);
        bs.upper = bs.certificate.lp_norm(4.0).unwrap();
        for t in &grid {
            let c0 = chebyshev_bound(&xs, *t, 4.0, &b).unwrap();
            let c1 = chebyshev_bound(&scaled, *t, 4.0, &bs).unwrap();
            assert!((c1.cheb_rhs / c0.cheb_rhs - 1.5f64.powi(4)).abs() < 1e-9);
            assert!(c1.probc_s >= c0.probc_s);
        }
    }
}
