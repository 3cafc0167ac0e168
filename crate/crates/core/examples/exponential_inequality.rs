//! Both sides of the exponential moment inequality on a λ grid.

use nclil::filtration::AlgebraModel;
use nclil::martingale::{gen_martingale, BoundSequence, Coupling, GeneratorSpec};
use nclil::tail::{exp_moment_sides, ExpIneqParams};

fn main() -> nclil::Result<()> {
    let model = AlgebraModel::pinching(2, 5)?;
    let path = gen_martingale(model, &GeneratorSpec::new(BoundSequence::Constant(1.0), Coupling::Haar), 11)?;
    let n = path.horizon();
    for eps in [0.1, 0.5, 1.0] {
        let probe = ExpIneqParams::tight(&path, n, eps, 0.0);
        let max = ExpIneqParams::lambda_max(probe.m, eps);
        println!("eps = {eps}: M = {:.4}, D^2 = {:.4}, lambda_max = {max:.4}", probe.m, probe.d2);
        for j in [1, 5, 10] {
            let lambda = max * j as f64 / 10.0;
            let s = exp_moment_sides(&path, n, &ExpIneqParams { lambda, ..probe })?;
            println!("  lambda={lambda:.4}  log lhs={:.5}  log rhs={:.5}  holds={}", s.log_lhs, s.log_rhs, s.holds);
        }
    }
    Ok(())
}
