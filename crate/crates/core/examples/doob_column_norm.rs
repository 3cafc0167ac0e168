//! Column maximal norm bounds and the Doob-type consequence for p >= 4,
//! plus the dual inequality for p in [1, 2].

use nclil::filtration::AlgebraModel;
use nclil::martingale::{gen_martingale, BoundSequence, Coupling, GeneratorSpec};
use nclil::rng;
use nclil::tail::{column_maximal_norm_bounds, doob_consequence_check, dual_doob_check};

fn main() -> nclil::Result<()> {
    let model = AlgebraModel::tensor(2, 6)?;
    let path = gen_martingale(model, &GeneratorSpec::new(BoundSequence::Constant(1.0), Coupling::Haar), 5)?;
    let n = path.horizon();
    let bounds = column_maximal_norm_bounds(&path.partials()[1..=n], 4.0)?;
    println!(
        "||(x_i)||_L4(l_inf^c) in [{:.5}, {:.5}] after {} iterations",
        bounds.lower, bounds.upper, bounds.iterations
    );
    for p in [4.0, 6.0, 8.0] {
        let c = doob_consequence_check(&path, 1, n, p)?;
        println!(
            "p={p}: upper {:.5} <= 2^(2/p)||x_n||_p = {:.5}?  constant {:.4}  {:?}",
            c.upper, c.rhs, c.constant, c.status
        );
    }
    let mut r = rng::stream(5, 0, "example");
    let terms = (0..=model.depth())
        .map(|k| Ok((k, model.random_positive_element(model.depth(), &mut r)?)))
        .collect::<nclil::Result<Vec<_>>>()?;
    for p in [1.0, 1.5, 2.0] {
        let d = dual_doob_check(&model, &terms, p)?;
        println!("dual p={p}: {:.5} <= {:.5}  ({})", d.lhs, d.rhs, d.holds);
    }
    Ok(())
}
