//! Conditional expectations of the three filtration models and a property
//! run of their axioms.

use nclil::filtration::AlgebraModel;
use nclil::rng;

fn main() -> nclil::Result<()> {
    let models = [
        AlgebraModel::tensor(2, 4)?,
        AlgebraModel::pinching(2, 4)?,
        AlgebraModel::diagonal(10, 3)?,
    ];
    for model in models {
        let mut r = rng::stream(7, 0, "example");
        let x = model.random_element(model.depth(), &mut r)?;
        let e1 = model.expect(&x, 1)?;
        println!(
            "{:?} m={} n={} dim={}: tau(x)={:+.4} tau(E_1 x)={:+.4} E_1 x in N_1: {}",
            model.kind(),
            model.site_dim(),
            model.depth(),
            model.dim(),
            x.tau(),
            e1.tau(),
            model.contains(&e1, 1, 1e-10)?
        );
        let report = model.verify_ce_axioms(20, 1)?;
        println!("  axioms: worst residual {:.2e}, passes {}", report.worst, report.passes);
    }
    Ok(())
}
