//! Constructive column tail probabilities: dominator cutoffs and the
//! Chebyshev bound they satisfy by construction.

use nclil::filtration::AlgebraModel;
use nclil::martingale::{gen_martingale, BoundSequence, Coupling, GeneratorSpec};
use nclil::tail::{chebyshev_bound, column_maximal_norm_bounds, probc_upper};

fn main() -> nclil::Result<()> {
    let model = AlgebraModel::tensor(2, 5)?;
    let path = gen_martingale(model, &GeneratorSpec::new(BoundSequence::Constant(1.0), Coupling::Haar), 9)?;
    let family = &path.partials()[1..=path.horizon()];
    let bounds = column_maximal_norm_bounds(family, 4.0)?;
    let top = bounds.certificate.norm_inf();
    println!("   t      Prob_c <=   (upper/t)^4   max ||x_i e||");
    for j in 1..=10 {
        let t = top * j as f64 / 10.0;
        let pc = probc_upper(family, t, &bounds.certificate)?;
        let cb = chebyshev_bound(family, t, 4.0, &bounds)?;
        println!("{t:7.4}  {:9.5}  {:12.5}  {:10.5}", pc.s, cb.cheb_rhs, pc.max_xe);
    }
    Ok(())
}
