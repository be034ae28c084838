//! Energy in both metrics, gradient against central differences and the
//! sampled growth and cone conditions.

use fhnvs::coefficients::constant_coeffs;
use fhnvs::energy::weth_checks;
use fhnvs::nonlinearity::power_nonlinearity;
use fhnvs::random::{rng, smooth_field};
use fhnvs::{EnergyProblem, Grid, Metric, ReducedOperator};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(2, 4.0, 15)?;
    let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0)?)?;
    let spec = power_nonlinearity(3.0, 2)?;
    let mut r = rng(11);
    let u = smooth_field(&g, &mut r, 3);
    let h = smooth_field(&g, &mut r, 3);

    for metric in [Metric::Ab, Metric::AbStar] {
        let prob = EnergyProblem::new(op.clone(), spec.clone(), metric)?;
        let grad = prob.gradient(&u)?;
        let exact = prob.inner(&grad, &h)?;
        println!(
            "{metric:?}: J(u) = {:.12e}, ⟨grad, h⟩ = {exact:.12e}",
            prob.energy(&u)?
        );
        let mut prev = None;
        for k in 1..=4 {
            let d = 10f64.powi(-k);
            let fd = (prob.energy(&u.add(&h.scale(d))?)? - prob.energy(&u.sub(&h.scale(d))?)?)
                / (2.0 * d);
            let err = (fd - exact).abs();
            let order = prev.map(|p: f64| (p / err).log10());
            println!("  δ = {d:.0e}: error {err:.3e}  observed order {order:?}");
            prev = Some(err);
        }
    }

    let prob = EnergyProblem::new(op, spec, Metric::AbStar)?;
    let w = weth_checks(&prob, 30, 5)?;
    println!(
        "growth (literal) {} | η = {:.3}, C* = {:.3e} fitted {} | q = {:.4}, C = {:.4} | cone conditions {} {}",
        w.a2_1_literal.passed, w.eta, w.c_star, w.a2_1_fitted.passed, w.q, w.c_growth, w.a3.passed, w.a4.passed
    );
    Ok(())
}
