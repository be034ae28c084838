//! Exponent calculus and sampled hypothesis checks for the built-in
//! nonlinearities.

use fhnvs::nonlinearity::{
    alpha_for_p, exponent_set_contains, linear_nonlinearity, power_nonlinearity,
    shifted_power_nonlinearity, validate_hypotheses,
};
use fhnvs::Grid;

fn main() -> fhnvs::Result<()> {
    for p in [1.5, 11.0 / 3.0, 4.0, 13.0 / 3.0, 4.9] {
        let a = alpha_for_p(3, p)?;
        println!(
            "N = 3, p = {p:.4}: α = {a:.6}, p ∈ P_α,3: {}",
            exponent_set_contains(a, 3, p)?
        );
    }
    println!(
        "p = 5 in dimension 3: {}",
        power_nonlinearity(5.0, 3).unwrap_err()
    );

    let g = Grid::new(1, 5.0, 31)?;
    for spec in [
        power_nonlinearity(3.0, 3)?,
        linear_nonlinearity(3.0)?,
        shifted_power_nonlinearity(3.0)?,
    ] {
        let rep = validate_hypotheses(&spec, &g, 500, 1);
        println!("{}: all passed = {}", rep.nonlinearity, rep.all_passed());
        for c in rep.checks.iter().filter(|c| !c.passed) {
            println!("  {} fails, witness {:?}", c.name, c.witness);
        }
    }
    Ok(())
}
