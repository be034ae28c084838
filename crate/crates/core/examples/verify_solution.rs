//! Solve, write `u.csv`/`v.csv`, read them back and certify the pair
//! against the original two-field system.

use fhnvs::coefficients::constant_coeffs;
use fhnvs::io::{load_field, save_field};
use fhnvs::nonlinearity::power_nonlinearity;
use fhnvs::solvers::mountain_pass;
use fhnvs::verify::verify_pair;
use fhnvs::{EnergyProblem, Grid, Metric, ReducedOperator, SolverConfig};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(1, 5.0, 127)?;
    let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0)?)?;
    let prob = EnergyProblem::new(op, power_nonlinearity(3.0, 1)?, Metric::Ab)?;
    let rep = mountain_pass(&prob, &SolverConfig::default())?;

    let dir = std::env::temp_dir().join("fhnvs_verify_example");
    std::fs::create_dir_all(&dir)?;
    save_field(&rep.u, dir.join("u.csv"))?;
    save_field(&rep.v, dir.join("v.csv"))?;
    let u = load_field(&g, dir.join("u.csv"))?;
    let v = load_field(&g, dir.join("v.csv"))?;

    let check = verify_pair(&prob, &u, &v, 1e-10, Some(&rep.trace))?;
    println!("written to {}", dir.display());
    println!(
        "residuals {:.3e} {:.3e}",
        check.residual_1, check.residual_2
    );
    println!(
        "signs u: {:?}, v: {:?}",
        check.sign_class_u, check.sign_class_v
    );
    println!(
        "J = {:.10e}, |grad| = {:.2e}",
        check.energy, check.grad_norm
    );
    if let Some(ps) = &check.ps {
        println!(
            "PS proxy: {} iterates, max ‖u‖ {:.4}, bounded {}",
            ps.entries, ps.max_norm, ps.bounded
        );
    }
    Ok(())
}
