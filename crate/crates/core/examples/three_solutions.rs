//! Positive, negative and sign-changing solutions for `a = 1, b = 3, β = 1`
//! (so `e = 1`, `d = 2`) and `f(u) = u³`.
//!
//! ```text
//! cargo run --release --example three_solutions -- [dim] [L] [n]
//! ```

use std::time::Instant;

use fhnvs::coefficients::constant_coeffs;
use fhnvs::nonlinearity::power_nonlinearity;
use fhnvs::solvers::three_solutions;
use fhnvs::{EnergyProblem, Grid, Metric, ReducedOperator, SolutionReport, SolverConfig};

fn show(r: &SolutionReport) {
    println!(
        "{:<3} J = {:.10e}  |grad| = {:.2e}  r = ({:.1e}, {:.1e})  u: {:?} [{:.3e}, {:.3e}]  v: {:?}  converged = {}",
        r.label, r.energy, r.grad_norm, r.residual_1, r.residual_2, r.sign_class, r.min_u, r.max_u, r.sign_class_v, r.converged
    );
    for w in &r.warnings {
        println!("    warning: {w}");
    }
}

fn main() -> fhnvs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dim = args.first().and_then(|s| s.parse().ok()).unwrap_or(1);
    let l = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let n = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(127);

    let grid = Grid::new(dim, l, n)?;
    let op = ReducedOperator::new(constant_coeffs(&grid, 1.0, 3.0, 1.0)?)?;
    let prob = EnergyProblem::new(op, power_nonlinearity(3.0, dim)?, Metric::AbStar)?;

    let start = Instant::now();
    let three = three_solutions(&prob, &SolverConfig::default())?;
    show(&three.positive);
    show(&three.negative);
    match &three.sign_changing {
        Some(r) => show(r),
        None => println!("u3  not found"),
    }
    for a in &three.attempts {
        println!("restart {} angle {:.3}: {}", a.restart, a.angle, a.outcome);
    }
    println!(
        "|J(u1) - J(u2)| = {:.2e}",
        (three.positive.energy - three.negative.energy).abs()
    );
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
