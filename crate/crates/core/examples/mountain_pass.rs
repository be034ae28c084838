//! Mountain-pass solution of the reduced problem with constant coefficients
//! `a = 1, b = 3, β = 1` and `f(u) = u³`.
//!
//! ```text
//! cargo run --release --example mountain_pass -- [dim] [L] [n]
//! ```

use std::time::Instant;

use fhnvs::coefficients::constant_coeffs;
use fhnvs::nonlinearity::power_nonlinearity;
use fhnvs::solvers::mountain_pass;
use fhnvs::{EnergyProblem, Grid, Metric, ReducedOperator, SolverConfig};

fn main() -> fhnvs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dim = args.first().and_then(|s| s.parse().ok()).unwrap_or(1);
    let l = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let n = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(127);

    let grid = Grid::new(dim, l, n)?;
    let op = ReducedOperator::new(constant_coeffs(&grid, 1.0, 3.0, 1.0)?)?;
    let prob = EnergyProblem::new(op, power_nonlinearity(3.0, dim)?, Metric::Ab)?;

    let start = Instant::now();
    let rep = mountain_pass(&prob, &SolverConfig::default())?;
    println!("grid            dim={dim} L={l} n={n}");
    println!("converged       {}", rep.converged);
    println!("J(u*)           {:.10e}", rep.energy);
    println!(
        "initial max     {:.10e}",
        rep.initial_path_max.unwrap_or(f64::NAN)
    );
    println!("|grad|          {:.3e}", rep.grad_norm);
    println!("|u*|_ab         {:.6e}", rep.norm_ab);
    println!(
        "residuals       {:.3e} {:.3e}",
        rep.residual_1, rep.residual_2
    );
    println!(
        "sign            {:?} (v: {:?})",
        rep.sign_class, rep.sign_class_v
    );
    println!("sweeps          {}", rep.trace.len());
    if let Some(nw) = &rep.newton {
        println!(
            "newton          {} its, {:.3e} -> {:.3e}",
            nw.iterations, nw.initial_residual, nw.final_residual
        );
    }
    for w in &rep.warnings {
        println!("warning         {w}");
    }
    println!("elapsed         {:.2?}", start.elapsed());
    Ok(())
}
