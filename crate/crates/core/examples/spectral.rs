//! λ₁ and ν_s certification: constant potentials against the closed form,
//! the Gaussian sweep in L and the shifted-ball march for the class example.

use fhnvs::coefficients::{example_sigma, gaussian_sigma, poincare_mu};
use fhnvs::spectral::{lambda1, nu_s, shifted_ball_diagnostic, DomainMask, NuOptions};
use fhnvs::{Grid, ScalarField};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(3, 5.0, 15)?;
    let full = DomainMask::full(&g);
    let l1 = lambda1(&ScalarField::constant(&g, 2.0), &full)?;
    let exact = 2.0 + 3.0 * (std::f64::consts::PI / 10.0).powi(2);
    println!("λ₁(σ ≡ 2) = {l1:.8}, continuum {exact:.8}");

    let h = 0.5;
    for l in [4.0, 6.0, 8.0, 12.0] {
        let n = (2.0 * l / h) as usize - 1;
        let g = Grid::new(3, l, n)?;
        let v = lambda1(&gaussian_sigma(&g), &DomainMask::full(&g))?;
        println!(
            "Gaussian, L = {l:4}, n = {n:2}: λ₁ = {v:.6}  (box floor {:.6})",
            3.0 * (std::f64::consts::PI / (2.0 * l)).powi(2)
        );
    }

    let g2 = Grid::new(2, 6.0, 31)?;
    let sigma = example_sigma(&g2, 1.5, 0.5, poincare_mu(&g2, 1.5)?)?;
    let ball = DomainMask::ball(&g2, &[0.0, 0.0], 2.0);
    let two = nu_s(&sigma, &ball, 2.0, NuOptions::default())?;
    println!(
        "ν_2 on B_2(0) = {:.8}, λ₁ on the same ball = {:.8}",
        two.value,
        lambda1(&sigma, &ball)?
    );
    let four = nu_s(&sigma, &ball, 4.0, NuOptions::default())?;
    println!(
        "ν_4 on B_2(0) = {:.8} (restarts {:?})",
        four.value, four.restart_values
    );

    let centres: Vec<Vec<f64>> = (0..6).map(|k| vec![0.9 * k as f64, 0.0]).collect();
    let rep = shifted_ball_diagnostic(
        &sigma,
        1.5,
        &centres,
        &[1.0, 2.0, 3.0],
        2.0,
        NuOptions::default(),
    )?;
    for e in &rep.nu_values {
        println!("  centre {:?}: ν_2 = {:?}", e.centre, e.nu);
    }
    println!(
        "march non-decreasing: {}, exterior ladder non-decreasing: {}",
        rep.nu_trend_increasing, rep.exterior_trend_increasing
    );
    Ok(())
}
