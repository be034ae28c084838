//! Coefficient sets: constants, the sign-changing class example, the
//! Gaussian density and a paired set, with the derived `e` and `d`.

use fhnvs::coefficients::{
    constant_coeffs, example_sigma, gaussian_sigma, paired_class_coeffs, poincare_mu,
};
use fhnvs::grid::integrate;
use fhnvs::Grid;

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(2, 6.0, 31)?;
    for (a, b, beta) in [
        (1.0, 3.0, 1.0),
        (1.0, 2.0, 1.0),
        (1.0, 1.0, 1.0),
        (1.0, 4.0, 4.0),
    ] {
        let cs = constant_coeffs(&g, a, b, beta)?;
        println!(
            "a = {a}, b = {b}, β = {beta}:  e = {}, d = {}, signs ok = {}",
            cs.derive_e().values()[0],
            cs.derive_d().values()[0],
            cs.certify_signs().is_ok()
        );
    }

    let r = 1.5;
    let mu = poincare_mu(&g, r)?;
    let sigma = example_sigma(&g, r, 0.5, mu)?;
    println!(
        "μ_r = {mu:.6}  σ range [{:.4}, {:.4}]  floor -μ_r/2r = {:.4}",
        sigma.min(),
        sigma.max(),
        -mu / (2.0 * r)
    );

    for l in [4.0, 6.0, 8.0] {
        let g3 = Grid::new(3, l, 31)?;
        println!(
            "Gaussian density, L = {l}: ∫σ = {:.6}",
            integrate(&g3, &gaussian_sigma(&g3))?
        );
    }

    let pair = paired_class_coeffs(&g, 1.5, 0.5, 2.0, 1.0)?;
    println!(
        "paired: μ_a = {:.5}, μ_b = {:.5}, min a = {:.4}, min b = {:.4}",
        pair.mu_a,
        pair.mu_b,
        pair.a.min(),
        pair.b.min()
    );
    Ok(())
}
