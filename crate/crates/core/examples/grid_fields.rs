//! Grid, discrete Laplacian, quadrature, norms and CSV round trip.

use fhnvs::grid::{integrate, laplacian_apply, norms};
use fhnvs::io::{field_from_csv, field_to_csv};
use fhnvs::{Grid, ScalarField};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(1, 1.0, 3)?;
    let u = ScalarField::from_values(&g, vec![0.0, 1.0, 0.0])?;
    println!(
        "h = {}, -Δ_h (0,1,0) = {:?}",
        g.spacing(),
        laplacian_apply(&g, &u)?.values()
    );
    println!("∫ 1 = {}", integrate(&g, &ScalarField::constant(&g, 1.0))?);

    // lowest sine mode: discrete eigenvalue (4/h²) sin²(πh/4L) against the continuum (π/2L)²
    let l = 2.0;
    for n in [15, 31, 63, 127] {
        let g = Grid::new(1, l, n)?;
        let s = ScalarField::from_fn(&g, |x| {
            (std::f64::consts::PI * (x[0] + l) / (2.0 * l)).sin()
        });
        let nm = norms(&g, &s, 2.0)?;
        let rayleigh = nm.h1_semi.powi(2) / nm.l2.powi(2);
        println!(
            "n = {n:4}  Rayleigh = {rayleigh:.10}  continuum = {:.10}  ∫ sin² = {:.8} (L = {l})",
            (std::f64::consts::PI / (2.0 * l)).powi(2),
            nm.l2.powi(2)
        );
    }

    let g3 = Grid::new(3, 5.0, 15)?;
    println!(
        "3-D reference grid: h = {}, {} nodes",
        g3.spacing(),
        g3.len()
    );

    let g2 = Grid::new(2, 2.0, 7)?;
    let f = ScalarField::from_fn(&g2, |x| x[0] * x[1] + 0.1);
    let back = field_from_csv(&g2, &field_to_csv(&f))?;
    println!("CSV round trip bitwise: {}", back == f);
    Ok(())
}
