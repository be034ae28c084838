//! Projection onto the cone of nonnegative fields in the star metric and
//! the three Moreau certificates.

use fhnvs::coefficients::constant_coeffs;
use fhnvs::random::{rng, smooth_field};
use fhnvs::solvers::{cone_project, ConeOptions};
use fhnvs::{Grid, ReducedOperator};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(2, 4.0, 15)?;
    let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0)?)?;
    let mut r = rng(2);
    for k in 0..5 {
        let u = smooth_field(&g, &mut r, 5);
        let p = cone_project(&op, &u, &ConeOptions::default())?;
        let c = &p.certificate;
        println!(
            "field {k}: sweeps {:2}, active {:3}, min {:.1e}, orth {:.1e}, polar {:.1e}/{:.1e}, passed {}",
            p.sweeps, p.active, c.min_rel, c.orthogonality_rel, c.polar_nodal_rel, c.polar_sampled_rel, c.passed
        );
    }
    Ok(())
}
