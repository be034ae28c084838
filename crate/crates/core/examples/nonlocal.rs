//! The reduced operator: S_b, the inner products, the norm identity, the
//! factorized inverse and the maximum-principle check.

use fhnvs::coefficients::constant_coeffs;
use fhnvs::random::{rng, smooth_field};
use fhnvs::{Grid, ReducedOperator};

fn main() -> fhnvs::Result<()> {
    let g = Grid::new(3, 5.0, 11)?;
    let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0)?)?;
    println!(
        "λ₁(b) = {:.6}, star certificate: {:?}",
        op.lambda1_b(),
        op.certify_star()?
    );

    let mut r = rng(7);
    let u = smooth_field(&g, &mut r, 4);
    let w = smooth_field(&g, &mut r, 4);
    let q = g.quad_weight();
    let a_u_sb_w: f64 = u
        .values()
        .iter()
        .zip(op.apply_sb(&w)?.values())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * q;
    let a_w_sb_u: f64 = w
        .values()
        .iter()
        .zip(op.apply_sb(&u)?.values())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * q;
    println!("∫a u S_b w = {a_u_sb_w:.12e}, ∫a w S_b u = {a_w_sb_u:.12e}");
    println!(
        "⟨u,w⟩_ab = {:.12e}, ⟨w,u⟩_ab = {:.12e}",
        op.inner_ab(&u, &w)?,
        op.inner_ab(&w, &u)?
    );
    println!(
        "‖u‖_ab = {:.8}, ‖u‖*_ab = {:.8}",
        op.norm_ab(&u)?,
        op.norm_ab_star(&u)?
    );
    let id = op.norm_ab_identity_check(&u)?;
    println!(
        "norm identity: lhs {:.12e} rhs {:.12e} rel {:.2e}",
        id.lhs, id.rhs, id.rel_err
    );

    let x = op.factorized_inverse(&w)?;
    let back = op.apply_star(&x)?;
    let err = back.sub(&w)?.max_abs() / w.max_abs();
    println!("(L + a S_b + e) ∘ factorized inverse: max rel error {err:.2e}");

    let mp = op.maxprinciple_check(20, 3, 1e-10)?;
    println!(
        "maximum principle over {} loads: (L + b)⁻¹ violations {}, factorized violations {:?}",
        mp.trials,
        mp.b_inverse.violations,
        mp.factorized.map(|f| f.violations)
    );
    Ok(())
}
