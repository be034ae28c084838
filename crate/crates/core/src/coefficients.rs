//! Coefficient data `a`, `b`, `c = βa` and the derived shifts
//! `e = b − 2β^{1/2} a`, `d = b − β^{1/2} a`, plus the generators for the
//! sign-changing non-coercive class example and the Gaussian density.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::io;
use crate::spectral::{self, DomainMask, EigenOptions};

#[derive(Debug, Clone)]
pub struct CoefficientSet {
    grid: Grid,
    a: ScalarField,
    b: ScalarField,
    beta: f64,
    phi: ScalarField,
    theta: Option<ScalarField>,
}

impl CoefficientSet {
    pub fn new(a: ScalarField, b: ScalarField, beta: f64) -> Result<Self> {
        a.check_grid(&b)?;
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::invalid(format!(
                "beta must be positive (got {beta})"
            )));
        }
        for (name, f) in [("a", &a), ("b", &b)] {
            if f.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "coefficient {name} has non-finite values"
                )));
            }
        }
        let grid = *a.grid();
        Ok(CoefficientSet {
            grid,
            phi: ScalarField::zeros(&grid),
            a,
            b,
            beta,
            theta: None,
        })
    }

    pub fn with_phi(mut self, phi: ScalarField) -> Result<Self> {
        phi.check_grid(&self.a)?;
        if phi.min() < 0.0 {
            return Err(Error::invalid("growth weight phi must be nonnegative"));
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn with_theta(mut self, theta: ScalarField) -> Result<Self> {
        theta.check_grid(&self.a)?;
        if theta.min() < 0.0 {
            return Err(Error::invalid("weight theta must be nonnegative"));
        }
        self.theta = Some(theta);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn a(&self) -> &ScalarField {
        &self.a
    }

    pub fn b(&self) -> &ScalarField {
        &self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn theta(&self) -> Option<&ScalarField> {
        self.theta.as_ref()
    }

    /// `c = βa`; never stored.
    pub fn c(&self) -> ScalarField {
        self.a.scale(self.beta)
    }

    pub fn derive_e(&self) -> ScalarField {
        let s = 2.0 * self.beta.sqrt();
        ScalarField::from_vec_unchecked(
            &self.grid,
            self.b
                .values()
                .iter()
                .zip(self.a.values())
                .map(|(b, a)| b - s * a)
                .collect(),
        )
    }

    pub fn derive_d(&self) -> ScalarField {
        let s = self.beta.sqrt();
        ScalarField::from_vec_unchecked(
            &self.grid,
            self.b
                .values()
                .iter()
                .zip(self.a.values())
                .map(|(b, a)| b - s * a)
                .collect(),
        )
    }

    /// Node-wise sign check of `e` and `a` for the three-solution pipeline.
    pub fn sign_report(&self) -> SignReport {
        let e = self.derive_e();
        let negative_e_nodes: Vec<usize> = e
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < 0.0)
            .map(|(i, _)| i)
            .collect();
        let nonpositive_a_nodes = self.a.values().iter().filter(|&&v| v <= 0.0).count();
        // ϑ-bound 0 ≤ e ≤ C_ϑ(1 + ϑ^{1/α}); on a bounded box C_ϑ = max e works
        let c_theta = e.max().max(0.0);
        SignReport {
            min_e: e.min(),
            max_e: e.max(),
            min_a: self.a.min(),
            negative_e_nodes: negative_e_nodes.len(),
            first_negative_e: negative_e_nodes.first().copied(),
            nonpositive_a_nodes,
            c_theta,
        }
    }

    /// `a > 0` and `e ≥ 0` at every node.
    pub fn certify_signs(&self) -> Result<SignReport> {
        let rep = self.sign_report();
        if rep.nonpositive_a_nodes > 0 {
            return Err(Error::Certification(format!(
                "a must be positive at every node ({} nodes with a <= 0, min {:.3e})",
                rep.nonpositive_a_nodes, rep.min_a
            )));
        }
        if rep.negative_e_nodes > 0 {
            return Err(Error::Certification(format!(
                "e = b - 2 sqrt(beta) a is negative at {} nodes (min {:.3e})",
                rep.negative_e_nodes, rep.min_e
            )));
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    pub min_e: f64,
    pub max_e: f64,
    pub min_a: f64,
    pub negative_e_nodes: usize,
    pub first_negative_e: Option<usize>,
    pub nonpositive_a_nodes: usize,
    pub c_theta: f64,
}

pub fn constant_coeffs(grid: &Grid, a0: f64, b0: f64, beta: f64) -> Result<CoefficientSet> {
    if !a0.is_finite() || !b0.is_finite() {
        return Err(Error::invalid("constant coefficients must be finite"));
    }
    CoefficientSet::new(
        ScalarField::constant(grid, a0),
        ScalarField::constant(grid, b0),
        beta,
    )
}

pub fn derive_e(cs: &CoefficientSet) -> ScalarField {
    cs.derive_e()
}

pub fn derive_d(cs: &CoefficientSet) -> ScalarField {
    cs.derive_d()
}

pub fn load_field(grid: &Grid, path: impl AsRef<Path>) -> Result<ScalarField> {
    io::load_field(grid, path)
}

/// Value of the sign-changing class example at `z = (x₁, y)`:
/// `-μ_r/2r` on `|z| ≤ r/2`, `1 + κ²(1+|x₁|)²|y|²` on `|z| ≥ r`, and on the
/// ring a linear radial blend between the inner constant and the outer
/// formula at the radial projection onto `|z| = r`.
pub fn example_sigma_at(z: &[f64], r: f64, kappa: f64, mu_r: f64) -> f64 {
    let floor = -mu_r / (2.0 * r);
    let outer = |p: &[f64]| {
        let x1 = p[0];
        let y2: f64 = p[1..].iter().map(|v| v * v).sum();
        1.0 + kappa * kappa * (1.0 + x1.abs()).powi(2) * y2
    };
    let rad = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rad <= 0.5 * r {
        floor
    } else if rad >= r {
        outer(z)
    } else {
        let t = (rad - 0.5 * r) / (0.5 * r);
        let proj: Vec<f64> = z.iter().map(|v| v * r / rad).collect();
        ((1.0 - t) * floor + t * outer(&proj)).max(floor)
    }
}

pub fn example_sigma(grid: &Grid, r: f64, kappa: f64, mu_r: f64) -> Result<ScalarField> {
    if !(r > 1.0) {
        return Err(Error::invalid(format!(
            "example_sigma needs r > 1 (got {r})"
        )));
    }
    if !(kappa > 0.0) || !(mu_r > 0.0) {
        return Err(Error::invalid("example_sigma needs kappa > 0 and mu_r > 0"));
    }
    if r >= grid.half_width() {
        return Err(Error::invalid(format!(
            "box half width {} does not contain B_r with r = {r}",
            grid.half_width()
        )));
    }
    Ok(ScalarField::from_fn(grid, |x| {
        example_sigma_at(x, r, kappa, mu_r)
    }))
}

/// Smallest Dirichlet eigenvalue of `-Δ_h` on the masked ball `B_{2r}(0)`.
pub fn poincare_mu(grid: &Grid, r: f64) -> Result<f64> {
    if !(r > 0.0) || 2.0 * r > grid.half_width() {
        return Err(Error::invalid(format!(
            "ball B_2r with r = {r} does not fit in the box of half width {}",
            grid.half_width()
        )));
    }
    let mask = DomainMask::ball(grid, &vec![0.0; grid.dim()], 2.0 * r);
    poincare_mu_on(&mask)
}

pub fn poincare_mu_on(mask: &DomainMask) -> Result<f64> {
    let zero = ScalarField::zeros(mask.grid());
    Ok(spectral::lambda1_pair(&zero, mask, EigenOptions::default())?.value)
}

/// Gaussian density `(2π)^{-d/2} exp(-|x|²/2)`.
pub fn gaussian_sigma(grid: &Grid) -> ScalarField {
    let d = grid.dim() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-d / 2.0);
    ScalarField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        norm * (-0.5 * r2).exp()
    })
}

#[derive(Debug, Clone)]
pub struct PairedCoefficients {
    pub a: ScalarField,
    pub b: ScalarField,
    pub mu_a: f64,
    pub mu_b: f64,
}

/// Two representatives of the same class: `a` from `(r1, κ1)` and `b` from
/// `(r2, κ2)`, each with its own Poincaré constant.
pub fn paired_class_coeffs(
    grid: &Grid,
    r1: f64,
    kappa1: f64,
    r2: f64,
    kappa2: f64,
) -> Result<PairedCoefficients> {
    let mu_a = poincare_mu(grid, r1)?;
    let mu_b = if r1 == r2 {
        mu_a
    } else {
        poincare_mu(grid, r2)?
    };
    Ok(PairedCoefficients {
        a: example_sigma(grid, r1, kappa1, mu_a)?,
        b: example_sigma(grid, r2, kappa2, mu_b)?,
        mu_a,
        mu_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_examples() {
        let g = Grid::new(1, 1.0, 5).unwrap();
        let cs = constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap();
        assert!(cs.derive_e().values().iter().all(|&v| v == 1.0));
        assert!(cs.derive_d().values().iter().all(|&v| v == 2.0));
        assert!(cs.certify_signs().is_ok());

        let cs = constant_coeffs(&g, 1.0, 2.0, 1.0).unwrap();
        assert!(cs.derive_e().values().iter().all(|&v| v == 0.0));
        assert!(cs.certify_signs().is_ok());

        let cs = constant_coeffs(&g, 1.0, 1.0, 1.0).unwrap();
        assert!(cs.derive_e().values().iter().all(|&v| v == -1.0));
        assert!(matches!(cs.certify_signs(), Err(Error::Certification(_))));

        let cs = constant_coeffs(&g, 1.0, 4.0, 4.0).unwrap();
        assert!(cs.derive_e().values().iter().all(|&v| v == 0.0));
        assert!(cs.derive_d().values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn beta_must_be_positive() {
        let g = Grid::new(1, 1.0, 5).unwrap();
        assert!(constant_coeffs(&g, 1.0, 3.0, 0.0).is_err());
        assert!(constant_coeffs(&g, 1.0, 3.0, -1.0).is_err());
        assert!(constant_coeffs(&g, f64::NAN, 3.0, 1.0).is_err());
    }

    #[test]
    fn d_minus_e_is_sqrt_beta_a() {
        let g = Grid::new(2, 1.0, 6).unwrap();
        let a = ScalarField::from_fn(&g, |x| 1.0 + x[0].sin());
        let b = ScalarField::from_fn(&g, |x| 3.0 + x[1] * x[1]);
        let cs = CoefficientSet::new(a.clone(), b, 2.25).unwrap();
        let diff = cs.derive_d().sub(&cs.derive_e()).unwrap();
        for (dv, av) in diff.values().iter().zip(a.values()) {
            let b_minus = 1.5 * av;
            // both sides are b − k·a rounded once; compare with one-ulp slack
            assert!((dv - b_minus).abs() <= 4.0 * f64::EPSILON * (3.0 + 2.0 * b_minus.abs()));
        }
    }

    #[test]
    fn sigma_branches() {
        let (r, kappa, mu) = (2.0, 0.5, 0.6);
        assert_eq!(
            example_sigma_at(&[0.0, 0.0, 0.0], r, kappa, mu),
            -mu / (2.0 * r)
        );
        // large |x1| on the axis y = 0: value 1
        assert_eq!(example_sigma_at(&[1e6, 0.0, 0.0], r, kappa, mu), 1.0);
        // continuity at |z| = r
        let z = [0.6 * r, 0.8 * r, 0.0];
        let at = example_sigma_at(&z, r, kappa, mu);
        let inside = example_sigma_at(
            &[0.6 * r * (1.0 - 1e-12), 0.8 * r * (1.0 - 1e-12), 0.0],
            r,
            kappa,
            mu,
        );
        assert!((at - inside).abs() < 1e-9);
    }

    #[test]
    fn sigma_requires_r_gt_one_and_room() {
        let g = Grid::new(3, 5.0, 9).unwrap();
        assert!(example_sigma(&g, 1.0, 1.0, 1.0).is_err());
        assert!(example_sigma(&g, 6.0, 1.0, 1.0).is_err());
        assert!(example_sigma(&g, 2.0, 0.0, 1.0).is_err());
        assert!(example_sigma(&g, 2.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn gaussian_value_at_origin() {
        let g = Grid::new(3, 1.0, 3).unwrap();
        let s = gaussian_sigma(&g);
        let centre = g.flat_index(&[1, 1, 1]);
        let expect = (2.0 * std::f64::consts::PI).powf(-1.5);
        assert!((s.values()[centre] - expect).abs() < 1e-15);
        assert!((expect - 0.06349).abs() < 1e-5);
        assert!(s.min() > 0.0);
    }
}
