//! The reduced single-equation operator algebra.
//!
//! Eliminating `v` from the second equation gives `v = S_b u` with
//! `S_b = β(-Δ_h + b)^{-1} a`, and the first equation becomes
//! `(-Δ_h + a S_b) u = f(u)`. The discrete operator `β D_a (L + D_b)^{-1} D_a`
//! is symmetric, so `-Δ_h + a S_b` (and its `e`-shift) is SPD once
//! `λ₁(b) > 0` is certified.
//!
//! The `e`-shifted operator factorises through `d = b − β^{1/2} a`:
//!
//! ```text
//! (-Δ + a S_b + e)^{-1} = (I + β^{1/2} (-Δ + d)^{-1} a) (-Δ + d)^{-1}
//! ```
//!
//! which holds verbatim for the discrete operators because the algebra only
//! uses that `a`, `b`, `d` act as diagonal multipliers.

use std::sync::OnceLock;

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid, ScalarField};
use crate::linalg::{cg, CgOptions, FnOperator, LinearOperator, ShiftedLaplacian};
use crate::parallel::ordered_map;
use crate::random;
use crate::spectral::{lambda1, DomainMask, CERT_TOL};

pub const DEFAULT_INNER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StarCertificate {
    pub lambda1_d: f64,
    pub min_a: f64,
    pub min_e: f64,
}

#[derive(Debug)]
pub struct ReducedOperator {
    coeffs: CoefficientSet,
    b_op: ShiftedLaplacian,
    d_op: ShiftedLaplacian,
    e: Vec<f64>,
    lambda1_b: f64,
    inner: CgOptions,
    star: OnceLock<std::result::Result<StarCertificate, String>>,
}

impl Clone for ReducedOperator {
    fn clone(&self) -> Self {
        let star = OnceLock::new();
        if let Some(v) = self.star.get() {
            let _ = star.set(v.clone());
        }
        ReducedOperator {
            coeffs: self.coeffs.clone(),
            b_op: self.b_op.clone(),
            d_op: self.d_op.clone(),
            e: self.e.clone(),
            lambda1_b: self.lambda1_b,
            inner: self.inner,
            star,
        }
    }
}

impl ReducedOperator {
    /// Certifies `λ₁(b) > 0` on the full box before anything else.
    pub fn new(coeffs: CoefficientSet) -> Result<Self> {
        Self::with_tolerance(coeffs, DEFAULT_INNER_TOL, 0)
    }

    /// `max_iter = 0` picks a size-based default.
    pub fn with_tolerance(coeffs: CoefficientSet, inner_tol: f64, max_iter: usize) -> Result<Self> {
        let grid = *coeffs.grid();
        let lambda1_b = lambda1(coeffs.b(), &DomainMask::full(&grid))?;
        if !(lambda1_b > CERT_TOL) {
            return Err(Error::Certification(format!(
                "lambda1(b) = {lambda1_b:.6e} is not above {CERT_TOL:e}; -Δ + b is not invertible on E_b"
            )));
        }
        let max_iter = if max_iter == 0 {
            20 * grid.len() + 200
        } else {
            max_iter
        };
        let b_op = ShiftedLaplacian::new(&grid, coeffs.b().values().to_vec());
        let d_op = ShiftedLaplacian::new(&grid, coeffs.derive_d().into_values());
        let e = coeffs.derive_e().into_values();
        Ok(ReducedOperator {
            coeffs,
            b_op,
            d_op,
            e,
            lambda1_b,
            inner: CgOptions::new(inner_tol, max_iter),
            star: OnceLock::new(),
        })
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn grid(&self) -> &Grid {
        self.coeffs.grid()
    }

    pub fn lambda1_b(&self) -> f64 {
        self.lambda1_b
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner.tol
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    /// `a > 0`, `e ≥ 0` and `λ₁(d) > 0`: preconditions of the star product
    /// and the factorised inverse. Computed once.
    pub fn certify_star(&self) -> Result<StarCertificate> {
        self.star
            .get_or_init(|| {
                let signs = self.coeffs.certify_signs().map_err(|e| match e {
                    Error::Certification(m) => m,
                    other => other.to_string(),
                })?;
                let d = ScalarField::from_vec_unchecked(self.grid(), self.d_op.shift().to_vec());
                let l1d = lambda1(&d, &DomainMask::full(self.grid())).map_err(|e| e.to_string())?;
                if !(l1d > CERT_TOL) {
                    return Err(format!("lambda1(d) = {l1d:.6e} is not positive"));
                }
                Ok(StarCertificate {
                    lambda1_d: l1d,
                    min_a: signs.min_a,
                    min_e: signs.min_e,
                })
            })
            .clone()
            .map_err(Error::Certification)
    }

    /// `(-Δ_h + b)^{-1} w`.
    pub fn solve_b_raw(&self, w: &[f64]) -> Result<Vec<f64>> {
        Ok(cg(&self.b_op, w, self.inner)?.0)
    }

    pub fn solve_b(&self, w: &ScalarField) -> Result<ScalarField> {
        let x = self
            .solve_b_raw(w.values())
            .map_err(|e| e.context("(-Δ+b) solve"))?;
        Ok(ScalarField::from_vec_unchecked(self.grid(), x))
    }

    pub fn apply_sb_raw(&self, u: &[f64]) -> Result<Vec<f64>> {
        let beta = self.coeffs.beta();
        let rhs: Vec<f64> = u
            .iter()
            .zip(self.coeffs.a().values())
            .map(|(u, a)| beta * a * u)
            .collect();
        cg(&self.b_op, &rhs, self.inner)
            .map(|(x, _)| x)
            .map_err(|e| e.context("S_b solve"))
    }

    /// `v = S_b u = β(-Δ_h + b)^{-1}(a u)`.
    pub fn apply_sb(&self, u: &ScalarField) -> Result<ScalarField> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField::from_vec_unchecked(
            self.grid(),
            self.apply_sb_raw(u.values())?,
        ))
    }

    /// `(-Δ_h + a S_b) u`.
    pub fn apply_reduced_raw(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let sb = self.apply_sb_raw(u)?;
        self.grid().neg_laplacian_into(u, out);
        for ((o, a), s) in out.iter_mut().zip(self.coeffs.a().values()).zip(&sb) {
            *o += a * s;
        }
        Ok(())
    }

    /// `(-Δ_h + a S_b + e) u`.
    pub fn apply_star_raw(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply_reduced_raw(u, out)?;
        for ((o, e), v) in out.iter_mut().zip(&self.e).zip(u) {
            *o += e * v;
        }
        Ok(())
    }

    pub fn apply_star(&self, u: &ScalarField) -> Result<ScalarField> {
        let mut out = vec![0.0; u.len()];
        self.apply_star_raw(u.values(), &mut out)?;
        Ok(ScalarField::from_vec_unchecked(self.grid(), out))
    }

    pub fn apply_reduced(&self, u: &ScalarField) -> Result<ScalarField> {
        let mut out = vec![0.0; u.len()];
        self.apply_reduced_raw(u.values(), &mut out)?;
        Ok(ScalarField::from_vec_unchecked(self.grid(), out))
    }

    /// Reduced operator as a [`LinearOperator`] (nested CG inside).
    pub fn reduced_operator(&self) -> impl LinearOperator + '_ {
        FnOperator::new(self.grid().len(), move |x: &[f64], y: &mut [f64]| {
            self.apply_reduced_raw(x, y)
        })
    }

    pub fn star_operator(&self) -> impl LinearOperator + '_ {
        FnOperator::new(self.grid().len(), move |x: &[f64], y: &mut [f64]| {
            self.apply_star_raw(x, y)
        })
    }

    fn w(&self) -> f64 {
        self.grid().quad_weight()
    }

    fn check2(&self, u: &ScalarField, w: &ScalarField) -> Result<()> {
        if u.grid() != self.grid() || w.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `∫∇u∇w + ∫ b u w`.
    pub fn inner_b(&self, u: &ScalarField, w: &ScalarField) -> Result<f64> {
        self.check2(u, w)?;
        let lap = w.neg_laplacian();
        let pot: f64 = u
            .values()
            .iter()
            .zip(w.values())
            .zip(self.coeffs.b().values())
            .map(|((u, w), b)| b * u * w)
            .sum();
        Ok(self.w() * (dot(u.values(), lap.values()) + pot))
    }

    /// `∫∇u∇w + ∫ a u S_b w`.
    pub fn inner_ab(&self, u: &ScalarField, w: &ScalarField) -> Result<f64> {
        self.check2(u, w)?;
        let mut aw = vec![0.0; w.len()];
        self.apply_reduced_raw(w.values(), &mut aw)?;
        Ok(self.w() * dot(u.values(), &aw))
    }

    /// `⟨u, w⟩_ab + ∫ e u w`; refused unless `e ≥ 0` (and the rest of the
    /// star certificate) holds.
    pub fn inner_ab_star(&self, u: &ScalarField, w: &ScalarField) -> Result<f64> {
        self.check2(u, w)?;
        self.certify_star()?;
        let mut aw = vec![0.0; w.len()];
        self.apply_star_raw(w.values(), &mut aw)?;
        Ok(self.w() * dot(u.values(), &aw))
    }

    pub fn norm_ab(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.inner_ab(u, u)?.max(0.0).sqrt())
    }

    pub fn norm_ab_star(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.inner_ab_star(u, u)?.max(0.0).sqrt())
    }

    pub fn norm_b(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.inner_b(u, u)?.max(0.0).sqrt())
    }

    /// `‖u‖²_ab` against `‖∇u‖² + β^{-1}‖S_b u‖²_b`.
    pub fn norm_ab_identity_check(&self, u: &ScalarField) -> Result<IdentityCheck> {
        let lhs = self.inner_ab(u, u)?;
        let sb = self.apply_sb(u)?;
        let lap = u.neg_laplacian();
        let grad2 = self.w() * dot(u.values(), lap.values());
        let rhs = grad2 + self.inner_b(&sb, &sb)? / self.coeffs.beta();
        let rel_err = (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE);
        Ok(IdentityCheck {
            lhs,
            rhs,
            rel_err: if lhs == 0.0 && rhs == 0.0 {
                0.0
            } else {
                rel_err
            },
        })
    }

    pub fn factorized_inverse_raw(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.certify_star()?;
        let z = cg(&self.d_op, w, self.inner)
            .map_err(|e| e.context("factorized inverse, first (-Δ+d) solve"))?
            .0;
        let az: Vec<f64> = z
            .iter()
            .zip(self.coeffs.a().values())
            .map(|(z, a)| a * z)
            .collect();
        let y = cg(&self.d_op, &az, self.inner)
            .map_err(|e| e.context("factorized inverse, second (-Δ+d) solve"))?
            .0;
        let sb = self.coeffs.beta().sqrt();
        Ok(z.iter().zip(&y).map(|(z, y)| z + sb * y).collect())
    }

    /// `u` solving `(-Δ_h + a S_b + e) u = w` through the `d`-factorisation.
    pub fn factorized_inverse(&self, w: &ScalarField) -> Result<ScalarField> {
        if w.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField::from_vec_unchecked(
            self.grid(),
            self.factorized_inverse_raw(w.values())?,
        ))
    }

    /// Random nonnegative loads through `(-Δ+a S_b+e)^{-1}` and `(-Δ+b)^{-1}`;
    /// violations and failures of strict positivity are counted, not raised.
    pub fn maxprinciple_check(
        &self,
        trials: usize,
        seed: u64,
        tol_sign: f64,
    ) -> Result<MaxPrincipleReport> {
        let star_ok = self.certify_star().is_ok();
        let seeds: Vec<u64> = (0..trials as u64).map(|k| seed.wrapping_add(k)).collect();
        let runs = ordered_map(&seeds, |_, &s| -> Result<(SignStats, Option<SignStats>)> {
            let mut rng = random::rng(s);
            let w = random::nonnegative_field(self.grid(), &mut rng);
            let v = self.solve_b(&w)?;
            let fact = if star_ok {
                Some(SignStats::of(&self.factorized_inverse(&w)?, tol_sign))
            } else {
                None
            };
            Ok((SignStats::of(&v, tol_sign), fact))
        });
        let mut rep = MaxPrincipleReport {
            trials,
            tol_sign,
            b_inverse: PositivitySummary::default(),
            factorized: star_ok.then(PositivitySummary::default),
        };
        for run in runs {
            let (b, f) = run?;
            rep.b_inverse.push(b);
            if let (Some(sum), Some(f)) = (rep.factorized.as_mut(), f) {
                sum.push(f);
            }
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Copy)]
struct SignStats {
    min_over_max: f64,
    violation: bool,
    strictly_positive: bool,
}

impl SignStats {
    fn of(u: &ScalarField, tol_sign: f64) -> Self {
        let scale = u.max_abs();
        let min = u.min();
        if scale == 0.0 {
            return SignStats {
                min_over_max: 0.0,
                violation: false,
                strictly_positive: false,
            };
        }
        SignStats {
            min_over_max: min / scale,
            violation: min < -tol_sign * scale,
            strictly_positive: min > tol_sign * scale,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivitySummary {
    pub violations: usize,
    pub not_strictly_positive: usize,
    /// Smallest `min(u) / max|u|` seen.
    pub worst_min: f64,
}

impl Default for PositivitySummary {
    fn default() -> Self {
        PositivitySummary {
            violations: 0,
            not_strictly_positive: 0,
            worst_min: f64::INFINITY,
        }
    }
}

impl PositivitySummary {
    fn push(&mut self, s: SignStats) {
        self.violations += s.violation as usize;
        self.not_strictly_positive += (!s.strictly_positive) as usize;
        self.worst_min = self.worst_min.min(s.min_over_max);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleReport {
    pub trials: usize,
    pub tol_sign: f64,
    pub b_inverse: PositivitySummary,
    /// `None` when the star certificate fails (factorised inverse undefined).
    pub factorized: Option<PositivitySummary>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::constant_coeffs;

    fn reference(n: usize) -> ReducedOperator {
        let g = Grid::new(2, 2.0, n).unwrap();
        ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let op = reference(7);
        let z = ScalarField::zeros(op.grid());
        assert_eq!(op.apply_sb(&z).unwrap(), z);
        assert_eq!(op.factorized_inverse(&z).unwrap(), z);
        let chk = op.norm_ab_identity_check(&z).unwrap();
        assert_eq!((chk.lhs, chk.rhs, chk.rel_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn negative_lambda1_b_is_refused() {
        let g = Grid::new(1, 1.0, 9).unwrap();
        let cs = constant_coeffs(&g, 1.0, -10.0, 1.0).unwrap();
        assert!(matches!(
            ReducedOperator::new(cs),
            Err(Error::Certification(_))
        ));
    }

    #[test]
    fn star_product_refused_when_e_negative() {
        let g = Grid::new(1, 1.0, 9).unwrap();
        let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let u = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            op.inner_ab_star(&u, &u),
            Err(Error::Certification(_))
        ));
        assert!(op.factorized_inverse(&u).is_err());
        // the plain product is still available
        assert!(op.inner_ab(&u, &u).unwrap() > 0.0);
    }

    #[test]
    fn star_norm_dominates_ab_norm() {
        let op = reference(9);
        let mut rng = random::rng(11);
        for _ in 0..5 {
            let u = random::smooth_field(op.grid(), &mut rng, 3);
            let ab = op.inner_ab(&u, &u).unwrap();
            let star = op.inner_ab_star(&u, &u).unwrap();
            assert!(star >= ab);
        }
    }
}
