//! Energy `J(u) = ½‖u‖²_ab − ∫F(x,u)`, its gradient, and sampled checks of
//! the abstract three-solution hypotheses for the map `A`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, norm2, Grid, ScalarField};
use crate::linalg::{cg, CgOptions};
use crate::nonlinearity::NonlinearitySpec;
use crate::nonlocal::ReducedOperator;
use crate::random;
use crate::solvers::cone::{cone_project, ConeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Ab,
    AbStar,
}

#[derive(Debug, Clone)]
pub struct EnergyProblem {
    op: ReducedOperator,
    spec: NonlinearitySpec,
    metric: Metric,
    outer: CgOptions,
}

impl EnergyProblem {
    /// The star metric is refused unless `a > 0`, `e ≥ 0`, `λ₁(d) > 0`.
    pub fn new(op: ReducedOperator, spec: NonlinearitySpec, metric: Metric) -> Result<Self> {
        if let Some(phi) = spec.phi() {
            if phi.grid() != op.grid() {
                return Err(Error::GridMismatch);
            }
        }
        if metric == Metric::AbStar {
            op.certify_star()?;
        }
        let max_iter = 20 * op.grid().len() + 500;
        Ok(EnergyProblem {
            op,
            spec,
            metric,
            outer: CgOptions::new(1e-8, max_iter),
        })
    }

    /// Tolerance of the outer CG used by the `ab`-metric gradient.
    pub fn with_outer_tolerance(mut self, tol: f64) -> Self {
        self.outer.tol = tol;
        self
    }

    pub fn op(&self) -> &ReducedOperator {
        &self.op
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    fn w(&self) -> f64 {
        self.grid().quad_weight()
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn psi(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        Ok(self.w() * self.spec.F_field(u).iter().sum::<f64>())
    }

    /// `∫F + ½∫e u²`
    pub fn psi_tilde(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let big_f = self.spec.F_field(u);
        let s: f64 = big_f
            .iter()
            .zip(u.values())
            .zip(self.op.e())
            .map(|((f, u), e)| f + 0.5 * e * u * u)
            .sum();
        Ok(self.w() * s)
    }

    pub fn energy_ab(&self, u: &ScalarField) -> Result<f64> {
        Ok(0.5 * self.op.inner_ab(u, u)? - self.psi(u)?)
    }

    pub fn energy_star(&self, u: &ScalarField) -> Result<f64> {
        Ok(0.5 * self.op.inner_ab_star(u, u)? - self.psi_tilde(u)?)
    }

    /// Same value in both metrics; computed along the selected one.
    pub fn energy(&self, u: &ScalarField) -> Result<f64> {
        match self.metric {
            Metric::Ab => self.energy_ab(u),
            Metric::AbStar => self.energy_star(u),
        }
    }

    /// Nodal residual `(-Δ_h + a S_b) u − f(u)` of the reduced equation.
    pub fn residual(&self, u: &ScalarField) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut r = vec![0.0; u.len()];
        self.op.apply_reduced_raw(u.values(), &mut r)?;
        for (r, f) in r.iter_mut().zip(self.spec.f_field(u)) {
            *r -= f;
        }
        Ok(r)
    }

    /// `sqrt(w Σ r²)` of [`Self::residual`].
    pub fn residual_norm(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.w().sqrt() * norm2(&self.residual(u)?))
    }

    /// `DJ(u) h`, exact up to the inner solve.
    pub fn directional_derivative(&self, u: &ScalarField, h: &ScalarField) -> Result<f64> {
        self.check(h)?;
        Ok(self.w() * dot(&self.residual(u)?, h.values()))
    }

    /// The map `A`: Riesz representative of `DΨ` (ab) or `DΨ̃` (star).
    pub fn map_a(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        let f = self.spec.f_field(u);
        let x = match self.metric {
            Metric::Ab => {
                let op = self.op.reduced_operator();
                cg(&op, &f, self.outer)
                    .map_err(|e| e.context("ab-metric gradient"))?
                    .0
            }
            Metric::AbStar => {
                let load: Vec<f64> = f
                    .iter()
                    .zip(u.values())
                    .zip(self.op.e())
                    .map(|((f, u), e)| f + e * u)
                    .collect();
                self.op
                    .factorized_inverse_raw(&load)
                    .map_err(|e| e.context("star-metric gradient"))?
            }
        };
        Ok(ScalarField::from_vec_unchecked(self.grid(), x))
    }

    /// `g = u − A(u)`, so that `⟨g, h⟩ = DJ(u) h` in the selected metric.
    pub fn gradient(&self, u: &ScalarField) -> Result<ScalarField> {
        let a = self.map_a(u)?;
        u.sub(&a)
    }

    pub fn inner(&self, u: &ScalarField, w: &ScalarField) -> Result<f64> {
        match self.metric {
            Metric::Ab => self.op.inner_ab(u, w),
            Metric::AbStar => self.op.inner_ab_star(u, w),
        }
    }

    pub fn norm(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.inner(u, u)?.max(0.0).sqrt())
    }

    /// `(μ₀J(u) − DJ(u)u, (μ₀/2 − 1)‖u‖²_ab)`; the first dominates the
    /// second under the Ambrosetti–Rabinowitz condition.
    pub fn ar_energy_gap(&self, u: &ScalarField) -> Result<(f64, f64)> {
        let mu0 = self.spec.mu0();
        let lhs = mu0 * self.energy_ab(u)? - self.directional_derivative(u, u)?;
        let rhs = (0.5 * mu0 - 1.0) * self.op.inner_ab(u, u)?;
        Ok((lhs, rhs))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityRow {
    pub passed: bool,
    pub samples: usize,
    /// Smallest `(rhs − lhs) / scale` over the samples; negative on failure.
    pub worst_margin: f64,
    pub worst_sample: Option<usize>,
}

impl InequalityRow {
    fn new() -> Self {
        InequalityRow {
            passed: true,
            samples: 0,
            worst_margin: f64::INFINITY,
            worst_sample: None,
        }
    }

    fn push(&mut self, k: usize, margin: f64, tol: f64) {
        self.samples += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_sample = Some(k);
        }
        if margin < -tol {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WethReport {
    /// `‖A(0)‖*`
    pub a_of_zero: f64,
    /// `⟨A(u),u⟩* ≥ μ₀ Φ(u)` with `C* = 0`.
    pub a2_1_literal: InequalityRow,
    pub eta: f64,
    pub c_star: f64,
    /// `⟨A(u),u⟩* ≥ η Φ(u) − C*` with the fitted pair above.
    pub a2_1_fitted: InequalityRow,
    /// `sup ‖u‖*² / ‖u‖²_ab`, by power iteration.
    pub norm_ratio_sup: f64,
    /// `|⟨A(u),v⟩*| ≤ (q ‖u‖* + c_growth ‖u‖*^ℓ) ‖v‖*` with
    /// `q = sqrt(1 − 1/norm_ratio_sup)`.
    pub q: f64,
    pub c_growth: f64,
    pub ell: f64,
    pub a2_2: InequalityRow,
    pub a3: InequalityRow,
    pub a4: InequalityRow,
}

fn sample_u(grid: &Grid, rng: &mut random::FieldRng) -> ScalarField {
    let base = random::smooth_field(grid, rng, 4);
    let m = base.max_abs().max(1e-300);
    let amp = 10f64.powf(rng.random_range(-2.0..1.0));
    base.scale(amp / m)
}

/// Largest eigenvalue of `A_red^{-1}(A_red + e)` by power iteration.
fn norm_ratio_sup(prob: &EnergyProblem, seed: u64) -> Result<f64> {
    let op = prob.op();
    let grid = prob.grid();
    if op.e().iter().all(|&e| e == 0.0) {
        return Ok(1.0);
    }
    let red = op.reduced_operator();
    let opts = CgOptions::new(1e-10, 20 * grid.len() + 500);
    let mut x = random::nonnegative_field(grid, &mut random::rng(seed)).into_values();
    let mut lam = 0.0;
    for _ in 0..200 {
        let ex: Vec<f64> = x.iter().zip(op.e()).map(|(x, e)| x * e).collect();
        let y = cg(&red, &ex, opts)?.0;
        let n = norm2(&y);
        if n == 0.0 {
            return Ok(1.0);
        }
        // Rayleigh quotient in the A_red inner product
        let mut ay = vec![0.0; y.len()];
        op.apply_reduced_raw(&y, &mut ay)?;
        let ey: f64 = y.iter().zip(op.e()).map(|(y, e)| e * y * y).sum();
        let new = ey / dot(&y, &ay);
        x = y.iter().map(|v| v / n).collect();
        if (new - lam).abs() <= 1e-9 * new {
            lam = new;
            break;
        }
        lam = new;
    }
    Ok(1.0 + lam)
}

/// Sampled checks of `A(0) = 0`, the two growth conditions and the two
/// polar-cone comparison conditions, all in the star product.
pub fn weth_checks(prob: &EnergyProblem, samples: usize, seed: u64) -> Result<WethReport> {
    let op = prob.op();
    op.certify_star()?;
    let star = EnergyProblem::new(op.clone(), prob.spec().clone(), Metric::AbStar)?;
    let grid = *prob.grid();
    let w = grid.quad_weight();
    let mu0 = prob.spec().mu0();
    let p = prob.spec().p();
    let tol = 1e-9;

    let zero = ScalarField::zeros(&grid);
    let a_of_zero = op.norm_ab_star(&star.map_a(&zero)?)?;

    // ⟨A(u), h⟩* = w Σ (f(u) + e u) h
    let pairing = |u: &ScalarField, h: &ScalarField| -> f64 {
        let f = prob.spec().f_field(u);
        let s: f64 = f
            .iter()
            .zip(u.values())
            .zip(op.e())
            .zip(h.values())
            .map(|(((f, u), e), h)| (f + e * u) * h)
            .sum();
        w * s
    };

    // η between 2 and μ₀; C* from the pointwise infimum of
    // f(t)t − ηF(t) + (1 − η/2) e t² over a dense t-ladder.
    let eta = 0.5 * (2.0 + mu0);
    let ladder: Vec<f64> = {
        let pos: Vec<f64> = (0..400)
            .map(|k| 10f64.powf(-4.0 + 7.0 * k as f64 / 399.0))
            .collect();
        pos.iter().map(|v| -v).chain(pos.iter().copied()).collect()
    };
    let mut c_star = 0.0;
    for i in 0..grid.len() {
        let xa = grid.coords(i);
        let x = &xa[..grid.dim()];
        let e = op.e()[i];
        let mut lo = 0.0f64;
        for &t in &ladder {
            let spec = prob.spec();
            let h = spec.eval_f(x, t) * t - eta * spec.eval_F(x, t) + (1.0 - 0.5 * eta) * e * t * t;
            lo = lo.min(h);
        }
        c_star -= w * lo;
    }

    let c_sup = norm_ratio_sup(prob, seed ^ 0x51)?;
    let q = (1.0 - 1.0 / c_sup).max(0.0).sqrt();

    let mut rng = random::rng(seed);
    let fit_u: Vec<ScalarField> = (0..samples).map(|_| sample_u(&grid, &mut rng)).collect();
    let fit_v: Vec<ScalarField> = (0..samples).map(|_| sample_u(&grid, &mut rng)).collect();
    let mut c_growth = 0.0f64;
    for (u, v) in fit_u.iter().zip(&fit_v) {
        let nu = op.norm_ab_star(u)?;
        let nv = op.norm_ab_star(v)?;
        if nu == 0.0 || nv == 0.0 {
            continue;
        }
        let excess = pairing(u, v).abs() / nv - q * nu;
        c_growth = c_growth.max(excess / nu.powf(p));
    }
    // fitted on one batch, checked on another with a factor-2 safety margin
    c_growth *= 2.0;

    let mut a2_1_literal = InequalityRow::new();
    let mut a2_1_fitted = InequalityRow::new();
    let mut a2_2 = InequalityRow::new();
    let mut a3 = InequalityRow::new();
    let mut a4 = InequalityRow::new();
    let cone = ConeOptions::default();

    for k in 0..samples {
        let u = sample_u(&grid, &mut rng);
        let v = sample_u(&grid, &mut rng);
        let au_u = pairing(&u, &u);
        let phi = star.psi_tilde(&u)?;
        let scale = au_u.abs().max(phi.abs()).max(1e-300);
        a2_1_literal.push(k, (au_u - mu0 * phi) / scale, tol);
        a2_1_fitted.push(k, (au_u - eta * phi + c_star) / scale.max(c_star), tol);

        let nu = op.norm_ab_star(&u)?;
        let nv = op.norm_ab_star(&v)?;
        let bound = (q * nu + c_growth * nu.powf(p)) * nv;
        let lhs = pairing(&u, &v).abs();
        a2_2.push(k, (bound - lhs) / bound.max(1e-300), tol);

        // polar samples: y = -M^{-1} load, load ≥ 0; (−K)° = −K°
        let load = random::nonnegative_field(&grid, &mut rng);
        let y = op.factorized_inverse(&load)?.scale(-1.0);
        let proj = cone_project(op, &u, &cone)?;
        let polar_u = proj.polar;
        let l = pairing(&u, &y);
        let r = pairing(&polar_u, &y);
        a3.push(k, (r - l) / l.abs().max(r.abs()).max(1e-300), 1e-7);

        let neg = u.scale(-1.0);
        let proj_neg = cone_project(op, &neg, &cone)?;
        let polar_neg_cone = proj_neg.polar.scale(-1.0);
        let z = y.scale(-1.0);
        let l = pairing(&u, &z);
        let r = pairing(&polar_neg_cone, &z);
        a4.push(k, (r - l) / l.abs().max(r.abs()).max(1e-300), 1e-7);
    }

    Ok(WethReport {
        a_of_zero,
        a2_1_literal,
        eta,
        c_star,
        a2_1_fitted,
        norm_ratio_sup: c_sup,
        q,
        c_growth,
        ell: p,
        a2_2,
        a3,
        a4,
    })
}
