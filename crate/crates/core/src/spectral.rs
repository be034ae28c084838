//! Numerical certification of coefficient classes.
//!
//! `lambda1` is the bottom of the spectrum of `-Δ_h + σ` on a node mask,
//! `nu_s` the `L_s`-normalised Dirichlet quotient. Both are finite-box
//! surrogates: class membership is reported as a trend over shifted balls
//! and exterior domains, never as a verdict.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dot, norm2, Grid, ScalarField};
use crate::linalg::{cg, CgOptions, LinearOperator, ShiftedLaplacian};
use crate::parallel::ordered_map;
use crate::random;

/// `λ₁ > 0` is certified when the computed value exceeds this.
pub const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    active: Vec<bool>,
}

impl DomainMask {
    pub fn full(grid: &Grid) -> Self {
        DomainMask {
            grid: *grid,
            active: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> bool) -> Self {
        let d = grid.dim();
        let active = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..d])
            })
            .collect();
        DomainMask {
            grid: *grid,
            active,
        }
    }

    pub fn from_vec(grid: &Grid, active: Vec<bool>) -> Result<Self> {
        if active.len() != grid.len() {
            return Err(Error::invalid("mask length does not match grid"));
        }
        Ok(DomainMask {
            grid: *grid,
            active,
        })
    }

    /// Open ball `B_R(centre)`.
    pub fn ball(grid: &Grid, centre: &[f64], radius: f64) -> Self {
        Self::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(centre).map(|(a, c)| (a - c).powi(2)).sum();
            r2 < radius * radius
        })
    }

    /// Box minus the closed ball `B̄_ρ(0)`.
    pub fn exterior(grid: &Grid, rho: f64) -> Self {
        Self::from_fn(grid, |x| x.iter().map(|a| a * a).sum::<f64>() > rho * rho)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_subset_of(&self, other: &DomainMask) -> bool {
        self.active
            .iter()
            .zip(&other.active)
            .all(|(&a, &b)| !a || b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-9,
            max_iter: 20_000,
            inner_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm, zero off-mask, nonnegative.
    pub vector: ScalarField,
    pub iterations: usize,
    pub residual: f64,
}

fn masked_operator(sigma: &ScalarField, mask: &DomainMask, shift: f64) -> ShiftedLaplacian {
    let s = sigma.values().iter().map(|v| v + shift).collect();
    ShiftedLaplacian::masked(mask.grid(), s, mask.active().to_vec())
}

fn active_min(sigma: &ScalarField, mask: &DomainMask) -> f64 {
    sigma
        .values()
        .iter()
        .zip(mask.active())
        .filter(|(_, &a)| a)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Inner CG tolerance no tighter than the attainable relative residual of the
/// shifted masked operator, `ε κ` with `κ` bounded by Gershgorin above and the
/// full-box Dirichlet eigenvalue below.
fn attainable_tol(sigma: &ScalarField, mask: &DomainMask, shift: f64, requested: f64) -> f64 {
    let grid = mask.grid();
    let h = grid.spacing();
    let d = grid.dim() as f64;
    let smax = sigma
        .values()
        .iter()
        .zip(mask.active())
        .filter(|(_, &a)| a)
        .map(|(&v, _)| v + shift)
        .fold(0.0, f64::max);
    let upper = 4.0 * d / (h * h) + smax;
    let lower = d * 4.0 / (h * h)
        * (std::f64::consts::PI * h / (4.0 * grid.half_width()))
            .sin()
            .powi(2);
    requested.max(4.0 * f64::EPSILON * upper / lower)
}

/// Smallest eigenvalue of `-Δ_h + diag(σ)` on the active nodes, by
/// shift-and-invert power iteration. The shift makes the inverted operator
/// SPD; the returned value is the Rayleigh quotient of the returned vector.
pub fn lambda1_pair(
    sigma: &ScalarField,
    mask: &DomainMask,
    opts: EigenOptions,
) -> Result<EigenPair> {
    if sigma.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    if mask.is_empty() {
        return Err(Error::invalid("lambda1 on an empty mask"));
    }
    let grid = mask.grid();
    let shift = (-active_min(sigma, mask)).max(0.0);
    let op = masked_operator(sigma, mask, 0.0);
    let shifted = masked_operator(sigma, mask, shift);
    let inner = attainable_tol(sigma, mask, shift, opts.inner_tol);
    let cg_opts = CgOptions::new(inner, 20 * grid.len() + 100);

    let mut x: Vec<f64> = mask
        .active()
        .iter()
        .map(|&a| if a { 1.0 } else { 0.0 })
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut mx = vec![0.0; x.len()];
    let mut residual = f64::INFINITY;
    let mut value = f64::NAN;
    for it in 1..=opts.max_iter {
        let (y, _) = cg(&shifted, &x, cg_opts).map_err(|e| e.context("lambda1 inverse step"))?;
        let ny = norm2(&y);
        x = y.into_iter().map(|v| v / ny).collect();
        op.apply(&x, &mut mx)?;
        value = dot(&x, &mx);
        residual = mx
            .iter()
            .zip(&x)
            .map(|(m, v)| (m - value * v).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol * value.abs().max(1.0) {
            // ground state is one-signed; fix the sign for reproducible output
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(EigenPair {
                value,
                vector: ScalarField::from_vec_unchecked(grid, x),
                iterations: it,
                residual,
            });
        }
    }
    let _ = value;
    Err(Error::NotConverged {
        context: "lambda1 power iteration".into(),
        iterations: opts.max_iter,
        residual,
    })
}

pub fn lambda1(sigma: &ScalarField, mask: &DomainMask) -> Result<f64> {
    Ok(lambda1_pair(sigma, mask, EigenOptions::default())?.value)
}

/// Largest admissible `L_s` exponent: `2* = 2d/(d-2)` for `d = 3`, unbounded
/// (formal) below.
pub fn critical_exponent(dim: usize) -> f64 {
    if dim > 2 {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub inner_tol: f64,
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            restarts: 4,
            seed: 0x5eed,
            max_iter: 3000,
            tol: 1e-9,
            inner_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NuResult {
    /// `+∞` for an empty mask.
    pub value: f64,
    pub minimizer: Option<ScalarField>,
    /// Final quotient of every restart, in restart order.
    pub restart_values: Vec<f64>,
    /// The best restart hit the iteration cap before its residual test.
    pub stagnated: bool,
    pub formal: bool,
}

/// `(∫|∇u|² + σu²) / ‖u‖²_{L_s}` restricted to the mask.
pub fn nu_quotient(sigma: &ScalarField, mask: &DomainMask, s: f64, u: &ScalarField) -> Result<f64> {
    let grid = mask.grid();
    let op = masked_operator(sigma, mask, 0.0);
    let um: Vec<f64> = u
        .values()
        .iter()
        .zip(mask.active())
        .map(|(&v, &a)| if a { v } else { 0.0 })
        .collect();
    let mut mu = vec![0.0; um.len()];
    op.apply(&um, &mut mu)?;
    let w = grid.quad_weight();
    let num = w * dot(&um, &mu);
    let ls = (w * um.iter().map(|v| v.abs().powf(s)).sum::<f64>()).powf(1.0 / s);
    if ls == 0.0 {
        return Err(Error::invalid("quotient of the zero field"));
    }
    Ok(num / (ls * ls))
}

struct Descent {
    value: f64,
    u: Vec<f64>,
    converged: bool,
}

fn ls_normalize(u: &mut [f64], s: f64, w: f64) {
    let ls = (w * u.iter().map(|v| v.abs().powf(s)).sum::<f64>()).powf(1.0 / s);
    u.iter_mut().for_each(|v| *v /= ls);
}

/// Preconditioned projected descent on the `L_s` sphere. The preconditioner
/// is `(-Δ_h + σ + c)^{-1}`; a unit step is nonlinear inverse iteration and
/// reduces to shift-and-invert power iteration at `s = 2`.
fn nu_descent(
    op: &ShiftedLaplacian,
    shifted: &ShiftedLaplacian,
    shift: f64,
    s: f64,
    w: f64,
    start: Vec<f64>,
    opts: &NuOptions,
) -> Result<Descent> {
    let n = start.len();
    let cg_opts = CgOptions::new(opts.inner_tol, 20 * n + 100);
    let mut u = start;
    ls_normalize(&mut u, s, w);
    let mut mu = vec![0.0; n];
    op.apply(&u, &mut mu)?;
    let mut q = w * dot(&u, &mu);
    let mut tau: f64 = 1.0;
    for _ in 0..opts.max_iter {
        // residual of the Euler-Lagrange equation on the sphere
        let nl: Vec<f64> = u.iter().map(|v| v.abs().powf(s - 2.0) * v).collect();
        let res: f64 = mu
            .iter()
            .zip(&nl)
            .map(|(m, g)| (m - q * g).powi(2))
            .sum::<f64>()
            .sqrt();
        if res <= opts.tol * norm2(&mu).max(f64::MIN_POSITIVE) {
            return Ok(Descent {
                value: q,
                u,
                converged: true,
            });
        }
        let rhs: Vec<f64> = u.iter().zip(&nl).map(|(v, g)| shift * v + q * g).collect();
        let (z, _) = cg(shifted, &rhs, cg_opts).map_err(|e| e.context("nu_s preconditioner"))?;
        let mut accepted = false;
        let mut t = tau;
        for _ in 0..12 {
            let mut cand: Vec<f64> = u
                .iter()
                .zip(&z)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect();
            ls_normalize(&mut cand, s, w);
            let mut mc = vec![0.0; n];
            op.apply(&cand, &mut mc)?;
            let qc = w * dot(&cand, &mc);
            // q is quadratic in the error: near the minimizer its decrease drops
            // below rounding long before the residual reaches tolerance
            if qc <= q + 8.0 * f64::EPSILON * q.abs() {
                u = cand;
                mu = mc;
                q = qc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease at machine precision
            return Ok(Descent {
                value: q,
                u,
                converged: false,
            });
        }
        tau = (t * 2.0).min(1.0);
    }
    Ok(Descent {
        value: q,
        u,
        converged: false,
    })
}

/// `ν_s(σ, Ω)` by multi-start descent; restart 0 starts from the mask
/// indicator, the others from `|smooth random field|` (taking absolute values
/// never raises the discrete quotient since `-Δ_h` has nonpositive
/// off-diagonals). The best restart, lowest index on ties, is returned.
pub fn nu_s(sigma: &ScalarField, mask: &DomainMask, s: f64, opts: NuOptions) -> Result<NuResult> {
    if sigma.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = mask.grid();
    let crit = critical_exponent(grid.dim());
    if !(s >= 2.0) || s >= crit {
        return Err(Error::invalid(format!(
            "s must lie in [2, {crit}) (got {s})"
        )));
    }
    let formal = grid.is_formal();
    if mask.is_empty() {
        return Ok(NuResult {
            value: f64::INFINITY,
            minimizer: None,
            restart_values: vec![],
            stagnated: false,
            formal,
        });
    }
    let shift = (-active_min(sigma, mask)).max(0.0);
    let op = masked_operator(sigma, mask, 0.0);
    let shifted = masked_operator(sigma, mask, shift);
    let opts = NuOptions {
        inner_tol: attainable_tol(sigma, mask, shift, opts.inner_tol),
        ..opts
    };
    let w = grid.quad_weight();
    let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1))
        .map(|k| {
            let base: Vec<f64> = if k == 0 {
                vec![1.0; grid.len()]
            } else {
                let mut r = random::rng(opts.seed.wrapping_add(k as u64));
                random::smooth_field(grid, &mut r, 4)
                    .values()
                    .iter()
                    .map(|v| v.abs() + 1e-3)
                    .collect()
            };
            base.iter()
                .zip(mask.active())
                .map(|(&v, &a)| if a { v } else { 0.0 })
                .collect()
        })
        .collect();
    let runs = ordered_map(&starts, |_, start| {
        nu_descent(&op, &shifted, shift, s, w, start.clone(), &opts)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.value < runs[b].value { i } else { b });
    let winner = &runs[best];
    let field = ScalarField::from_vec_unchecked(grid, winner.u.clone());
    let value = nu_quotient(sigma, mask, s, &field)?;
    Ok(NuResult {
        value,
        minimizer: Some(field),
        restart_values,
        stagnated: !winner.converged,
        formal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NuEntry {
    /// Ball centre (shifted-ball march) or empty for exterior entries.
    pub centre: Vec<f64>,
    /// Ball radius, or exterior cut-off radius ρ.
    pub radius: f64,
    /// `null` in JSON encodes the `+∞` sentinel of an empty domain.
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub lambda1: f64,
    pub lambda1_positive: bool,
    pub s: f64,
    pub nu_values: Vec<NuEntry>,
    pub nu_trend_increasing: bool,
    pub exterior_values: Vec<NuEntry>,
    pub exterior_trend_increasing: bool,
    pub formal: bool,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn non_decreasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|p| p[1] >= p[0] - 1e-9 * p[0].abs().max(1.0))
}

/// `ν_s` on `B_R(c)` for each centre and on `box ∖ B̄_ρ(0)` for each ρ in
/// the ladder, plus `λ₁(σ)` on the full box.
pub fn shifted_ball_diagnostic(
    sigma: &ScalarField,
    radius: f64,
    centres: &[Vec<f64>],
    ladder: &[f64],
    s: f64,
    opts: NuOptions,
) -> Result<ClassReport> {
    let grid = sigma.grid();
    let l1 = lambda1(sigma, &DomainMask::full(grid))?;
    let mut nu_values = Vec::with_capacity(centres.len());
    for c in centres {
        if c.len() != grid.dim() {
            return Err(Error::invalid("ball centre dimension does not match grid"));
        }
        let mask = DomainMask::ball(grid, c, radius);
        let r = nu_s(sigma, &mask, s, opts)?;
        nu_values.push(NuEntry {
            centre: c.clone(),
            radius,
            nu: finite_or_none(r.value),
        });
    }
    let mut exterior_values = Vec::with_capacity(ladder.len());
    for &rho in ladder {
        let mask = DomainMask::exterior(grid, rho);
        let r = nu_s(sigma, &mask, s, opts)?;
        exterior_values.push(NuEntry {
            centre: vec![],
            radius: rho,
            nu: finite_or_none(r.value),
        });
    }
    let as_vals =
        |v: &[NuEntry]| -> Vec<f64> { v.iter().map(|e| e.nu.unwrap_or(f64::INFINITY)).collect() };
    Ok(ClassReport {
        lambda1: l1,
        lambda1_positive: l1 > CERT_TOL,
        s,
        nu_trend_increasing: non_decreasing(&as_vals(&nu_values)),
        exterior_trend_increasing: non_decreasing(&as_vals(&exterior_values)),
        nu_values,
        exterior_values,
        formal: grid.is_formal(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEnvelope {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub trials: usize,
}

/// `‖u‖²_{σ+} = ∫|∇u|² + ∫ max(σ,0) u²`.
pub fn positive_part_norm(sigma: &ScalarField, u: &ScalarField) -> Result<f64> {
    sigma.check_grid(u)?;
    let g = u.grid();
    let lap = u.neg_laplacian();
    let grad2 = dot(u.values(), lap.values());
    let pot: f64 = sigma
        .values()
        .iter()
        .zip(u.values())
        .map(|(s, v)| s.max(0.0) * v * v)
        .sum();
    Ok((g.quad_weight() * (grad2 + pot)).max(0.0).sqrt())
}

/// Extremes of `‖u‖_{a+} / ‖u‖_{b+}` over random smooth fields.
pub fn norm_equivalence_diagnostic(
    a: &ScalarField,
    b: &ScalarField,
    trials: usize,
    seed: u64,
) -> Result<RatioEnvelope> {
    a.check_grid(b)?;
    let grid = a.grid();
    let mut rng = random::rng(seed);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut done = 0;
    let mut draws = 0;
    while done < trials {
        draws += 1;
        if draws > 100 * trials.max(1) {
            return Err(Error::invalid(
                "random fields keep degenerating to zero norm",
            ));
        }
        let u = random::smooth_field(grid, &mut rng, 4);
        let nb = positive_part_norm(b, &u)?;
        let na = positive_part_norm(a, &u)?;
        if nb <= 1e-300 || na <= 1e-300 {
            continue;
        }
        let r = na / nb;
        min_ratio = min_ratio.min(r);
        max_ratio = max_ratio.max(r);
        done += 1;
    }
    Ok(RatioEnvelope {
        min_ratio,
        max_ratio,
        trials,
    })
}
