//! Nonlinearities `f(x, u)`, their sampled hypothesis checks, and the
//! exponent set `P_{α,N}`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::random;

/// Pointwise kernel `f`, its antiderivative `F` (with `F(x, 0) = 0`) and
/// `∂_u f`.
pub trait Kernel: Send + Sync {
    fn f(&self, x: &[f64], u: f64) -> f64;
    fn antiderivative(&self, x: &[f64], u: f64) -> f64;
    fn derivative(&self, x: &[f64], u: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
struct Power {
    p: f64,
}

impl Kernel for Power {
    fn f(&self, _: &[f64], u: f64) -> f64 {
        u.abs().powf(self.p - 1.0) * u
    }
    fn antiderivative(&self, _: &[f64], u: f64) -> f64 {
        u.abs().powf(self.p + 1.0) / (self.p + 1.0)
    }
    fn derivative(&self, _: &[f64], u: f64) -> f64 {
        self.p * u.abs().powf(self.p - 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Linear;

impl Kernel for Linear {
    fn f(&self, _: &[f64], u: f64) -> f64 {
        u
    }
    fn antiderivative(&self, _: &[f64], u: f64) -> f64 {
        0.5 * u * u
    }
    fn derivative(&self, _: &[f64], _: f64) -> f64 {
        1.0
    }
}

/// `|u|^{p-1} u - u`
#[derive(Debug, Clone, Copy)]
struct ShiftedPower {
    p: f64,
}

impl Kernel for ShiftedPower {
    fn f(&self, _: &[f64], u: f64) -> f64 {
        u.abs().powf(self.p - 1.0) * u - u
    }
    fn antiderivative(&self, _: &[f64], u: f64) -> f64 {
        u.abs().powf(self.p + 1.0) / (self.p + 1.0) - 0.5 * u * u
    }
    fn derivative(&self, _: &[f64], u: f64) -> f64 {
        self.p * u.abs().powf(self.p - 1.0) - 1.0
    }
}

struct Custom<F, G, H> {
    f: F,
    big_f: G,
    fu: H,
}

impl<F, G, H> Kernel for Custom<F, G, H>
where
    F: Fn(&[f64], f64) -> f64 + Send + Sync,
    G: Fn(&[f64], f64) -> f64 + Send + Sync,
    H: Fn(&[f64], f64) -> f64 + Send + Sync,
{
    fn f(&self, x: &[f64], u: f64) -> f64 {
        (self.f)(x, u)
    }
    fn antiderivative(&self, x: &[f64], u: f64) -> f64 {
        (self.big_f)(x, u)
    }
    fn derivative(&self, x: &[f64], u: f64) -> f64 {
        (self.fu)(x, u)
    }
}

/// Constants accompanying a kernel. They are user claims; the
/// validators test them, nothing infers them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthConstants {
    pub p: f64,
    pub alpha: f64,
    pub mu0: f64,
    pub c0: f64,
}

#[derive(Clone)]
pub struct NonlinearitySpec {
    name: String,
    kernel: Arc<dyn Kernel>,
    consts: GrowthConstants,
    phi: Option<ScalarField>,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("name", &self.name)
            .field("consts", &self.consts)
            .field("phi", &self.phi.is_some())
            .finish()
    }
}

impl NonlinearitySpec {
    pub fn new(
        name: impl Into<String>,
        kernel: Arc<dyn Kernel>,
        consts: GrowthConstants,
    ) -> Result<Self> {
        let GrowthConstants { p, alpha, mu0, c0 } = consts;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!(
                "p must be a finite number > 1, got {p}"
            )));
        }
        if !(alpha > 2.0) {
            return Err(Error::invalid(format!("alpha must exceed 2, got {alpha}")));
        }
        if !(mu0 > 2.0 && mu0.is_finite()) {
            return Err(Error::invalid(format!(
                "mu0 must be a finite number > 2, got {mu0}"
            )));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::invalid(format!("C0 must be positive, got {c0}")));
        }
        Ok(NonlinearitySpec {
            name: name.into(),
            kernel,
            consts,
            phi: None,
        })
    }

    /// Library-only entry point for user nonlinearities.
    pub fn custom<F, G, H>(
        name: &str,
        f: F,
        big_f: G,
        fu: H,
        consts: GrowthConstants,
    ) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        H: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, Arc::new(Custom { f, big_f, fu }), consts)
    }

    /// Nonnegative weight `φ` of the growth bound; absent means `φ ≡ 0`.
    pub fn with_phi(mut self, phi: ScalarField) -> Result<Self> {
        if phi.min() < 0.0 {
            return Err(Error::invalid("phi must be nonnegative"));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> GrowthConstants {
        self.consts
    }

    pub fn p(&self) -> f64 {
        self.consts.p
    }

    pub fn alpha(&self) -> f64 {
        self.consts.alpha
    }

    pub fn mu0(&self) -> f64 {
        self.consts.mu0
    }

    pub fn c0(&self) -> f64 {
        self.consts.c0
    }

    pub fn phi(&self) -> Option<&ScalarField> {
        self.phi.as_ref()
    }

    pub fn eval_f(&self, x: &[f64], u: f64) -> f64 {
        self.kernel.f(x, u)
    }

    #[allow(non_snake_case)]
    pub fn eval_F(&self, x: &[f64], u: f64) -> f64 {
        self.kernel.antiderivative(x, u)
    }

    pub fn eval_fu(&self, x: &[f64], u: f64) -> f64 {
        self.kernel.derivative(x, u)
    }

    fn nodal(&self, u: &ScalarField, k: impl Fn(&[f64], f64) -> f64) -> Vec<f64> {
        let g = u.grid();
        let d = g.dim();
        u.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| k(&g.coords(i)[..d], v))
            .collect()
    }

    /// `f(x_i, u_i)` at every node.
    pub fn f_field(&self, u: &ScalarField) -> Vec<f64> {
        self.nodal(u, |x, v| self.kernel.f(x, v))
    }

    #[allow(non_snake_case)]
    pub fn F_field(&self, u: &ScalarField) -> Vec<f64> {
        self.nodal(u, |x, v| self.kernel.antiderivative(x, v))
    }

    pub fn fu_field(&self, u: &ScalarField) -> Vec<f64> {
        self.nodal(u, |x, v| self.kernel.derivative(x, v))
    }
}

/// `f(u) = |u|^{p-1} u`, `μ₀ = p + 1`, `C₀ = p`, `φ ≡ 0`. In dimension 3 `p`
/// must be subcritical (`p < 5`) and `α = α_(3,p)`; in the formal
/// dimensions 1 and 2 any `p > 1` is accepted and `α = 3`.
pub fn power_nonlinearity(p: f64, dim: usize) -> Result<NonlinearitySpec> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "p must be a finite number > 1, got {p}"
        )));
    }
    let alpha = match dim {
        1 | 2 => 3.0,
        3 => {
            let crit = critical_power(3);
            if p >= crit {
                return Err(Error::invalid(format!(
                    "supercritical exponent: p = {p} must be below 2*-1 = {crit} in dimension 3"
                )));
            }
            alpha_for_p(3, p)?
        }
        _ => {
            return Err(Error::invalid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )))
        }
    };
    NonlinearitySpec::new(
        format!("power(p={p})"),
        Arc::new(Power { p }),
        GrowthConstants {
            p,
            alpha,
            mu0: p + 1.0,
            c0: p,
        },
    )
}

/// `f(u) = u` with a claimed `μ₀`. Violates the Ambrosetti–Rabinowitz
/// condition for every `μ₀ > 2`.
pub fn linear_nonlinearity(mu0: f64) -> Result<NonlinearitySpec> {
    NonlinearitySpec::new(
        "linear",
        Arc::new(Linear),
        GrowthConstants {
            p: 2.0,
            alpha: 3.0,
            mu0,
            c0: 1.0,
        },
    )
}

/// `f(u) = |u|^{p-1} u - u`; decreasing near `u = 0`.
pub fn shifted_power_nonlinearity(p: f64) -> Result<NonlinearitySpec> {
    NonlinearitySpec::new(
        format!("shifted_power(p={p})"),
        Arc::new(ShiftedPower { p }),
        GrowthConstants {
            p,
            alpha: 3.0,
            mu0: p + 1.0,
            c0: p + 1.0,
        },
    )
}

/// `2* - 1 = (N+2)/(N-2)`; infinite for `N ≤ 2`.
pub fn critical_power(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        (n as f64 + 2.0) / (n as f64 - 2.0)
    }
}

fn check_alpha_n(alpha: f64, n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "the exponent set needs N >= 3, got {n}"
        )));
    }
    let lo = 2.0_f64.max(n as f64 / 2.0);
    if !(alpha > lo) {
        return Err(Error::invalid(format!(
            "alpha must exceed max(2, N/2) = {lo}, got {alpha}"
        )));
    }
    Ok(())
}

/// Endpoints `(1+2/N, left, right)` of the two intervals.
pub fn exponent_set_endpoints(alpha: f64, n: usize) -> Result<(f64, f64, f64)> {
    check_alpha_n(alpha, n)?;
    let nf = n as f64;
    let first = 1.0 + 2.0 / nf;
    let left = (nf - 4.0 / alpha) / (nf - 2.0);
    let right = (nf - 4.0 / alpha + 2.0) / (nf - 2.0);
    Ok((first, left, right))
}

// Endpoints are rounded results, so points within a few ulps of one are
// taken to sit on it (11/3 must fall outside `[.., 11/3)`).
const ENDPOINT_EPS: f64 = 4.0 * f64::EPSILON;

fn below(p: f64, end: f64) -> bool {
    p < end - ENDPOINT_EPS * end.abs()
}

fn at_most(p: f64, end: f64) -> bool {
    p <= end + ENDPOINT_EPS * end.abs()
}

/// `p ∈ (1, 1+2/N] ∪ [(N-4/α)/(N-2), (N-4/α+2)/(N-2))`.
pub fn exponent_set_contains(alpha: f64, n: usize, p: f64) -> Result<bool> {
    let (first, left, right) = exponent_set_endpoints(alpha, n)?;
    let in_first = !at_most(p, 1.0) && at_most(p, first);
    let in_second = !below(p, left) && below(p, right);
    Ok(in_first || in_second)
}

/// For `α ≤ N` the two intervals overlap and the set is `(1, right)`.
pub fn merged_interval_contains(alpha: f64, n: usize, p: f64) -> Result<bool> {
    let (_, _, right) = exponent_set_endpoints(alpha, n)?;
    if alpha > n as f64 {
        return Err(Error::invalid(format!(
            "the intervals only merge for alpha <= N; got alpha = {alpha}, N = {n}"
        )));
    }
    Ok(!at_most(p, 1.0) && below(p, right))
}

/// An `α` with `p ∈ P_{α,N}`: `N` below `(N+2-4/N)/(N-2)`, then
/// `4 / (-(N-2)p + N + 2 - 2/N)`, which is at least `2N`. That expression
/// blows up at `p = (N+2-2/N)/(N-2) < 2*-1`; from there on
/// `max(2N, 8 / (N+2-(N-2)p))` is used, which keeps `p` inside the second
/// interval up to the critical exponent.
pub fn alpha_for_p(n: usize, p: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("alpha_for_p needs N >= 3, got {n}")));
    }
    if !(p > 1.0) {
        return Err(Error::invalid(format!("p must exceed 1, got {p}")));
    }
    let crit = critical_power(n);
    if p >= crit {
        return Err(Error::invalid(format!(
            "supercritical exponent: p = {p} is not below 2*-1 = {crit}"
        )));
    }
    let nf = n as f64;
    let threshold = (nf + 2.0 - 4.0 / nf) / (nf - 2.0);
    if p < threshold {
        return Ok(nf);
    }
    // scaled by N so integer data stay exact (α(3, 4) = 12)
    let denom = nf * (nf + 2.0) - nf * (nf - 2.0) * p - 2.0;
    if denom > 0.0 {
        let alpha = (4.0 * nf / denom).max(2.0 * nf);
        if alpha.is_finite() && exponent_set_contains(alpha, n, p)? {
            return Ok(alpha);
        }
    }
    Ok((2.0 * nf).max(8.0 / (nf + 2.0 - (nf - 2.0) * p)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub u: f64,
    pub v: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// First failing sample, or `None` when all passed.
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl HypothesisCheck {
    fn new(name: &str) -> Self {
        HypothesisCheck {
            name: name.to_string(),
            passed: true,
            samples: 0,
            witness: None,
            note: None,
        }
    }

    fn record(&mut self, ok: bool, w: impl FnOnce() -> Witness) {
        self.samples += 1;
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(w());
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub nonlinearity: String,
    pub constants: GrowthConstants,
    pub checks: Vec<HypothesisCheck>,
    /// Worst relative mismatch of a central difference of `F` against `f`.
    pub antiderivative_error: f64,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `±10^k` for `k` evenly spaced in `[-6, 3]`, ascending.
pub fn u_ladder(per_sign: usize) -> Vec<f64> {
    let per_sign = per_sign.max(2);
    let pos: Vec<f64> = (0..per_sign)
        .map(|k| 10f64.powf(-6.0 + 9.0 * k as f64 / (per_sign - 1) as f64))
        .collect();
    let mut out: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    out.extend(pos);
    out
}

/// Central-difference check of `∂_u F = f`, relative to `max(1, |f|)`.
pub fn antiderivative_error(
    spec: &NonlinearitySpec,
    grid: &Grid,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = random::rng(seed);
    let d = grid.dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = grid.coords(rng.random_range(0..grid.len()));
        let u: f64 = rng.random_range(-3.0..3.0);
        let delta = 1e-5 * u.abs().max(1.0);
        let fd =
            (spec.eval_F(&x[..d], u + delta) - spec.eval_F(&x[..d], u - delta)) / (2.0 * delta);
        let f = spec.eval_f(&x[..d], u);
        worst = worst.max((fd - f).abs() / f.abs().max(1.0));
    }
    worst
}

/// Sampled checks of the measurability/finiteness, growth, `f(x,0) = 0`,
/// Ambrosetti–Rabinowitz and monotonicity hypotheses.
pub fn validate_hypotheses(
    spec: &NonlinearitySpec,
    grid: &Grid,
    samples: usize,
    seed: u64,
) -> HypothesisReport {
    let mut rng = random::rng(seed);
    let d = grid.dim();
    let samples = samples.max(1);
    let ladder = u_ladder(61);
    let nodes: Vec<usize> = (0..samples)
        .map(|_| rng.random_range(0..grid.len()))
        .collect();
    let GrowthConstants { p, alpha, mu0, c0 } = spec.constants();
    let phi_at = |i: usize| spec.phi().map_or(0.0, |phi| phi.values()[i]);
    let rel = 1e-12;

    let mut h1 = HypothesisCheck::new("h1");
    h1.note = Some(
        "finiteness of f at sampled (x, u); measurability itself is not decidable by sampling"
            .into(),
    );
    let mut h2 = HypothesisCheck::new("h2");
    let mut h2p = HypothesisCheck::new("h2_prime");
    let mut h3 = HypothesisCheck::new("h3");
    let mut h4 = HypothesisCheck::new("h4");
    let mut h5 = HypothesisCheck::new("h5");

    if d >= 3 {
        match exponent_set_contains(alpha, d, p) {
            Ok(true) => {}
            Ok(false) => {
                h2.passed = false;
                h2.note = Some(format!("p = {p} is not in P_(alpha={alpha}, N={d})"));
            }
            Err(e) => {
                h2.passed = false;
                h2.note = Some(e.to_string());
            }
        }
        if p >= critical_power(d) {
            h2p.passed = false;
            h2p.note = Some(format!("p = {p} is not below 2*-1"));
        }
    } else {
        h2.note = Some("formal dimension: exponent-set membership not applicable".into());
    }

    for &i in &nodes {
        let xa = grid.coords(i);
        let x = &xa[..d];
        let wit = |u: f64, v: Option<f64>, lhs: f64, rhs: f64| Witness {
            x: x.to_vec(),
            u,
            v,
            lhs,
            rhs,
        };

        let f0 = spec.eval_f(x, 0.0);
        h3.record(f0 == 0.0, || wit(0.0, None, f0, 0.0));

        for &u in &ladder {
            let f = spec.eval_f(x, u);
            h1.record(f.is_finite(), || wit(u, None, f, 0.0));
            let big_f = spec.eval_F(x, u);
            let lhs = mu0 * big_f;
            let rhs = u * f;
            let ok = lhs > 0.0 && lhs <= rhs + rel * rhs.abs();
            h4.record(ok, || wit(u, None, lhs, rhs));
        }
        for pair in ladder.windows(2) {
            let (fa, fb) = (spec.eval_f(x, pair[0]), spec.eval_f(x, pair[1]));
            h5.record(fb >= fa, || wit(pair[0], Some(pair[1]), fa, fb));
        }

        let weight = 1.0 + phi_at(i).powf(1.0 / alpha);
        for _ in 0..8 {
            let u = ladder[rng.random_range(0..ladder.len())] * rng.random_range(0.5..1.5);
            let v = ladder[rng.random_range(0..ladder.len())] * rng.random_range(0.5..1.5);
            let lhs = (spec.eval_f(x, u) - spec.eval_f(x, v)).abs();
            let poly = 1.0 + u.abs().powf(p - 1.0) + v.abs().powf(p - 1.0);
            let rhs2 = c0 * weight * poly * (u - v).abs();
            let rhs2p = c0 * poly * (u - v).abs();
            h2.record(lhs <= rhs2 * (1.0 + rel), || wit(u, Some(v), lhs, rhs2));
            h2p.record(lhs <= rhs2p * (1.0 + rel), || wit(u, Some(v), lhs, rhs2p));
        }
    }

    HypothesisReport {
        nonlinearity: spec.name().to_string(),
        constants: spec.constants(),
        checks: vec![h1, h2, h2p, h3, h4, h5],
        antiderivative_error: antiderivative_error(spec, grid, 1000, seed ^ 0x9e37_79b9),
    }
}
