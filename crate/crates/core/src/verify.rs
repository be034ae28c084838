//! Certification of computed solutions against the original two-field
//! system, with its own operator applications.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::energy::{EnergyProblem, Metric};
use crate::error::{Error, Result};
use crate::grid::{norm2, ScalarField};
use crate::nonlinearity::NonlinearitySpec;
use crate::solvers::{Endpoint, NewtonReport, TraceEntry};

pub const DEFAULT_TOL_SIGN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Positive,
    Negative,
    SignChanging,
    Zero,
}

/// Thresholds are `tol_sign · max|u|`.
pub fn classify_sign(u: &ScalarField, tol_sign: f64) -> SignClass {
    let tol = tol_sign * u.max_abs().max(f64::MIN_POSITIVE);
    let (lo, hi) = (u.min(), u.max());
    match (lo < -tol, hi > tol) {
        (true, true) => SignClass::SignChanging,
        (false, true) => SignClass::Positive,
        (true, false) => SignClass::Negative,
        (false, false) => SignClass::Zero,
    }
}

/// Dual-norm residuals of
///
/// ```text
/// -Δu + a v = f(x, u)
/// -Δv + b v = β a u
/// ```
pub fn weak_residual(
    coeffs: &CoefficientSet,
    spec: &NonlinearitySpec,
    u: &ScalarField,
    v: &ScalarField,
) -> Result<(f64, f64)> {
    let grid = coeffs.grid();
    if u.grid() != grid || v.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let sw = grid.quad_weight().sqrt();
    let beta = coeffs.beta();
    let a = coeffs.a().values();
    let b = coeffs.b().values();
    let f = spec.f_field(u);

    let mut r1 = vec![0.0; u.len()];
    grid.neg_laplacian_into(u.values(), &mut r1);
    for i in 0..r1.len() {
        r1[i] += a[i] * v.values()[i] - f[i];
    }
    let mut r2 = vec![0.0; u.len()];
    grid.neg_laplacian_into(v.values(), &mut r2);
    for i in 0..r2.len() {
        r2[i] += b[i] * v.values()[i] - beta * a[i] * u.values()[i];
    }
    Ok((sw * norm2(&r1), sw * norm2(&r2)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsReport {
    pub entries: usize,
    pub max_norm: f64,
    /// Smallest `bound − ‖u_n‖_ab` along the trace.
    pub min_slack: f64,
    pub excursions: Vec<usize>,
    pub bounded: bool,
}

/// Bound from the Ambrosetti–Rabinowitz inequality
/// `(μ₀/2 − 1)‖u‖² ≤ μ₀ J(u) − DJ(u)u ≤ μ₀ J⁺ + κ‖u‖`, `κ = |DJ(u)u| / ‖u‖`:
/// `‖u‖ ≤ (κ + sqrt(κ² + 4(μ₀/2 − 1) μ₀ J⁺)) / (2(μ₀/2 − 1))`.
pub fn ps_bound(mu0: f64, level: f64, kappa: f64) -> f64 {
    let c = 0.5 * mu0 - 1.0;
    (kappa + (kappa * kappa + 4.0 * c * mu0 * level.max(0.0)).sqrt()) / (2.0 * c)
}

pub fn ps_proxy(trace: &[TraceEntry], mu0: f64) -> PsReport {
    let mut rep = PsReport {
        entries: trace.len(),
        max_norm: 0.0,
        min_slack: f64::INFINITY,
        excursions: Vec::new(),
        bounded: true,
    };
    for (k, e) in trace.iter().enumerate() {
        let kappa = if e.norm_ab > 0.0 {
            e.dj_u.abs() / e.norm_ab
        } else {
            0.0
        };
        let bound = ps_bound(mu0, e.level, kappa);
        rep.max_norm = rep.max_norm.max(e.norm_ab);
        rep.min_slack = rep.min_slack.min(bound - e.norm_ab);
        if e.norm_ab > bound * (1.0 + 1e-8) + 1e-14 {
            rep.excursions.push(k);
            rep.bounded = false;
        }
    }
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub label: String,
    #[serde(skip)]
    pub u: ScalarField,
    #[serde(skip)]
    pub v: ScalarField,
    pub metric: Metric,
    pub energy: f64,
    pub grad_norm: f64,
    pub norm_ab: f64,
    pub residual_1: f64,
    pub residual_2: f64,
    pub sign_class: SignClass,
    pub sign_class_v: SignClass,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub converged: bool,
    pub collapsed: bool,
    pub warnings: Vec<String>,
    pub rho_estimate: Option<f64>,
    pub initial_path_max: Option<f64>,
    pub descent_level: Option<f64>,
    pub endpoint: Option<Endpoint>,
    pub newton: Option<NewtonReport>,
    pub ps: Option<PsReport>,
    pub trace: Vec<TraceEntry>,
}

/// Report for `u` with `v = S_b u`; residuals from [`weak_residual`].
pub fn build_report(
    prob: &EnergyProblem,
    label: &str,
    u: &ScalarField,
    tol_sign: f64,
) -> Result<SolutionReport> {
    let v = prob.op().apply_sb(u)?;
    let energy = prob.energy(u)?;
    let grad = prob.gradient(u)?;
    let grad_norm = prob.norm(&grad)?;
    let (residual_1, residual_2) = weak_residual(prob.op().coeffs(), prob.spec(), u, &v)?;
    Ok(SolutionReport {
        label: label.to_string(),
        metric: prob.metric(),
        energy,
        grad_norm,
        norm_ab: prob.op().norm_ab(u)?,
        residual_1,
        residual_2,
        sign_class: classify_sign(u, tol_sign),
        sign_class_v: classify_sign(&v, tol_sign),
        min_u: u.min(),
        max_u: u.max(),
        min_v: v.min(),
        max_v: v.max(),
        u: u.clone(),
        v,
        converged: false,
        collapsed: false,
        warnings: Vec::new(),
        rho_estimate: None,
        initial_path_max: None,
        descent_level: None,
        endpoint: None,
        newton: None,
        ps: None,
        trace: Vec::new(),
    })
}

impl SolutionReport {
    pub fn set_trace(&mut self, trace: Vec<TraceEntry>, mu0: f64) {
        self.ps = Some(ps_proxy(&trace, mu0));
        self.trace = trace;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub residual_1: f64,
    pub residual_2: f64,
    pub sign_class_u: SignClass,
    pub sign_class_v: SignClass,
    pub energy: f64,
    pub grad_norm: f64,
    pub metric: Metric,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub ps: Option<PsReport>,
}

/// Independent check of a stored pair `(u, v)`.
pub fn verify_pair(
    prob: &EnergyProblem,
    u: &ScalarField,
    v: &ScalarField,
    tol_sign: f64,
    trace: Option<&[TraceEntry]>,
) -> Result<VerifyReport> {
    let (residual_1, residual_2) = weak_residual(prob.op().coeffs(), prob.spec(), u, v)?;
    let grad = prob.gradient(u)?;
    Ok(VerifyReport {
        residual_1,
        residual_2,
        sign_class_u: classify_sign(u, tol_sign),
        sign_class_v: classify_sign(v, tol_sign),
        energy: prob.energy(u)?,
        grad_norm: prob.norm(&grad)?,
        metric: prob.metric(),
        min_u: u.min(),
        max_u: u.max(),
        min_v: v.min(),
        max_v: v.max(),
        ps: trace.map(|t| ps_proxy(t, prob.spec().mu0())),
    })
}
