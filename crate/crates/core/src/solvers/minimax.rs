//! Minimax by steepest descent at the path maximum.
//!
//! The path is the ray `t ↦ t y` through the current iterate; its maximum
//! is located by sampling and golden-section refinement, which is cheap
//! because `J(t y) = ½ t² ‖y‖²_ab − Ψ(t y)` needs a single nonlocal solve.
//! A descent step moves the maximiser, the ray is rebuilt through the new
//! point, and the step is accepted only if the path maximum drops.

use serde::Serialize;

use crate::energy::EnergyProblem;
use crate::error::{Error, Result};
use crate::grid::{dot, ScalarField};
use crate::random;
use crate::verify::{build_report, classify_sign, SignClass, SolutionReport};

use super::cone::{cone_project, neg_cone_project, ConeOptions};
use super::newton::newton_refine;
use super::{SolverConfig, TraceEntry};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const STAGNATION_SWEEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Free,
    /// Iterates projected onto `u ≥ 0`.
    Cone,
    /// Iterates projected onto `u ≤ 0`.
    NegCone,
}

fn golden_max(h: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = h(x1);
    let mut f2 = h(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1e-300) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = h(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = h(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximiser of `h` on `t > 0`, given `h(0) = 0` and `h → −∞`.
fn maximize_halfline(h: &dyn Fn(f64) -> f64, points: usize) -> Result<(f64, f64)> {
    let m = points.max(3);
    let mut hi = 1.0;
    let mut doublings = 0;
    // push hi past the hump: h(hi) < 0 and decreasing
    while !(h(hi) < 0.0 && h(hi) < h(0.5 * hi)) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NotConverged {
                context: "ray maximum: energy stays nonnegative along the ray".into(),
                iterations: doublings,
                residual: h(hi),
            });
        }
    }
    for _ in 0..60 {
        let ts: Vec<f64> = (0..m).map(|k| hi * k as f64 / (m - 1) as f64).collect();
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| if t == 0.0 { 0.0 } else { h(t) })
            .collect();
        let mut k = 1;
        for j in 2..m {
            if vals[j] > vals[k] {
                k = j;
            }
        }
        if vals[k] <= 0.0 {
            // the hump is narrower than one sample
            hi = ts[2];
            continue;
        }
        let (t, v) = golden_max(h, ts[k - 1], ts[(k + 1).min(m - 1)]);
        return Ok(if v >= vals[k] {
            (t, v)
        } else {
            (ts[k], vals[k])
        });
    }
    Err(Error::NotConverged {
        context: "ray maximum: no positive energy near the origin".into(),
        iterations: 60,
        residual: 0.0,
    })
}

fn psi_scaled(prob: &EnergyProblem, dir: &ScalarField, t: f64) -> f64 {
    let w = prob.grid().quad_weight();
    let g = prob.grid();
    let d = g.dim();
    let spec = prob.spec();
    let s: f64 = dir
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| spec.eval_F(&g.coords(i)[..d], t * v))
        .sum();
    w * s
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RayMax {
    pub t: f64,
    pub level: f64,
    /// `‖y‖²_ab`
    pub q: f64,
}

/// Maximum of `t ↦ J(t y)` over `t > 0`.
pub fn ray_max(prob: &EnergyProblem, dir: &ScalarField, points: usize) -> Result<RayMax> {
    if dir.max_abs() == 0.0 {
        return Err(Error::invalid("ray direction is zero"));
    }
    let q = prob.op().inner_ab(dir, dir)?;
    let h = |t: f64| 0.5 * q * t * t - psi_scaled(prob, dir, t);
    let (t, level) = maximize_halfline(&h, points)?;
    Ok(RayMax { t, level, q })
}

#[derive(Debug, Clone, Serialize)]
pub struct Endpoint {
    #[serde(skip)]
    pub g: ScalarField,
    pub lambda0: f64,
    pub doublings: usize,
    pub level: f64,
    /// `J(g/2)`: the other side of the crossover bracket.
    pub half_level: f64,
}

/// Doubles `λ` until `J(λ u0) < 0`; gives up after 60 doublings.
pub fn find_endpoint_g(
    prob: &EnergyProblem,
    u0: &ScalarField,
    _cfg: &SolverConfig,
) -> Result<Endpoint> {
    if u0.max_abs() == 0.0 {
        return Err(Error::invalid("endpoint search needs a nonzero profile"));
    }
    let q = prob.op().inner_ab(u0, u0)?;
    let j = |l: f64| 0.5 * q * l * l - psi_scaled(prob, u0, l);
    let mut lambda = 1.0;
    for k in 0..=60 {
        let level = j(lambda);
        if level < 0.0 {
            return Ok(Endpoint {
                g: u0.scale(lambda),
                lambda0: lambda,
                doublings: k,
                level,
                half_level: j(0.5 * lambda),
            });
        }
        lambda *= 2.0;
    }
    Err(Error::NotConverged {
        context: "endpoint doubling: J(λ u0) ≥ 0 after 60 doublings; the nonlinearity likely violates the Ambrosetti–Rabinowitz condition".into(),
        iterations: 60,
        residual: j(lambda),
    })
}

fn project(
    prob: &EnergyProblem,
    y: ScalarField,
    c: Constraint,
    warnings: &mut Vec<String>,
) -> Result<ScalarField> {
    let opts = ConeOptions {
        polar_samples: 0,
        ..ConeOptions::default()
    };
    let p = match c {
        Constraint::Free => return Ok(y),
        Constraint::Cone => cone_project(prob.op(), &y, &opts)?,
        Constraint::NegCone => neg_cone_project(prob.op(), &y, &opts)?,
    };
    if !p.converged && warnings.len() < 20 {
        warnings.push(format!(
            "cone projection did not settle after {} sweeps",
            p.sweeps
        ));
    }
    Ok(p.pk)
}

/// Sampled radius of the mountain ring: the smallest `ab`-norm of a ray
/// maximiser over a few directions.
fn rho_estimate(prob: &EnergyProblem, g: &ScalarField, cfg: &SolverConfig) -> Result<f64> {
    let mut rng = random::rng(cfg.seed ^ 0x0123_4567);
    let mut dirs = vec![g.clone()];
    for _ in 0..8 {
        dirs.push(random::smooth_field(prob.grid(), &mut rng, 4));
    }
    let mut rho = f64::INFINITY;
    for d in &dirs {
        if let Ok(r) = ray_max(prob, d, cfg.path_points) {
            rho = rho.min(r.t * r.q.sqrt());
        }
    }
    Ok(rho)
}

fn default_profile(prob: &EnergyProblem) -> ScalarField {
    let g = prob.grid();
    random::gaussian_bump(g, &[0.0; 3][..g.dim()], 0.25 * g.half_width())
}

/// Mountain pass from a centred Gaussian bump.
pub fn mountain_pass(prob: &EnergyProblem, cfg: &SolverConfig) -> Result<SolutionReport> {
    mountain_pass_from(prob, cfg, &default_profile(prob), Constraint::Free)
}

/// Mountain pass along rays through `u0`, with iterates kept in the chosen
/// cone.
pub fn mountain_pass_from(
    prob: &EnergyProblem,
    cfg: &SolverConfig,
    u0: &ScalarField,
    constraint: Constraint,
) -> Result<SolutionReport> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let endpoint = find_endpoint_g(prob, u0, cfg)?;
    let g = endpoint.g.clone();

    // max over the initial straight path t g, t ∈ [0, 1]
    let q = prob.op().inner_ab(&g, &g)?;
    let jl = |t: f64| 0.5 * q * t * t - psi_scaled(prob, &g, t);
    let m = cfg.path_points;
    let mut initial_path_max = 0.0f64;
    let mut kbest = 0;
    for k in 1..m {
        let v = jl(k as f64 / (m - 1) as f64);
        if v > initial_path_max {
            initial_path_max = v;
            kbest = k;
        }
    }
    if kbest > 0 {
        let lo = (kbest - 1) as f64 / (m - 1) as f64;
        let hi = ((kbest + 1).min(m - 1)) as f64 / (m - 1) as f64;
        initial_path_max = initial_path_max.max(golden_max(&jl, lo, hi).1);
    }

    let first = ray_max(prob, &g, cfg.path_points)?;
    let mut u = g.scale(first.t);
    let mut level = first.level;
    let mut step = cfg.descent_step;
    let mut trace = Vec::new();
    let mut last_decrease = 0;
    let mut stagnated = false;

    for sweep in 1..=cfg.max_outer_iters {
        let grad = prob.gradient(&u)?;
        let gn = prob.norm(&grad)?;
        let un = prob.norm(&u)?;
        let norm_ab = prob.op().norm_ab(&u)?;
        let dj_u = prob.directional_derivative(&u, &u)?;
        let entry_level = level;
        if gn <= cfg.newton_switch * un || gn <= cfg.grad_tol {
            trace.push(TraceEntry {
                sweep,
                level,
                grad_norm: gn,
                norm_ab,
                dj_u,
                step: 0.0,
                accepted: true,
            });
            break;
        }
        let y = project(prob, u.sub(&grad.scale(step))?, constraint, &mut warnings)?;
        let mut accepted = false;
        if y.max_abs() > 0.0 {
            if let Ok(r) = ray_max(prob, &y, cfg.path_points) {
                if r.level < level {
                    u = y.scale(r.t);
                    level = r.level;
                    accepted = true;
                }
            }
        }
        trace.push(TraceEntry {
            sweep,
            level: entry_level,
            grad_norm: gn,
            norm_ab,
            dj_u,
            step,
            accepted,
        });
        if accepted {
            last_decrease = sweep;
            step = (2.0 * step).min(1.0);
        } else {
            step *= 0.5;
        }
        if sweep - last_decrease >= STAGNATION_SWEEPS {
            stagnated = true;
            warnings.push(format!(
                "stagnation: path maximum did not decrease over {STAGNATION_SWEEPS} sweeps"
            ));
            break;
        }
    }

    let descent_level = level;
    let (u, newton) = newton_refine(prob, &u, cfg.newton_tol)?;
    if let Some(w) = &newton.warning {
        warnings.push(w.clone());
    }

    let rho = rho_estimate(prob, &g, cfg)?;
    let mut report = build_report(prob, "mountain_pass", &u, cfg.tol_sign)?;
    if report.norm_ab < cfg.rho_fraction * rho {
        warnings.push(format!(
            "collapse: ‖u‖_ab = {:.3e} is below rho_fraction · rho = {:.3e}",
            report.norm_ab,
            cfg.rho_fraction * rho
        ));
        report.collapsed = true;
    }
    if report.energy <= 0.0 {
        warnings.push(format!(
            "critical level {:.6e} is not positive",
            report.energy
        ));
    }
    report.converged = !stagnated
        && !report.collapsed
        && report.energy > 0.0
        && report.grad_norm <= cfg.grad_tol
        && report.sign_class != SignClass::Zero;
    report.rho_estimate = Some(rho);
    report.initial_path_max = Some(initial_path_max);
    report.descent_level = Some(descent_level);
    report.endpoint = Some(endpoint);
    report.newton = Some(newton);
    report.set_trace(trace, prob.spec().mu0());
    report.warnings.extend(warnings);
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NodalMax {
    pub s: f64,
    pub t: f64,
    pub level: f64,
}

/// `max_{s,t>0} J(s u⁺ + t u⁻)`; `None` when `u` is one-signed.
pub fn nodal_max(prob: &EnergyProblem, u: &ScalarField, points: usize) -> Result<Option<NodalMax>> {
    let pos = u.map(|v| v.max(0.0));
    let neg = u.map(|v| v.min(0.0));
    if pos.max_abs() == 0.0 || neg.max_abs() == 0.0 {
        return Ok(None);
    }
    let w = prob.grid().quad_weight();
    let ap = prob.op().apply_reduced(&pos)?;
    let an = prob.op().apply_reduced(&neg)?;
    let pp = w * dot(pos.values(), ap.values());
    let pn = w * dot(neg.values(), ap.values());
    let nn = w * dot(neg.values(), an.values());
    let mut s = 1.0;
    let mut t = 1.0;
    for _ in 0..200 {
        let hs = |x: f64| 0.5 * pp * x * x + x * t * pn - psi_scaled(prob, &pos, x);
        let s_new = match maximize_halfline(&hs, points) {
            Ok((x, _)) => x,
            Err(_) => return Ok(None),
        };
        let ht = |x: f64| 0.5 * nn * x * x + x * s_new * pn - psi_scaled(prob, &neg, x);
        let t_new = match maximize_halfline(&ht, points) {
            Ok((x, _)) => x,
            Err(_) => return Ok(None),
        };
        let done = (s_new - s).abs() <= 1e-12 * s_new && (t_new - t).abs() <= 1e-12 * t_new;
        s = s_new;
        t = t_new;
        if done {
            break;
        }
    }
    let level = 0.5 * (s * s * pp + 2.0 * s * t * pn + t * t * nn)
        - psi_scaled(prob, &pos, s)
        - psi_scaled(prob, &neg, t);
    Ok(Some(NodalMax { s, t, level }))
}

fn nodal_point(u: &ScalarField, m: &NodalMax) -> ScalarField {
    u.map(|v| if v > 0.0 { m.s * v } else { m.t * v })
}

/// Descent on the nodal set from a sign-changing start. Returns the
/// refined iterate, its trace, and whether the descent stagnated.
pub(crate) fn nodal_descent(
    prob: &EnergyProblem,
    cfg: &SolverConfig,
    u0: &ScalarField,
) -> Result<Option<(ScalarField, Vec<TraceEntry>, bool, f64)>> {
    let Some(m0) = nodal_max(prob, u0, cfg.path_points)? else {
        return Ok(None);
    };
    let mut u = nodal_point(u0, &m0);
    let mut level = m0.level;
    let mut step = cfg.descent_step;
    let mut trace = Vec::new();
    let mut last_decrease = 0;
    let mut stagnated = false;
    for sweep in 1..=cfg.max_outer_iters {
        let grad = prob.gradient(&u)?;
        let gn = prob.norm(&grad)?;
        let un = prob.norm(&u)?;
        let norm_ab = prob.op().norm_ab(&u)?;
        let dj_u = prob.directional_derivative(&u, &u)?;
        let entry_level = level;
        if gn <= cfg.newton_switch * un || gn <= cfg.grad_tol {
            trace.push(TraceEntry {
                sweep,
                level,
                grad_norm: gn,
                norm_ab,
                dj_u,
                step: 0.0,
                accepted: true,
            });
            break;
        }
        let y = u.sub(&grad.scale(step))?;
        let mut accepted = false;
        if classify_sign(&y, cfg.tol_sign) == SignClass::SignChanging {
            if let Some(m) = nodal_max(prob, &y, cfg.path_points)? {
                if m.level < level {
                    u = nodal_point(&y, &m);
                    level = m.level;
                    accepted = true;
                }
            }
        }
        trace.push(TraceEntry {
            sweep,
            level: entry_level,
            grad_norm: gn,
            norm_ab,
            dj_u,
            step,
            accepted,
        });
        if accepted {
            last_decrease = sweep;
            step = (2.0 * step).min(1.0);
        } else {
            step *= 0.5;
        }
        if sweep - last_decrease >= STAGNATION_SWEEPS {
            stagnated = true;
            break;
        }
    }
    Ok(Some((u, trace, stagnated, level)))
}
