//! Positive, negative and sign-changing solutions.

use serde::Serialize;

use crate::energy::{EnergyProblem, Metric};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::random;
use crate::verify::{build_report, SignClass, SolutionReport};

use super::minimax::{mountain_pass_from, nodal_descent, Constraint};
use super::newton::newton_refine;
use super::SolverConfig;

#[derive(Debug, Clone, Serialize)]
pub struct PathCheck {
    pub lambda0: f64,
    /// Largest `J(h(t))` over the sampled `t`; negative when the path lies
    /// in the negative sublevel set.
    pub max_level: f64,
    pub doublings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignChangingAttempt {
    pub restart: usize,
    pub angle: f64,
    pub path: Option<PathCheck>,
    pub outcome: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeSolutions {
    pub positive: SolutionReport,
    pub negative: SolutionReport,
    /// `None` when every restart collapsed to a one-signed iterate.
    pub sign_changing: Option<SolutionReport>,
    pub attempts: Vec<SignChangingAttempt>,
}

/// Gaussians clipped at `1e-12`, centred at `±(L/2)(cos θ, sin θ, 0)`, width
/// chosen so the supports stay at least `4h` apart. Returns `(w₁ ≥ 0, w₂ ≤ 0)`.
pub fn disjoint_bumps(grid: &crate::grid::Grid, angle: f64) -> (ScalarField, ScalarField) {
    let l = grid.half_width();
    let h = grid.spacing();
    let d = grid.dim();
    // exp(-r²/2σ²) ≥ 1e-12  ⇔  r ≤ σ √(24 ln 10)
    let reach = (24.0 * std::f64::consts::LN_10).sqrt();
    let sigma = ((0.5 * l - 2.0 * h) / reach).max(0.5 * h);
    let mut dir = [0.0; 3];
    if d == 1 {
        dir[0] = if angle.cos() >= 0.0 { 1.0 } else { -1.0 };
    } else {
        dir[0] = angle.cos();
        dir[1] = angle.sin();
    }
    let c1: Vec<f64> = dir[..d].iter().map(|v| 0.5 * l * v).collect();
    let c2: Vec<f64> = c1.iter().map(|v| -v).collect();
    // on coarse grids σ sits at its floor and the tails would cross, so clip by radius too
    let radius = 0.5 * l - 2.0 * h;
    let clip = |c: &[f64]| {
        let mut w = random::gaussian_bump(grid, c, sigma);
        for (i, v) in w.values_mut().iter_mut().enumerate() {
            let x = grid.coords(i);
            let r2: f64 = (0..d).map(|k| (x[k] - c[k]).powi(2)).sum();
            if *v < 1e-12 || r2 > radius * radius {
                *v = 0.0;
            }
        }
        w
    };
    (clip(&c1), clip(&c2).scale(-1.0))
}

/// Scale `λ₀` with `J(λ₀(t w₁ + (1−t) w₂)) < 0` at every sampled `t`.
fn negative_path(
    prob: &EnergyProblem,
    w1: &ScalarField,
    w2: &ScalarField,
    points: usize,
) -> Result<PathCheck> {
    let ts: Vec<f64> = (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .collect();
    let path: Vec<ScalarField> = ts
        .iter()
        .map(|&t| w1.scale(t).add(&w2.scale(1.0 - t)))
        .collect::<Result<_>>()?;
    let mut lambda = 1.0;
    for k in 0..=60 {
        let mut worst = f64::NEG_INFINITY;
        for p in &path {
            worst = worst.max(prob.energy_ab(&p.scale(lambda))?);
        }
        if worst < 0.0 {
            return Ok(PathCheck {
                lambda0: lambda,
                max_level: worst,
                doublings: k,
            });
        }
        lambda *= 2.0;
    }
    Err(Error::NotConverged {
        context: "negative path: J stays nonnegative somewhere on the bump path".into(),
        iterations: 60,
        residual: 0.0,
    })
}

/// The cone-invariant pair and a sign-changing solution. Requires the star
/// certificate (`a > 0`, `e ≥ 0`, `λ₁(d) > 0`) before any iteration.
pub fn three_solutions(prob: &EnergyProblem, cfg: &SolverConfig) -> Result<ThreeSolutions> {
    cfg.validate()?;
    prob.op().certify_star()?;
    let star = if prob.metric() == Metric::AbStar {
        prob.clone()
    } else {
        EnergyProblem::new(prob.op().clone(), prob.spec().clone(), Metric::AbStar)?
    };
    let grid = *star.grid();
    let bump = random::gaussian_bump(&grid, &[0.0; 3][..grid.dim()], 0.25 * grid.half_width());

    let mut positive = mountain_pass_from(&star, cfg, &bump, Constraint::Cone)?;
    positive.label = "u1".into();
    if positive.sign_class != SignClass::Positive {
        positive.converged = false;
        positive.warnings.push("u1 is not positive".into());
    }
    let mut negative = mountain_pass_from(&star, cfg, &bump.scale(-1.0), Constraint::NegCone)?;
    negative.label = "u2".into();
    if negative.sign_class != SignClass::Negative {
        negative.converged = false;
        negative.warnings.push("u2 is not negative".into());
    }

    let mut attempts = Vec::new();
    let mut sign_changing = None;
    for k in 0..cfg.restarts {
        let angle = k as f64 * std::f64::consts::PI / cfg.restarts as f64;
        let (w1, w2) = disjoint_bumps(&grid, angle);
        let path = match negative_path(&star, &w1, &w2, cfg.path_points) {
            Ok(p) => p,
            Err(e) => {
                attempts.push(SignChangingAttempt {
                    restart: k,
                    angle,
                    path: None,
                    outcome: e.to_string(),
                });
                continue;
            }
        };
        let start = w1.add(&w2)?.scale(0.5 * path.lambda0);
        let descent = nodal_descent(&star, cfg, &start)?;
        let Some((u, trace, stagnated, level)) = descent else {
            attempts.push(SignChangingAttempt {
                restart: k,
                angle,
                path: Some(path),
                outcome: "start is one-signed".into(),
            });
            continue;
        };
        let (u, newton) = newton_refine(&star, &u, cfg.newton_tol)?;
        let mut rep = build_report(&star, "u3", &u, cfg.tol_sign)?;
        if rep.sign_class != SignClass::SignChanging {
            attempts.push(SignChangingAttempt {
                restart: k,
                angle,
                path: Some(path),
                outcome: format!("rejected: converged iterate is {:?}", rep.sign_class),
            });
            continue;
        }
        if stagnated {
            rep.warnings
                .push("nodal descent stagnated before Newton".into());
        }
        if let Some(w) = &newton.warning {
            rep.warnings.push(w.clone());
        }
        rep.converged = rep.grad_norm <= cfg.grad_tol && rep.energy > 0.0;
        rep.descent_level = Some(level);
        rep.newton = Some(newton);
        rep.set_trace(trace, star.spec().mu0());
        attempts.push(SignChangingAttempt {
            restart: k,
            angle,
            path: Some(path),
            outcome: "sign-changing".into(),
        });
        sign_changing = Some(rep);
        break;
    }

    Ok(ThreeSolutions {
        positive,
        negative,
        sign_changing,
        attempts,
    })
}
