//! Critical points of the reduced energy: mountain pass, the cone-invariant
//! pair, the sign-changing solution, Newton polish.

pub mod cone;
mod minimax;
mod newton;
mod three;

use serde::{Deserialize, Serialize};

use crate::energy::Metric;
use crate::error::{Error, Result};

pub use cone::{cone_project, neg_cone_project, ConeOptions, MoreauCertificate, Projection};
pub use minimax::{
    find_endpoint_g, mountain_pass, mountain_pass_from, nodal_max, ray_max, Constraint, Endpoint,
    NodalMax, RayMax,
};
pub use newton::{newton_refine, NewtonReport};
pub use three::{disjoint_bumps, three_solutions, ThreeSolutions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Samples per path or ray when bracketing its maximum.
    pub path_points: usize,
    /// Initial descent step, in `(0, 1]`.
    pub descent_step: f64,
    pub max_outer_iters: usize,
    /// Required metric norm of the final gradient.
    pub grad_tol: f64,
    /// Newton stops once the dual residual is below `newton_tol` times the
    /// dual norm of `f(u)`.
    pub newton_tol: f64,
    /// Descent hands over to Newton once `‖g‖ ≤ newton_switch · ‖u‖`.
    pub newton_switch: f64,
    pub rho_fraction: f64,
    pub seed: u64,
    /// Sign-changing restarts.
    pub restarts: usize,
    /// `None`: the star metric when it certifies, else `ab`.
    pub metric: Option<Metric>,
    pub tol_sign: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path_points: 21,
            descent_step: 0.5,
            max_outer_iters: 400,
            grad_tol: 1e-6,
            newton_tol: 1e-9,
            newton_switch: 1e-3,
            rho_fraction: 0.1,
            seed: 0,
            restarts: 5,
            metric: None,
            tol_sign: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| {
            Err(Error::Config {
                path: format!("solver.{path}"),
                message,
            })
        };
        if self.path_points < 3 {
            return bad(
                "path_points",
                format!("must be at least 3, got {}", self.path_points),
            );
        }
        if !(self.descent_step > 0.0 && self.descent_step <= 1.0) {
            return bad(
                "descent_step",
                format!("must lie in (0, 1], got {}", self.descent_step),
            );
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters", "must be positive".into());
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("newton_tol", self.newton_tol),
            ("newton_switch", self.newton_switch),
            ("tol_sign", self.tol_sign),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, format!("must be a positive finite number, got {v}"));
            }
        }
        if !(self.rho_fraction > 0.0 && self.rho_fraction < 1.0) {
            return bad(
                "rho_fraction",
                format!("must lie in (0, 1), got {}", self.rho_fraction),
            );
        }
        if self.restarts == 0 {
            return bad("restarts", "must be positive".into());
        }
        Ok(())
    }
}

/// One descent sweep. `level` is the current path (ray) maximum after the
/// sweep; `dj_u = DJ(u)u` feeds the Palais–Smale proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub sweep: usize,
    pub level: f64,
    pub grad_norm: f64,
    pub norm_ab: f64,
    pub dj_u: f64,
    pub step: f64,
    pub accepted: bool,
}
