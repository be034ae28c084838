//! Metric projection onto the nonnegative cone in the star product,
//! `P_K u = argmin_{v ≥ 0} ‖u − v‖*`, and its polar complement.
//!
//! Primal-dual active set: with `M = -Δ_h + a S_b + e`, the optimality system
//! is `M(v − u) = λ`, `λ ≥ 0`, `v ≥ 0`, `λ·v = 0`. Each sweep fixes `v = 0`
//! on the active set and solves `M_II v_I = (M u)_I` by CG on the rest.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dot, ScalarField};
use crate::linalg::{cg, CgOptions, FnOperator};
use crate::nonlocal::ReducedOperator;
use crate::random;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub cg_tol: f64,
    /// Nonnegative test fields for the sampled polar-membership clause.
    pub polar_samples: usize,
    pub seed: u64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            tol: 1e-8,
            max_sweeps: 200,
            cg_tol: 1e-12,
            polar_samples: 4,
            seed: 0xc0de,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MoreauCertificate {
    /// `min(v) / max|u|`
    pub min_rel: f64,
    /// `|⟨u − v, v⟩*| / ‖u‖*²`
    pub orthogonality_rel: f64,
    /// `max_i (M(u − v))_i⁺ / max_i |(M u)_i|`: the nodal polar clause.
    pub polar_nodal_rel: f64,
    /// `max ⟨u − v, w⟩* / (‖u‖* ‖w‖*)` over sampled `w ≥ 0`.
    pub polar_sampled_rel: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    #[serde(skip)]
    pub pk: ScalarField,
    /// `u − P_K u`, the projection onto the polar cone.
    #[serde(skip)]
    pub polar: ScalarField,
    pub sweeps: usize,
    pub active: usize,
    pub converged: bool,
    pub certificate: MoreauCertificate,
}

fn certificate(
    op: &ReducedOperator,
    u: &ScalarField,
    v: &ScalarField,
    opts: &ConeOptions,
) -> Result<MoreauCertificate> {
    let grid = op.grid();
    let w = grid.quad_weight();
    let mu = op.apply_star(u)?;
    let r = u.sub(v)?;
    let mr = op.apply_star(&r)?;
    let unorm2 = w * dot(u.values(), mu.values());
    let umax = u.max_abs();
    if umax == 0.0 {
        return Ok(MoreauCertificate {
            min_rel: 0.0,
            orthogonality_rel: 0.0,
            polar_nodal_rel: 0.0,
            polar_sampled_rel: 0.0,
            passed: v.max_abs() == 0.0,
        });
    }
    let min_rel = v.min() / umax;
    let orthogonality_rel = (w * dot(v.values(), mr.values())).abs() / unorm2;
    let mscale = mu.max_abs().max(f64::MIN_POSITIVE);
    let polar_nodal_rel = mr.values().iter().fold(0.0f64, |m, &x| m.max(x)) / mscale;
    let mut rng = random::rng(opts.seed);
    let mut polar_sampled_rel = f64::NEG_INFINITY;
    for _ in 0..opts.polar_samples {
        let s = random::nonnegative_field(grid, &mut rng);
        let sn = op.norm_ab_star(&s)?;
        let val = w * dot(s.values(), mr.values()) / (unorm2.sqrt() * sn);
        polar_sampled_rel = polar_sampled_rel.max(val);
    }
    if opts.polar_samples == 0 {
        polar_sampled_rel = 0.0;
    }
    let passed = min_rel >= -opts.tol
        && orthogonality_rel <= opts.tol
        && polar_nodal_rel <= opts.tol
        && polar_sampled_rel <= opts.tol;
    Ok(MoreauCertificate {
        min_rel,
        orthogonality_rel,
        polar_nodal_rel,
        polar_sampled_rel,
        passed,
    })
}

/// `(P_K u, u − P_K u)` with Moreau certificates. Active-set cycling or
/// sweep exhaustion is reported through `converged = false`, not an error.
pub fn cone_project(
    op: &ReducedOperator,
    u: &ScalarField,
    opts: &ConeOptions,
) -> Result<Projection> {
    op.certify_star()?;
    if u.grid() != op.grid() {
        return Err(Error::GridMismatch);
    }
    let n = u.len();
    if u.min() >= 0.0 {
        let v = u.clone();
        let certificate = certificate(op, u, &v, opts)?;
        return Ok(Projection {
            polar: ScalarField::zeros(op.grid()),
            pk: v,
            sweeps: 0,
            active: 0,
            converged: true,
            certificate,
        });
    }

    let mu = op.apply_star(u)?;
    let mut active: Vec<bool> = u.values().iter().map(|&x| x <= 0.0).collect();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut v = vec![0.0; n];
    let mut sweeps = 0;
    let mut converged = false;
    let cg_opts = CgOptions::new(opts.cg_tol, 20 * n + 500);

    while sweeps < opts.max_sweeps {
        sweeps += 1;
        seen.insert(active.clone());
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        v.iter_mut().for_each(|x| *x = 0.0);
        if !free.is_empty() {
            let rhs: Vec<f64> = free.iter().map(|&i| mu.values()[i]).collect();
            let sub = FnOperator::new(free.len(), |x: &[f64], y: &mut [f64]| {
                let mut full = vec![0.0; n];
                for (k, &i) in free.iter().enumerate() {
                    full[i] = x[k];
                }
                let mut out = vec![0.0; n];
                op.apply_star_raw(&full, &mut out)?;
                for (k, &i) in free.iter().enumerate() {
                    y[k] = out[i];
                }
                Ok(())
            });
            let (x, _) = cg(&sub, &rhs, cg_opts).map_err(|e| e.context("cone projection"))?;
            for (k, &i) in free.iter().enumerate() {
                v[i] = x[k];
            }
        }
        // λ = M(v − u) on the active set
        let diff: Vec<f64> = v.iter().zip(u.values()).map(|(v, u)| v - u).collect();
        let mut lam = vec![0.0; n];
        op.apply_star_raw(&diff, &mut lam)?;
        let next: Vec<bool> = (0..n)
            .map(|i| if active[i] { lam[i] > 0.0 } else { v[i] < 0.0 })
            .collect();
        if next == active {
            converged = true;
            break;
        }
        if seen.contains(&next) {
            break;
        }
        active = next;
    }

    let pk = ScalarField::from_vec_unchecked(op.grid(), v);
    let polar = u.sub(&pk)?;
    let certificate = certificate(op, u, &pk, opts)?;
    Ok(Projection {
        active: active.iter().filter(|&&a| a).count(),
        pk,
        polar,
        sweeps,
        converged,
        certificate,
    })
}

/// `P_{-K} u = -P_K(-u)`.
pub fn neg_cone_project(
    op: &ReducedOperator,
    u: &ScalarField,
    opts: &ConeOptions,
) -> Result<Projection> {
    let mut p = cone_project(op, &u.scale(-1.0), opts)?;
    p.pk = p.pk.scale(-1.0);
    p.polar = p.polar.scale(-1.0);
    Ok(p)
}
