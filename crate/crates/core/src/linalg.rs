//! Matrix-free Krylov solvers: conjugate gradients for the SPD shifted
//! Laplacians and MINRES for the symmetric indefinite Newton systems.

use crate::error::{Error, Result};
use crate::grid::{dot, norm2, Grid, ScalarField};

pub trait LinearOperator {
    fn len(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    /// Main diagonal, if cheaply available (used for Jacobi preconditioning).
    fn diagonal(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    len: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(len: usize, f: F) -> Self {
        FnOperator { len, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn len(&self) -> usize {
        self.len
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }
}

/// `-Δ_h + diag(shift)`, optionally restricted to a node mask (inactive
/// nodes carry zero Dirichlet values and produce zero output).
#[derive(Debug, Clone)]
pub struct ShiftedLaplacian {
    grid: Grid,
    shift: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl ShiftedLaplacian {
    pub fn new(grid: &Grid, shift: Vec<f64>) -> Self {
        debug_assert_eq!(shift.len(), grid.len());
        ShiftedLaplacian {
            grid: *grid,
            shift,
            mask: None,
        }
    }

    pub fn masked(grid: &Grid, shift: Vec<f64>, mask: Vec<bool>) -> Self {
        debug_assert_eq!(mask.len(), grid.len());
        ShiftedLaplacian {
            grid: *grid,
            shift,
            mask: Some(mask),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }
}

impl LinearOperator for ShiftedLaplacian {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match &self.mask {
            None => {
                self.grid.neg_laplacian_into(x, y);
                for ((yi, xi), si) in y.iter_mut().zip(x).zip(&self.shift) {
                    *yi += si * xi;
                }
            }
            Some(mask) => {
                let xm: Vec<f64> = x
                    .iter()
                    .zip(mask)
                    .map(|(&v, &on)| if on { v } else { 0.0 })
                    .collect();
                self.grid.neg_laplacian_into(&xm, y);
                for i in 0..y.len() {
                    y[i] = if mask[i] {
                        y[i] + self.shift[i] * xm[i]
                    } else {
                        0.0
                    };
                }
            }
        }
        Ok(())
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        let h = self.grid.spacing();
        let base = 2.0 * self.grid.dim() as f64 / (h * h);
        Some(self.shift.iter().map(|s| base + s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub jacobi: bool,
}

impl CgOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        CgOptions {
            tol,
            max_iter,
            jacobi: false,
        }
    }

    pub fn with_jacobi(mut self, on: bool) -> Self {
        self.jacobi = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `A x = rhs` for SPD `A`, starting from zero.
///
/// Converged means `‖A x − rhs‖ ≤ tol ‖rhs‖` for the true residual, which is
/// recomputed at exit; if recurrence drift leaves it above tolerance the
/// iteration restarts from the current iterate.
pub fn cg(op: &dyn LinearOperator, rhs: &[f64], opts: CgOptions) -> Result<(Vec<f64>, SolveStats)> {
    let n = op.len();
    if rhs.len() != n {
        return Err(Error::invalid("rhs length does not match operator"));
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag = if opts.jacobi {
        op.diagonal()
            .map(|d| d.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
    } else {
        None
    };
    let precond = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => {
            for i in 0..r.len() {
                z[i] = m[i] * r[i];
            }
        }
        None => z.copy_from_slice(r),
    };

    let mut r = rhs.to_vec();
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = 1.0;
    // At most a few restarts to clean up recurrence drift.
    for _restart in 0..4 {
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < opts.max_iter {
            op.apply(&p, &mut ap)?;
            let curvature = dot(&p, &ap);
            if !(curvature > 0.0) {
                return Err(Error::NotSpd {
                    context: "conjugate gradients".into(),
                    curvature,
                });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            rel = norm2(&r) / bnorm;
            if rel <= opts.tol {
                break;
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        // true residual
        op.apply(&x, &mut ap)?;
        for i in 0..n {
            r[i] = rhs[i] - ap[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= opts.tol || iterations >= opts.max_iter {
            break;
        }
    }
    if rel <= opts.tol {
        Ok((
            x,
            SolveStats {
                iterations,
                relative_residual: rel,
            },
        ))
    } else {
        Err(Error::NotConverged {
            context: "conjugate gradients".into(),
            iterations,
            residual: rel,
        })
    }
}

/// Field-level CG: returns `x` with `‖apply(x) − rhs‖ ≤ tol ‖rhs‖`.
pub fn cg_solve(
    op: &dyn LinearOperator,
    rhs: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarField> {
    let (x, _) = cg(op, rhs.values(), CgOptions::new(tol, max_iter))?;
    Ok(ScalarField::from_vec_unchecked(rhs.grid(), x))
}

/// MINRES for symmetric (possibly indefinite) operators, unpreconditioned.
pub fn minres(
    op: &dyn LinearOperator,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = op.len();
    let mut x = vec![0.0; n];
    let beta1 = norm2(rhs);
    if beta1 == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r1 = rhs.to_vec();
    let mut r2 = rhs.to_vec();
    let mut y = rhs.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut iterations = 0;
    let mut av = vec![0.0; n];

    while iterations < max_iter {
        iterations += 1;
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        op.apply(&v, &mut av)?;
        y.copy_from_slice(&av);
        if iterations >= 2 {
            let c = beta / oldb;
            for i in 0..n {
                y[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for i in 0..n {
            y[i] -= c * r2[i];
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm2(&r2);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= tol * beta1 || beta == 0.0 {
            break;
        }
    }
    op.apply(&x, &mut av)?;
    let res: Vec<f64> = rhs.iter().zip(&av).map(|(b, a)| b - a).collect();
    let rel = norm2(&res) / beta1;
    // the recurrence estimate can be optimistic by a few ulps of the data
    if rel <= tol * 10.0 {
        Ok((
            x,
            SolveStats {
                iterations,
                relative_residual: rel,
            },
        ))
    } else {
        Err(Error::NotConverged {
            context: "MINRES".into(),
            iterations,
            residual: rel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl LinearOperator for Diag {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
            Ok(())
        }
    }

    #[test]
    fn cg_zero_rhs_gives_zero() {
        let g = Grid::new(2, 1.0, 5).unwrap();
        let op = ShiftedLaplacian::new(&g, vec![1.0; g.len()]);
        let x = cg_solve(&op, &ScalarField::zeros(&g), 1e-12, 100).unwrap();
        assert!(x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cg_identity_returns_rhs() {
        let op = Diag(vec![1.0; 7]);
        let rhs: Vec<f64> = (0..7).map(|i| i as f64 - 3.0).collect();
        let (x, stats) = cg(&op, &rhs, CgOptions::new(1e-14, 10)).unwrap();
        assert_eq!(x, rhs);
        assert_eq!(stats.iterations, 1);
    }

    #[test]
    fn cg_detects_indefinite_operator() {
        let op = Diag(vec![1.0, -2.0, 3.0]);
        let err = cg(&op, &[1.0, 1.0, 1.0], CgOptions::new(1e-12, 10)).unwrap_err();
        assert!(matches!(err, Error::NotSpd { .. }));
    }

    #[test]
    fn cg_reports_non_convergence() {
        let g = Grid::new(2, 1.0, 15).unwrap();
        let op = ShiftedLaplacian::new(&g, vec![0.0; g.len()]);
        let rhs = vec![1.0; g.len()];
        let err = cg(&op, &rhs, CgOptions::new(1e-14, 3)).unwrap_err();
        match err {
            Error::NotConverged { iterations, .. } => assert_eq!(iterations, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn jacobi_preconditioning_solves_same_system() {
        let g = Grid::new(2, 1.0, 9).unwrap();
        let shift: Vec<f64> = (0..g.len()).map(|i| 1.0 + (i % 5) as f64).collect();
        let op = ShiftedLaplacian::new(&g, shift);
        let rhs: Vec<f64> = (0..g.len()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let (x1, _) = cg(&op, &rhs, CgOptions::new(1e-12, 500)).unwrap();
        let (x2, _) = cg(&op, &rhs, CgOptions::new(1e-12, 500).with_jacobi(true)).unwrap();
        let diff: f64 = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn minres_solves_indefinite_diagonal() {
        let op = Diag(vec![1.0, -2.0, 3.0, -0.5]);
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let (x, _) = minres(&op, &rhs, 1e-12, 50).unwrap();
        let expect = [1.0, -1.0, 1.0, -8.0];
        for (a, b) in x.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn minres_on_shifted_laplacian_with_negative_shift() {
        let g = Grid::new(1, 1.0, 31).unwrap();
        // shift places one eigenvalue below zero
        let op = ShiftedLaplacian::new(&g, vec![-5.0; g.len()]);
        let rhs: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.3).sin()).collect();
        let (x, stats) = minres(&op, &rhs, 1e-11, 500).unwrap();
        let mut ax = vec![0.0; g.len()];
        op.apply(&x, &mut ax).unwrap();
        let res: f64 = ax
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(
            res <= 1e-9 * norm2(&rhs),
            "{res} after {}",
            stats.iterations
        );
    }
}
