//! Dense reference operators assembled from node coordinates, independent
//! of the library's stencil loops.

#![allow(dead_code)]

use fhnvs::{Grid, ScalarField};
use nalgebra::{DMatrix, DVector};

pub fn coords(g: &Grid, i: usize) -> Vec<f64> {
    g.coords(i)[..g.dim()].to_vec()
}

/// `-Δ_h` with zero Dirichlet ghosts: nodes are neighbours when their
/// coordinates differ by `h` along exactly one axis.
pub fn dense_neg_laplacian(g: &Grid) -> DMatrix<f64> {
    let n = g.len();
    let h = g.spacing();
    let d = g.dim();
    let pts: Vec<Vec<f64>> = (0..n).map(|i| coords(g, i)).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 2.0 * d as f64 / (h * h);
        }
        let diffs: Vec<f64> = (0..d).map(|k| (pts[i][k] - pts[j][k]).abs()).collect();
        let along = diffs.iter().filter(|&&v| (v - h).abs() < 1e-9 * h).count();
        let same = diffs.iter().filter(|&&v| v < 1e-9 * h).count();
        if along == 1 && same == d - 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    })
}

pub fn diag(f: &ScalarField) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(f.values()))
}

pub fn vec(f: &ScalarField) -> DVector<f64> {
    DVector::from_column_slice(f.values())
}

pub fn field(g: &Grid, v: &DVector<f64>) -> ScalarField {
    ScalarField::from_values(g, v.iter().copied().collect()).unwrap()
}

pub struct DenseSystem {
    pub lap: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub beta: f64,
}

impl DenseSystem {
    pub fn new(g: &Grid, a: &ScalarField, b: &ScalarField, beta: f64) -> Self {
        DenseSystem {
            lap: dense_neg_laplacian(g),
            a: diag(a),
            b: diag(b),
            beta,
        }
    }

    pub fn constant(g: &Grid, a: f64, b: f64, beta: f64) -> Self {
        Self::new(
            g,
            &ScalarField::constant(g, a),
            &ScalarField::constant(g, b),
            beta,
        )
    }

    /// `β (L + b)⁻¹ a`
    pub fn sb(&self) -> DMatrix<f64> {
        (&self.lap + &self.b).try_inverse().unwrap() * &self.a * self.beta
    }

    /// `L + a S_b`
    pub fn reduced(&self) -> DMatrix<f64> {
        &self.lap + &self.a * self.sb()
    }

    /// `L + a S_b + e` with `e = b − 2√β a`.
    pub fn star(&self) -> DMatrix<f64> {
        let e = &self.b - &self.a * (2.0 * self.beta.sqrt());
        self.reduced() + e
    }
}

/// `min_{v ≥ 0} (v − u)ᵀ M (v − u)` by projected Gauss–Seidel, converged to
/// machine precision. `M` must be SPD.
pub fn cone_qp(m: &DMatrix<f64>, u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    let mut v = u.map(|x| x.max(0.0));
    for _ in 0..200_000 {
        let mut change = 0.0f64;
        for i in 0..n {
            // ∂/∂v_i of ½(v−u)ᵀM(v−u)
            let mut g = 0.0;
            for j in 0..n {
                g += m[(i, j)] * (v[j] - u[j]);
            }
            let new = (v[i] - g / m[(i, i)]).max(0.0);
            change = change.max((new - v[i]).abs());
            v[i] = new;
        }
        if change <= 1e-15 * u.amax().max(1e-300) {
            break;
        }
    }
    v
}

/// Exhaustive enumeration over active sets for very small problems: the
/// minimizer is the unique feasible candidate satisfying the KKT sign
/// conditions.
pub fn cone_qp_enumerate(m: &DMatrix<f64>, u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    assert!(n <= 16, "enumeration is for tiny problems");
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << n) {
        // free set = bits set in mask; active nodes pinned to 0
        let free: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut v = DVector::zeros(n);
        if !free.is_empty() {
            // M_FF v_F = M_F· u
            let mff = DMatrix::from_fn(free.len(), free.len(), |r, c| m[(free[r], free[c])]);
            let rhs = DVector::from_fn(free.len(), |r, _| {
                (0..n).map(|j| m[(free[r], j)] * u[j]).sum::<f64>()
            });
            let sol = mff.lu().solve(&rhs).unwrap();
            for (k, &i) in free.iter().enumerate() {
                v[i] = sol[k];
            }
        }
        if v.iter().any(|&x| x < -1e-12) {
            continue;
        }
        let r = &v - u;
        let obj = (r.transpose() * m * &r)[(0, 0)];
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, v));
        }
    }
    best.unwrap().1
}

pub fn sine_mode(g: &Grid, ks: &[usize]) -> ScalarField {
    let l = g.half_width();
    ScalarField::from_fn(g, |x| {
        ks.iter()
            .zip(x)
            .map(|(&k, &xi)| (k as f64 * std::f64::consts::PI * (xi + l) / (2.0 * l)).sin())
            .product()
    })
}

/// Eigenvalue of `-Δ_h` for the separable sine mode `ks`.
pub fn sine_eigenvalue(g: &Grid, ks: &[usize]) -> f64 {
    let h = g.spacing();
    let l = g.half_width();
    ks.iter()
        .map(|&k| {
            4.0 / (h * h)
                * (k as f64 * std::f64::consts::PI * h / (4.0 * l))
                    .sin()
                    .powi(2)
        })
        .sum()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
