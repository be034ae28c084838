//! Uniform tensor-product grids on `[-L, L]^d` with homogeneous Dirichlet
//! boundary, nodal fields, the five/seven-point negative Laplacian, and
//! midpoint quadrature.
//!
//! Only interior nodes are stored. Node `(i_1, .., i_d)` with `i_k` in
//! `1..=n` sits at `x_k = -L + i_k h` where `h = 2L / (n + 1)`. Flat
//! indices are row-major, so the last axis varies fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("dim must be 1, 2 or 3 (got {dim})")));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::invalid(format!(
                "half width L must be finite and positive (got {half_width})"
            )));
        }
        if n < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 interior nodes per axis (got {n})"
            )));
        }
        Ok(Grid {
            dim,
            half_width,
            n,
            h: 2.0 * half_width / (n as f64 + 1.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Interior nodes per axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Volume element `h^d`.
    pub fn quad_weight(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Theory needs `N >= 3`; lower dimensions are formal test modes.
    pub fn is_formal(&self) -> bool {
        self.dim < 3
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Zero-based per-axis indices of a flat index.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.n;
            rem /= self.n;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.n + i)
    }

    /// Coordinates of a node; unused trailing entries are zero.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = -self.half_width + (m[axis] as f64 + 1.0) * self.h;
        }
        x
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.coords(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Apply `-Δ_h` with zero Dirichlet ghost values: `out = -Δ_h u`.
    pub fn neg_laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let inv_h2 = 1.0 / (self.h * self.h);
        let diag = 2.0 * self.dim as f64;
        let n = self.n;
        match self.dim {
            1 => {
                for i in 0..n {
                    let mut acc = diag * u[i];
                    if i > 0 {
                        acc -= u[i - 1];
                    }
                    if i + 1 < n {
                        acc -= u[i + 1];
                    }
                    out[i] = acc * inv_h2;
                }
            }
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        let k = i * n + j;
                        let mut acc = diag * u[k];
                        if i > 0 {
                            acc -= u[k - n];
                        }
                        if i + 1 < n {
                            acc -= u[k + n];
                        }
                        if j > 0 {
                            acc -= u[k - 1];
                        }
                        if j + 1 < n {
                            acc -= u[k + 1];
                        }
                        out[k] = acc * inv_h2;
                    }
                }
            }
            _ => {
                let nn = n * n;
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            let k = i * nn + j * n + l;
                            let mut acc = diag * u[k];
                            if i > 0 {
                                acc -= u[k - nn];
                            }
                            if i + 1 < n {
                                acc -= u[k + nn];
                            }
                            if j > 0 {
                                acc -= u[k - n];
                            }
                            if j + 1 < n {
                                acc -= u[k + n];
                            }
                            if l > 0 {
                                acc -= u[k - 1];
                            }
                            if l + 1 < n {
                                acc -= u[k + 1];
                            }
                            out[k] = acc * inv_h2;
                        }
                    }
                }
            }
        }
    }

    /// Flat indices of the stencil neighbours of `idx` that are interior nodes.
    pub fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.multi_index(idx);
        (0..self.dim).flat_map(move |axis| {
            let s = self.stride(axis);
            let lo = (m[axis] > 0).then(|| idx - s);
            let hi = (m[axis] + 1 < self.n).then(|| idx + s);
            lo.into_iter().chain(hi)
        })
    }
}

/// Interior nodal values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at node {i}")));
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    /// Sample `f(x)` at every interior node.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..d])
            })
            .collect();
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub(crate) fn from_vec_unchecked(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField::from_vec_unchecked(&self.grid, values))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, alpha: f64) -> ScalarField {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_vec_unchecked(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn neg_laplacian(&self) -> ScalarField {
        let mut out = vec![0.0; self.values.len()];
        self.grid.neg_laplacian_into(&self.values, &mut out);
        ScalarField::from_vec_unchecked(&self.grid, out)
    }
}

/// `-Δ_h u` on grid `g`.
pub fn laplacian_apply(g: &Grid, u: &ScalarField) -> Result<ScalarField> {
    if u.grid() != g {
        return Err(Error::GridMismatch);
    }
    Ok(u.neg_laplacian())
}

/// Midpoint quadrature `h^d Σ u_i` over interior nodes.
pub fn integrate(g: &Grid, u: &ScalarField) -> Result<f64> {
    if u.grid() != g {
        return Err(Error::GridMismatch);
    }
    Ok(g.quad_weight() * u.values().iter().sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub lp: f64,
    pub h1_semi: f64,
}

pub fn norms(g: &Grid, u: &ScalarField, p: f64) -> Result<Norms> {
    if u.grid() != g {
        return Err(Error::GridMismatch);
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("L_p norm needs p >= 1 (got {p})")));
    }
    let w = g.quad_weight();
    let l2 = (w * dot(u.values(), u.values())).sqrt();
    let lp = (w * u.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
    let lap = u.neg_laplacian();
    let h1_semi = (w * dot(u.values(), lap.values())).max(0.0).sqrt();
    Ok(Norms { l2, lp, h1_semi })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
