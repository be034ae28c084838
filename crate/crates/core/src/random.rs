//! Seeded random test fields and bump profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Grid, ScalarField};

pub type FieldRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random combination of low Dirichlet sine modes (mode index ≤ `modes` per
/// axis), coefficients `N(0,1) / |k|^2`. Smooth and vanishing at the box edge.
pub fn smooth_field(grid: &Grid, rng: &mut FieldRng, modes: usize) -> ScalarField {
    let d = grid.dim();
    let l = grid.half_width();
    let n = grid.nodes_per_axis();
    let modes = modes.max(1);
    // per-axis sine tables: table[k][i] = sin((k+1) π (x_i + L) / 2L)
    let table: Vec<Vec<f64>> = (1..=modes)
        .map(|k| {
            (0..n)
                .map(|i| {
                    let x = -l + (i as f64 + 1.0) * grid.spacing();
                    (k as f64 * std::f64::consts::PI * (x + l) / (2.0 * l)).sin()
                })
                .collect()
        })
        .collect();
    let n_terms = modes.pow(d as u32);
    let mut coeffs = Vec::with_capacity(n_terms);
    for t in 0..n_terms {
        let mut rem = t;
        let mut ks = [0usize; 3];
        let mut k2 = 0.0;
        for axis in 0..d {
            ks[axis] = rem % modes;
            rem /= modes;
            k2 += ((ks[axis] + 1) * (ks[axis] + 1)) as f64;
        }
        let z: f64 = rng.sample(StandardNormal);
        coeffs.push((ks, z / k2));
    }
    let mut values = vec![0.0; grid.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        let m = grid.multi_index(idx);
        let mut acc = 0.0;
        for (ks, c) in &coeffs {
            let mut term = *c;
            for axis in 0..d {
                term *= table[ks[axis]][m[axis]];
            }
            acc += term;
        }
        *v = acc;
    }
    ScalarField::from_vec_unchecked(grid, values)
}

/// Independent `N(0,1)` node values.
pub fn noise_field(grid: &Grid, rng: &mut FieldRng) -> ScalarField {
    let values = (0..grid.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    ScalarField::from_vec_unchecked(grid, values)
}

/// Nonnegative, nonzero random load: squared smooth field plus a few
/// positive Gaussian bumps at random nodes.
pub fn nonnegative_field(grid: &Grid, rng: &mut FieldRng) -> ScalarField {
    let base = smooth_field(grid, rng, 3).map(|v| v * v);
    let scale = base.max_abs().max(1e-3);
    let mut values = base.into_values();
    let bumps = rng.random_range(1..4);
    for _ in 0..bumps {
        let centre = grid.coords(rng.random_range(0..grid.len()));
        let width = grid.spacing() * rng.random_range(1.0..3.0);
        let amp = scale * rng.random_range(0.2..1.0);
        for (i, v) in values.iter_mut().enumerate() {
            let x = grid.coords(i);
            let r2: f64 = (0..grid.dim()).map(|k| (x[k] - centre[k]).powi(2)).sum();
            *v += amp * (-r2 / (2.0 * width * width)).exp();
        }
    }
    ScalarField::from_vec_unchecked(grid, values)
}

/// Gaussian bump `exp(-|x-c|²/2w²)`, with values below `1e-12` clipped to
/// zero so the support is compact.
pub fn gaussian_bump(grid: &Grid, centre: &[f64], width: f64) -> ScalarField {
    let d = grid.dim();
    ScalarField::from_fn(grid, |x| {
        let r2: f64 = (0..d).map(|k| (x[k] - centre[k]).powi(2)).sum();
        let v = (-r2 / (2.0 * width * width)).exp();
        if v < 1e-12 {
            0.0
        } else {
            v
        }
    })
}
