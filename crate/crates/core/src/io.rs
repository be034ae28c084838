//! Field persistence: CSV (`x1[,x2[,x3]],value`, one row per interior node in
//! flat-index order) and legacy-VTK structured points.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

pub fn field_to_csv(field: &ScalarField) -> String {
    let g = field.grid();
    let d = g.dim();
    let mut out = String::with_capacity(field.len() * 24 * (d + 1));
    let header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",value\n");
    for (i, v) in field.values().iter().enumerate() {
        let x = g.coords(i);
        for xk in &x[..d] {
            let _ = write!(out, "{xk},");
        }
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, field_to_csv(field))?;
    Ok(())
}

pub fn field_from_csv(grid: &Grid, text: &str) -> Result<ScalarField> {
    let d = grid.dim();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?;
    let expected: Vec<String> = (1..=d)
        .map(|k| format!("x{k}"))
        .chain(std::iter::once("value".to_string()))
        .collect();
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != expected {
        return Err(Error::Parse(format!(
            "header `{header}` does not match `{}`",
            expected.join(",")
        )));
    }
    let tol = 1e-9 * grid.half_width();
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        if row >= grid.len() {
            return Err(Error::Parse(format!(
                "more rows than the {} grid nodes",
                grid.len()
            )));
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != d + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} columns, expected {}",
                row + 1,
                parts.len(),
                d + 1
            )));
        }
        let nums = parts
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", row + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let x = grid.coords(row);
        for k in 0..d {
            if (nums[k] - x[k]).abs() > tol {
                return Err(Error::Parse(format!(
                    "row {}: coordinate x{} = {} does not match grid node {}",
                    row + 1,
                    k + 1,
                    nums[k],
                    x[k]
                )));
            }
        }
        if !nums[d].is_finite() {
            return Err(Error::Parse(format!("row {}: non-finite value", row + 1)));
        }
        values.push(nums[d]);
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!(
            "node count {} does not match grid ({} nodes)",
            values.len(),
            grid.len()
        )));
    }
    ScalarField::from_values(grid, values)
}

pub fn load_field(grid: &Grid, path: impl AsRef<Path>) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    field_from_csv(grid, &text)
}

/// Legacy VTK `STRUCTURED_POINTS`, padded to 3-D. VTK wants x fastest, so the
/// flat order is transposed.
pub fn field_to_vtk(field: &ScalarField, name: &str) -> String {
    let g = field.grid();
    let d = g.dim();
    let n = g.nodes_per_axis();
    let h = g.spacing();
    let origin = -g.half_width() + h;
    let mut dims = [1usize; 3];
    let mut org = [0.0f64; 3];
    for k in 0..d {
        dims[k] = n;
        org[k] = origin;
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{name}");
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(out, "ORIGIN {} {} {}", org[0], org[1], org[2]);
    let _ = writeln!(out, "SPACING {h} {h} {h}");
    let _ = writeln!(out, "POINT_DATA {}", field.len());
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let idx = g.flat_index(&[i, j, k][..d]);
                let _ = writeln!(out, "{}", field.values()[idx]);
            }
        }
    }
    out
}

pub fn save_vtk(field: &ScalarField, name: &str, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, field_to_vtk(field, name))?;
    Ok(())
}
