//! Run configuration: JSON with unknown keys rejected, defaults filled,
//! every number checked before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coefficients::{self, CoefficientSet};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::nonlinearity::{self, NonlinearitySpec};
use crate::solvers::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    Constant,
    ExampleSigma,
    Gaussian,
    Paired,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub kind: CoeffKind,
    #[serde(default = "empty_object")]
    pub params: Value,
    pub beta: f64,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// `a ≡ a`, `b ≡ b`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    a: f64,
    b: f64,
}

/// The sampled profile goes into whichever of `a`, `b` is not given as a
/// constant.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaParams {
    r: f64,
    kappa: f64,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    b: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianParams {
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    b: Option<f64>,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairedParams {
    r1: f64,
    kappa1: f64,
    r2: f64,
    kappa2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileParams {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlKind {
    Power,
    ShiftedPower,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlConfig {
    pub kind: NlKind,
    /// Exponent of `power` / `shifted_power`.
    #[serde(default)]
    pub p: Option<f64>,
    /// Claimed `μ₀` of `linear`.
    #[serde(default)]
    pub mu0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<FieldFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            formats: vec![FieldFormat::Csv],
        }
    }
}

/// Parameters of the spectral subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub s: f64,
    /// Ball radius of the shifted-ball march; `None` means `L/4`.
    pub radius: Option<f64>,
    pub centres: usize,
    /// Exterior cut-off radii; empty means `L/5, 2L/5, 3L/5`.
    pub ladder: Vec<f64>,
    pub restarts: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            s: 2.0,
            radius: None,
            centres: 6,
            ladder: Vec::new(),
            restarts: 4,
            trials: 100,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub coeff: CoeffConfig,
    pub nl: NlConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn from_section<T: DeserializeOwned>(value: &Value, path: &str) -> Result<T> {
    serde_json::from_value(value.clone()).map_err(|e| config_err(path, e.to_string()))
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(path, format!("must be finite, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    finite(path, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(path, format!("must be positive, got {v}")))
    }
}

/// JSON has no literal for NaN or infinity; this catches them anyway when a
/// config is built in code, and walks every number in the raw document.
fn check_numbers(value: &Value, path: &str) -> Result<()> {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(v) if v.is_finite() => Ok(()),
            _ => Err(config_err(path, "non-finite number")),
        },
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_numbers(v, &format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().try_for_each(|(k, v)| {
            let p = if path.is_empty() {
                k.clone()
            } else {
                format!("{path}.{k}")
            };
            check_numbers(v, &p)
        }),
        _ => Ok(()),
    }
}

impl RunConfig {
    /// Parse from JSON text. Relative file paths in `coeff.params` resolve
    /// against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| config_err("", e.to_string()))?;
        check_numbers(&raw, "")?;
        let obj = raw
            .as_object()
            .ok_or_else(|| config_err("", "top level must be an object"))?;
        for key in obj.keys() {
            if !["grid", "coeff", "nl", "solver", "spectral", "outputs"].contains(&key.as_str()) {
                return Err(config_err(key, "unknown key"));
            }
        }
        let section = |name: &str| {
            obj.get(name)
                .ok_or_else(|| config_err(name, "missing section"))
        };
        let mut cfg = RunConfig {
            grid: from_section(section("grid")?, "grid")?,
            coeff: from_section(section("coeff")?, "coeff")?,
            nl: from_section(section("nl")?, "nl")?,
            solver: obj
                .get("solver")
                .map(|v| from_section(v, "solver"))
                .transpose()?
                .unwrap_or_default(),
            spectral: obj
                .get("spectral")
                .map(|v| from_section(v, "spectral"))
                .transpose()?
                .unwrap_or_default(),
            outputs: obj
                .get("outputs")
                .map(|v| from_section(v, "outputs"))
                .transpose()?
                .unwrap_or_default(),
        };
        if let (CoeffKind::File, Some(base)) = (cfg.coeff.kind, base) {
            if let Some(map) = cfg.coeff.params.as_object_mut() {
                for key in ["a", "b"] {
                    if let Some(Value::String(p)) = map.get(key) {
                        let p = Path::new(p);
                        if p.is_relative() {
                            let joined = base.join(p).to_string_lossy().into_owned();
                            map.insert(key.into(), Value::String(joined));
                        }
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| config_err("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(1..=3).contains(&g.dim) {
            return Err(config_err(
                "grid.dim",
                format!("must be 1, 2 or 3, got {}", g.dim),
            ));
        }
        positive("grid.L", g.half_width)?;
        if g.n < 3 {
            return Err(config_err(
                "grid.n",
                format!("must be at least 3, got {}", g.n),
            ));
        }
        if !(self.coeff.beta.is_finite() && self.coeff.beta > 0.0) {
            return Err(config_err(
                "coeff.beta",
                format!(
                    "beta must be positive (c = beta a with beta > 0), got {}",
                    self.coeff.beta
                ),
            ));
        }
        self.validate_coeff_params()?;
        self.validate_nl()?;
        self.solver.validate()?;
        let sp = &self.spectral;
        if !(sp.s >= 2.0 && sp.s.is_finite()) {
            return Err(config_err(
                "spectral.s",
                format!("must be a finite number ≥ 2, got {}", sp.s),
            ));
        }
        if let Some(r) = sp.radius {
            positive("spectral.radius", r)?;
        }
        for (i, &r) in sp.ladder.iter().enumerate() {
            positive(&format!("spectral.ladder[{i}]"), r)?;
        }
        if sp.restarts == 0 {
            return Err(config_err("spectral.restarts", "must be positive"));
        }
        Ok(())
    }

    fn validate_coeff_params(&self) -> Result<()> {
        let p = &self.coeff.params;
        let path = "coeff.params";
        match self.coeff.kind {
            CoeffKind::Constant => {
                let c: ConstantParams = from_section(p, path)?;
                finite("coeff.params.a", c.a)?;
                finite("coeff.params.b", c.b)?;
            }
            CoeffKind::ExampleSigma => {
                let c: SigmaParams = from_section(p, path)?;
                if !(c.r > 1.0 && c.r.is_finite()) {
                    return Err(config_err(
                        "coeff.params.r",
                        format!("must exceed 1, got {}", c.r),
                    ));
                }
                positive("coeff.params.kappa", c.kappa)?;
                one_constant(c.a, c.b)?;
            }
            CoeffKind::Gaussian => {
                let c: GaussianParams = from_section(p, path)?;
                finite("coeff.params.scale", c.scale)?;
                one_constant(c.a, c.b)?;
            }
            CoeffKind::Paired => {
                let c: PairedParams = from_section(p, path)?;
                for (name, v) in [("r1", c.r1), ("r2", c.r2)] {
                    if !(v > 1.0 && v.is_finite()) {
                        return Err(config_err(
                            &format!("coeff.params.{name}"),
                            format!("must exceed 1, got {v}"),
                        ));
                    }
                }
                positive("coeff.params.kappa1", c.kappa1)?;
                positive("coeff.params.kappa2", c.kappa2)?;
            }
            CoeffKind::File => {
                let _: FileParams = from_section(p, path)?;
            }
        }
        Ok(())
    }

    fn validate_nl(&self) -> Result<()> {
        let nl = &self.nl;
        match nl.kind {
            NlKind::Power | NlKind::ShiftedPower => {
                let p =
                    nl.p.ok_or_else(|| config_err("nl.p", "required for this kind"))?;
                finite("nl.p", p)?;
                if !(p > 1.0) {
                    return Err(config_err("nl.p", format!("must exceed 1, got {p}")));
                }
                if self.grid.dim == 3 && p >= nonlinearity::critical_power(3) {
                    return Err(config_err(
                        "nl.p",
                        format!(
                            "supercritical exponent: p = {p} must be below 2*-1 = 5 in dimension 3"
                        ),
                    ));
                }
                if nl.mu0.is_some() {
                    return Err(config_err("nl.mu0", "only used by kind `linear`"));
                }
            }
            NlKind::Linear => {
                if nl.p.is_some() {
                    return Err(config_err("nl.p", "not used by kind `linear`"));
                }
                if let Some(m) = nl.mu0 {
                    if !(m > 2.0 && m.is_finite()) {
                        return Err(config_err("nl.mu0", format!("must exceed 2, got {m}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.half_width, self.grid.n)
    }

    pub fn build_coefficients(&self, grid: &Grid) -> Result<CoefficientSet> {
        let beta = self.coeff.beta;
        let p = &self.coeff.params;
        let path = "coeff.params";
        let place = |profile: ScalarField, a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), None) => CoefficientSet::new(ScalarField::constant(grid, a), profile, beta),
            (None, Some(b)) => CoefficientSet::new(profile, ScalarField::constant(grid, b), beta),
            _ => Err(config_err(
                path,
                "give exactly one of `a`, `b` as a constant",
            )),
        };
        match self.coeff.kind {
            CoeffKind::Constant => {
                let c: ConstantParams = from_section(p, path)?;
                coefficients::constant_coeffs(grid, c.a, c.b, beta)
            }
            CoeffKind::ExampleSigma => {
                let c: SigmaParams = from_section(p, path)?;
                let mu = coefficients::poincare_mu(grid, c.r)?;
                place(
                    coefficients::example_sigma(grid, c.r, c.kappa, mu)?,
                    c.a,
                    c.b,
                )
            }
            CoeffKind::Gaussian => {
                let c: GaussianParams = from_section(p, path)?;
                place(coefficients::gaussian_sigma(grid).scale(c.scale), c.a, c.b)
            }
            CoeffKind::Paired => {
                let c: PairedParams = from_section(p, path)?;
                let pair = coefficients::paired_class_coeffs(grid, c.r1, c.kappa1, c.r2, c.kappa2)?;
                CoefficientSet::new(pair.a, pair.b, beta)
            }
            CoeffKind::File => {
                let c: FileParams = from_section(p, path)?;
                let a = coefficients::load_field(grid, &c.a)?;
                let b = coefficients::load_field(grid, &c.b)?;
                CoefficientSet::new(a, b, beta)
            }
        }
    }

    pub fn build_nonlinearity(&self) -> Result<NonlinearitySpec> {
        match self.nl.kind {
            NlKind::Power => {
                nonlinearity::power_nonlinearity(self.nl.p.unwrap_or(3.0), self.grid.dim)
            }
            NlKind::ShiftedPower => {
                nonlinearity::shifted_power_nonlinearity(self.nl.p.unwrap_or(3.0))
            }
            NlKind::Linear => nonlinearity::linear_nonlinearity(self.nl.mu0.unwrap_or(3.0)),
        }
    }
}

fn one_constant(a: Option<f64>, b: Option<f64>) -> Result<()> {
    match (a, b) {
        (Some(v), None) => finite("coeff.params.a", v).map(|_| ()),
        (None, Some(v)) => finite("coeff.params.b", v).map(|_| ()),
        _ => Err(config_err(
            "coeff.params",
            "give exactly one of `a`, `b` as a constant",
        )),
    }
}
