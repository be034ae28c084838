//! `fhnvs` subcommands. Exit status: 0 success, 1 computational failure,
//! 2 configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::coefficients::CoefficientSet;
use crate::config::{FieldFormat, RunConfig};
use crate::energy::{EnergyProblem, Metric};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::io;
use crate::nonlinearity::validate_hypotheses;
use crate::nonlocal::ReducedOperator;
use crate::solvers::{mountain_pass, three_solutions, TraceEntry};
use crate::spectral::{self, DomainMask, EigenOptions, NuOptions, CERT_TOL};
use crate::verify::{verify_pair, SolutionReport, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Weak residuals above this make `verify` exit with status 1.
const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "fhnvs",
    version,
    about = "Steady states of heterogeneous FitzHugh-Nagumo systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    A,
    B,
    D,
    E,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign checks, λ₁ of a, b, d, shifted-ball diagnostics, norm equivalence
    /// and nonlinearity hypotheses.
    CheckCoeffs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest eigenvalue of -Δ + σ for σ ∈ {a, b, d, e}.
    Lambda1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ν_s on a march of shifted balls and on exterior domains.
    NuS {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        s: Option<f64>,
        /// Exterior cut-off radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "b")]
        field: FieldChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mountain-pass solution.
    SolveMp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positive, negative and sign-changing solutions.
    SolveThree {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak residuals and sign classes of stored solutions.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    execute(cli.command)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

pub fn execute(cmd: Command) -> i32 {
    let (config_path, out) = match &cmd {
        Command::CheckCoeffs { config, out }
        | Command::Lambda1 { config, out }
        | Command::NuS { config, out, .. }
        | Command::SolveMp { config, out }
        | Command::SolveThree { config, out }
        | Command::Verify { config, out, .. } => (config.clone(), out.clone()),
    };
    let mut cfg = match RunConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fhnvs: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(dir) = out {
        cfg.outputs.dir = dir;
    }
    if let Command::NuS { s, ladder, .. } = &cmd {
        if let Some(s) = s {
            cfg.spectral.s = *s;
        }
        if let Some(l) = ladder {
            cfg.spectral.ladder = l.clone();
        }
        if let Err(e) = cfg.validate() {
            eprintln!("fhnvs: {e}");
            return EXIT_CONFIG;
        }
    }
    let dir = cfg.outputs.dir.clone();
    if let Err(e) = fs::create_dir_all(&dir)
        .map_err(Error::from)
        .and_then(|_| write_echo(&cfg, &dir))
    {
        eprintln!("fhnvs: {e}");
        return EXIT_FAILURE;
    }

    let name = command_name(&cmd);
    let result = match &cmd {
        Command::CheckCoeffs { .. } => check_coeffs(&cfg),
        Command::Lambda1 { .. } => lambda1_cmd(&cfg),
        Command::NuS { field, .. } => nu_s_cmd(&cfg, *field),
        Command::SolveMp { .. } => solve_mp(&cfg),
        Command::SolveThree { .. } => solve_three(&cfg),
        Command::Verify { solution, .. } => verify_cmd(&cfg, solution),
    };
    let file = if name == "verify" {
        "verify.json"
    } else {
        "report.json"
    };
    let (report, code) = match result {
        Ok((report, ok)) => (report, if ok { EXIT_OK } else { EXIT_FAILURE }),
        Err(e) => {
            eprintln!("fhnvs {name}: {e}");
            let kind = match &e {
                Error::Certification(_) => "certification",
                Error::Config { .. } => "config",
                Error::NotConverged { .. } => "not_converged",
                _ => "error",
            };
            (
                json!({ "command": name, "status": "error", "kind": kind, "error": e.to_string() }),
                exit_code(&e),
            )
        }
    };
    if let Err(e) = write_json(&dir.join(file), &report) {
        eprintln!("fhnvs: {e}");
        return EXIT_FAILURE;
    }
    code
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckCoeffs { .. } => "check-coeffs",
        Command::Lambda1 { .. } => "lambda1",
        Command::NuS { .. } => "nu-s",
        Command::SolveMp { .. } => "solve-mp",
        Command::SolveThree { .. } => "solve-three",
        Command::Verify { .. } => "verify",
    }
}

pub const CONFIG_ECHO: &str = "config.effective.json";

fn write_echo(cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::write(dir.join(CONFIG_ECHO), cfg.to_json()?)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn grid_json(grid: &Grid) -> Value {
    json!({
        "dim": grid.dim(),
        "L": grid.half_width(),
        "n": grid.nodes_per_axis(),
        "h": grid.spacing(),
        "formal": grid.is_formal(),
    })
}

fn field(cs: &CoefficientSet, which: FieldChoice) -> ScalarField {
    match which {
        FieldChoice::A => cs.a().clone(),
        FieldChoice::B => cs.b().clone(),
        FieldChoice::D => cs.derive_d(),
        FieldChoice::E => cs.derive_e(),
    }
}

#[derive(Debug, Serialize)]
struct Lambda1Entry {
    field: FieldChoice,
    lambda1: f64,
    positive: bool,
    iterations: usize,
    residual: f64,
}

fn lambda1_entry(cs: &CoefficientSet, which: FieldChoice) -> Result<Lambda1Entry> {
    let sigma = field(cs, which);
    let pair = spectral::lambda1_pair(
        &sigma,
        &DomainMask::full(cs.grid()),
        EigenOptions::default(),
    )?;
    Ok(Lambda1Entry {
        field: which,
        lambda1: pair.value,
        positive: pair.value > CERT_TOL,
        iterations: pair.iterations,
        residual: pair.residual,
    })
}

fn lambda1_cmd(cfg: &RunConfig) -> Result<(Value, bool)> {
    let grid = cfg.build_grid()?;
    let cs = cfg.build_coefficients(&grid)?;
    let entries = [
        FieldChoice::A,
        FieldChoice::B,
        FieldChoice::D,
        FieldChoice::E,
    ]
    .into_iter()
    .map(|f| lambda1_entry(&cs, f))
    .collect::<Result<Vec<_>>>()?;
    let lambda1_b = entries[1].lambda1;
    Ok((
        json!({
            "command": "lambda1",
            "status": "ok",
            "grid": grid_json(&grid),
            "lambda1": lambda1_b,
            "box_floor": grid.dim() as f64 * (std::f64::consts::PI / (2.0 * grid.half_width())).powi(2),
            "fields": entries,
        }),
        true,
    ))
}

fn nu_options(cfg: &RunConfig) -> NuOptions {
    NuOptions {
        restarts: cfg.spectral.restarts,
        seed: cfg.spectral.seed,
        ..NuOptions::default()
    }
}

fn march(cfg: &RunConfig, grid: &Grid) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let l = grid.half_width();
    let radius = cfg.spectral.radius.unwrap_or(0.25 * l);
    let k = cfg.spectral.centres.max(1);
    let span = (l - radius).max(0.0);
    let centres = (0..k)
        .map(|i| {
            let mut c = vec![0.0; grid.dim()];
            c[0] = if k == 1 {
                0.0
            } else {
                span * i as f64 / (k - 1) as f64
            };
            c
        })
        .collect();
    let ladder = if cfg.spectral.ladder.is_empty() {
        vec![0.2 * l, 0.4 * l, 0.6 * l]
    } else {
        cfg.spectral.ladder.clone()
    };
    (radius, centres, ladder)
}

fn nu_s_cmd(cfg: &RunConfig, which: FieldChoice) -> Result<(Value, bool)> {
    let grid = cfg.build_grid()?;
    let cs = cfg.build_coefficients(&grid)?;
    let (radius, centres, ladder) = march(cfg, &grid);
    let report = spectral::shifted_ball_diagnostic(
        &field(&cs, which),
        radius,
        &centres,
        &ladder,
        cfg.spectral.s,
        nu_options(cfg),
    )?;
    Ok((
        json!({
            "command": "nu-s",
            "status": "ok",
            "grid": grid_json(&grid),
            "field": which,
            "report": report,
        }),
        true,
    ))
}

fn check_coeffs(cfg: &RunConfig) -> Result<(Value, bool)> {
    let grid = cfg.build_grid()?;
    let cs = cfg.build_coefficients(&grid)?;
    let lambda1 = [FieldChoice::A, FieldChoice::B, FieldChoice::D]
        .into_iter()
        .map(|f| lambda1_entry(&cs, f))
        .collect::<Result<Vec<_>>>()?;
    let (radius, centres, ladder) = march(cfg, &grid);
    let opts = nu_options(cfg);
    let class_a =
        spectral::shifted_ball_diagnostic(cs.a(), radius, &centres, &ladder, cfg.spectral.s, opts)?;
    let class_b =
        spectral::shifted_ball_diagnostic(cs.b(), radius, &centres, &ladder, cfg.spectral.s, opts)?;
    let envelope = spectral::norm_equivalence_diagnostic(
        cs.a(),
        cs.b(),
        cfg.spectral.trials,
        cfg.spectral.seed,
    )?;
    let spec = cfg.build_nonlinearity()?;
    let hypotheses = validate_hypotheses(&spec, &grid, 2000, cfg.solver.seed);
    let star = ReducedOperator::new(cs.clone()).and_then(|op| op.certify_star());
    Ok((
        json!({
            "command": "check-coeffs",
            "status": "ok",
            "grid": grid_json(&grid),
            "beta": cs.beta(),
            "signs": cs.sign_report(),
            "lambda1": lambda1,
            "class_a": class_a,
            "class_b": class_b,
            "norm_equivalence": envelope,
            "star_certificate": match &star {
                Ok(c) => json!({ "certified": true, "lambda1_d": c.lambda1_d, "min_a": c.min_a, "min_e": c.min_e }),
                Err(e) => json!({ "certified": false, "reason": e.to_string() }),
            },
            "hypotheses": hypotheses,
        }),
        true,
    ))
}

fn build_problem(cfg: &RunConfig) -> Result<EnergyProblem> {
    let grid = cfg.build_grid()?;
    let cs = cfg.build_coefficients(&grid)?;
    let spec = cfg.build_nonlinearity()?;
    let op = ReducedOperator::new(cs)?;
    let metric = match cfg.solver.metric {
        Some(m) => m,
        None if op.certify_star().is_ok() => Metric::AbStar,
        None => Metric::Ab,
    };
    EnergyProblem::new(op, spec, metric)
}

fn save_solution(rep: &SolutionReport, dir: &Path, formats: &[FieldFormat]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in formats {
        match f {
            FieldFormat::Csv => {
                io::save_field(&rep.u, dir.join("u.csv"))?;
                io::save_field(&rep.v, dir.join("v.csv"))?;
            }
            FieldFormat::Vtk => {
                io::save_vtk(&rep.u, "u", dir.join("u.vtk"))?;
                io::save_vtk(&rep.v, "v", dir.join("v.vtk"))?;
            }
        }
    }
    write_json(&dir.join(TRACE_FILE), &rep.trace)
}

const TRACE_FILE: &str = "trace.json";

fn solve_mp(cfg: &RunConfig) -> Result<(Value, bool)> {
    let prob = build_problem(cfg)?;
    let rep = mountain_pass(&prob, &cfg.solver)?;
    save_solution(&rep, &cfg.outputs.dir, &cfg.outputs.formats)?;
    let ok = rep.converged;
    Ok((
        json!({
            "command": "solve-mp",
            "status": if ok { "ok" } else { "not_converged" },
            "grid": grid_json(prob.grid()),
            "nonlinearity": prob.spec().name(),
            "solution": rep,
        }),
        ok,
    ))
}

fn solve_three(cfg: &RunConfig) -> Result<(Value, bool)> {
    let prob = build_problem(cfg)?;
    let three = three_solutions(&prob, &cfg.solver)?;
    let dir = &cfg.outputs.dir;
    save_solution(&three.positive, &dir.join("u1"), &cfg.outputs.formats)?;
    save_solution(&three.negative, &dir.join("u2"), &cfg.outputs.formats)?;
    if let Some(r) = &three.sign_changing {
        save_solution(r, &dir.join("u3"), &cfg.outputs.formats)?;
    }
    let ok = three.positive.converged
        && three.negative.converged
        && three.sign_changing.as_ref().is_some_and(|r| r.converged);
    Ok((
        json!({
            "command": "solve-three",
            "status": if ok { "ok" } else if three.sign_changing.is_none() { "sign_changing_not_found" } else { "not_converged" },
            "grid": grid_json(prob.grid()),
            "nonlinearity": prob.spec().name(),
            "energy_gap_u1_u2": (three.positive.energy - three.negative.energy).abs(),
            "solutions": three,
        }),
        ok,
    ))
}

#[derive(Debug, Serialize)]
struct VerifiedSolution {
    label: String,
    #[serde(flatten)]
    report: VerifyReport,
    passed: bool,
}

/// Solution directories: `dir` itself when it holds `u.csv`, otherwise its
/// subdirectories that do, in name order.
fn solution_dirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    if dir.join("u.csv").is_file() {
        let label = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "u".into());
        return Ok(vec![(label, dir.to_path_buf())]);
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.join("u.csv").is_file() {
            found.push((p.file_name().unwrap().to_string_lossy().into_owned(), p));
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(Error::invalid(format!("no u.csv under {}", dir.display())));
    }
    Ok(found)
}

fn verify_cmd(cfg: &RunConfig, solution: &Path) -> Result<(Value, bool)> {
    let prob = build_problem(cfg)?;
    let grid = *prob.grid();
    let mut out = Vec::new();
    for (label, dir) in solution_dirs(solution)? {
        let u = io::load_field(&grid, dir.join("u.csv"))?;
        let v = io::load_field(&grid, dir.join("v.csv"))?;
        let trace: Option<Vec<TraceEntry>> = match fs::read_to_string(dir.join(TRACE_FILE)) {
            Ok(t) => Some(serde_json::from_str(&t)?),
            Err(_) => None,
        };
        let report = verify_pair(&prob, &u, &v, cfg.solver.tol_sign, trace.as_deref())?;
        let passed = report.residual_1 <= VERIFY_TOL
            && report.residual_2 <= VERIFY_TOL
            && report.ps.as_ref().is_none_or(|p| p.bounded);
        out.push(VerifiedSolution {
            label,
            report,
            passed,
        });
    }
    let ok = out.iter().all(|s| s.passed);
    Ok((
        json!({
            "command": "verify",
            "status": if ok { "ok" } else { "failed" },
            "residual_tol": VERIFY_TOL,
            "solutions": out,
        }),
        ok,
    ))
}
