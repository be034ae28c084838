//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line on stdout
//! (written past the test harness capture) and then asserts.
//!
//! Run with `cargo test --test acceptance -- --test-threads=1` for ordered output.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use common::{
    bits, cone_qp, cone_qp_enumerate, field, rel, sine_eigenvalue, sine_mode, vec, DenseSystem,
};
use fhnvs::coefficients::{constant_coeffs, example_sigma, gaussian_sigma, poincare_mu};
use fhnvs::energy::{EnergyProblem, Metric};
use fhnvs::nonlinearity::{
    alpha_for_p, critical_power, exponent_set_contains, linear_nonlinearity,
    merged_interval_contains, power_nonlinearity, shifted_power_nonlinearity, validate_hypotheses,
};
use fhnvs::nonlocal::ReducedOperator;
use fhnvs::random::{noise_field, rng, smooth_field};
use fhnvs::solvers::{cone_project, mountain_pass, three_solutions, ConeOptions, SolverConfig};
use fhnvs::spectral::{lambda1, nu_s, shifted_ball_diagnostic, DomainMask, NuOptions};
use fhnvs::verify::SignClass;
use fhnvs::{CoefficientSet, Grid, ScalarField};

struct Outcome {
    pass: bool,
    detail: String,
    /// Bit patterns of every number the verdict depends on.
    print: Vec<u64>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            detail: String::new(),
            print: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(what.as_ref());
        }
    }

    fn note(&mut self, v: f64) {
        self.print.push(v.to_bits());
    }

    fn notes(&mut self, v: &[f64]) {
        self.print.extend(bits(v));
    }
}

fn emit(id: &str, title: &str, out: &Outcome, elapsed: Duration) {
    let verdict = if out.pass { "PASS" } else { "FAIL" };
    let mut line = format!(
        "{verdict} criterion {id:<3} {title} ({:.2} s)",
        elapsed.as_secs_f64()
    );
    if !out.detail.is_empty() {
        line.push_str(": ");
        line.push_str(&out.detail);
    }
    let mut stdout = std::io::stdout().lock();
    // libtest progress marks share the line otherwise
    writeln!(stdout, "\n{line}").unwrap();
    stdout.flush().unwrap();
}

fn run(id: &str, title: &str, f: fn() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    emit(id, title, &out, elapsed);
    (out, elapsed)
}

fn reference_op(dim: usize, l: f64, n: usize) -> ReducedOperator {
    let g = Grid::new(dim, l, n).unwrap();
    ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap()).unwrap()
}

fn sign_changing_op(n: usize) -> ReducedOperator {
    let g = Grid::new(3, 4.0, n).unwrap();
    let b = example_sigma(&g, 1.5, 0.4, 0.5).unwrap();
    ReducedOperator::new(CoefficientSet::new(ScalarField::constant(&g, 1.0), b, 1.0).unwrap())
        .unwrap()
}

fn reference_problem(dim: usize, n: usize) -> EnergyProblem {
    let op = reference_op(dim, 5.0, n);
    EnergyProblem::new(op, power_nonlinearity(3.0, dim).unwrap(), Metric::AbStar).unwrap()
}

fn c1_symmetry() -> Outcome {
    let mut out = Outcome::new();
    let mut worst: f64 = 0.0;
    for (k, op) in [reference_op(3, 2.0, 11), sign_changing_op(11)]
        .iter()
        .enumerate()
    {
        let g = *op.grid();
        let a = op.coeffs().a().values();
        let w = g.quad_weight();
        let mut r = rng(100 + k as u64);
        for _ in 0..50 {
            let u = noise_field(&g, &mut r);
            let v = noise_field(&g, &mut r);
            let su = op.apply_sb(&u).unwrap();
            let sv = op.apply_sb(&v).unwrap();
            let dot = |p: &ScalarField, q: &ScalarField| {
                w * (0..g.len())
                    .map(|i| a[i] * p.values()[i] * q.values()[i])
                    .sum::<f64>()
            };
            let (x, y) = (dot(&u, &sv), dot(&v, &su));
            // x itself can cancel to near zero for noise fields; the Cauchy–Schwarz bound does not
            let scale = (dot(&u, &su) * dot(&v, &sv)).sqrt();
            worst = worst.max((x - y).abs() / scale);
            out.notes(&[x, y]);
        }
    }
    out.check(
        worst <= 1e-10,
        format!("worst relative asymmetry {worst:.3e}"),
    );
    out
}

fn c2_norm_identity() -> Outcome {
    let mut out = Outcome::new();
    let op = reference_op(3, 2.0, 9);
    let mut r = rng(200);
    let mut worst_c: f64 = 0.0;
    for _ in 0..50 {
        let e = op
            .norm_ab_identity_check(&noise_field(op.grid(), &mut r))
            .unwrap()
            .rel_err;
        worst_c = worst_c.max(e);
        out.note(e);
    }
    let op = sign_changing_op(9);
    let mut worst_s: f64 = 0.0;
    for _ in 0..50 {
        let e = op
            .norm_ab_identity_check(&smooth_field(op.grid(), &mut r, 4))
            .unwrap()
            .rel_err;
        worst_s = worst_s.max(e);
        out.note(e);
    }
    out.check(worst_c <= 1e-8, format!("constant: {worst_c:.3e}"));
    out.check(worst_s <= 1e-6, format!("sign-changing b: {worst_s:.3e}"));
    out
}

fn c3_factorization() -> Outcome {
    let mut out = Outcome::new();
    let op = reference_op(3, 2.0, 11);
    let g = *op.grid();
    let mut r = rng(300);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let w = if k % 2 == 0 {
            noise_field(&g, &mut r)
        } else {
            smooth_field(&g, &mut r, 4)
        };
        let u = op.factorized_inverse(&w).unwrap();
        let back = op.apply_star(&u).unwrap();
        let err = back
            .sub(&w)
            .unwrap()
            .values()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let norm = w.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(err / norm);
        out.notes(u.values());
    }
    out.check(worst <= 1e-7, format!("round trip {worst:.3e}"));

    // (μ + d)² / (μ + b) with b = 3, d = b − √β a = 2
    let mut eig: f64 = 0.0;
    let mut dense: f64 = 0.0;
    for (dim, n) in [(1, 9), (2, 9), (3, 5)] {
        let op = reference_op(dim, 1.5, n);
        let g = *op.grid();
        for ks in [[1, 1, 1], [2, 1, 3], [n, n, n]] {
            let ks = &ks[..dim];
            let phi = sine_mode(&g, ks);
            let mu = sine_eigenvalue(&g, ks);
            let want = phi.scale((mu + 2.0).powi(2) / (mu + 3.0));
            let fwd = op.apply_star(&phi).unwrap();
            eig = eig.max(fwd.sub(&want).unwrap().max_abs() / want.max_abs());
            let inv = op.factorized_inverse(&phi).unwrap();
            let want_inv = phi.scale((mu + 3.0) / (mu + 2.0).powi(2));
            eig = eig.max(inv.sub(&want_inv).unwrap().max_abs() / want_inv.max_abs());
        }
        let m = DenseSystem::constant(&g, 1.0, 3.0, 1.0).star();
        let w = noise_field(&g, &mut r);
        let want = m.lu().solve(&vec(&w)).unwrap();
        let got = op.factorized_inverse(&w).unwrap();
        dense = dense.max(got.sub(&field(&g, &want)).unwrap().max_abs() / want.amax());
    }
    out.note(eig);
    out.note(dense);
    out.check(eig <= 1e-8, format!("eigen rule {eig:.3e}"));
    out.check(dense <= 1e-8, format!("dense inverse {dense:.3e}"));
    out
}

fn c4a_spectral_oracle() -> Outcome {
    let mut out = Outcome::new();
    let g = Grid::new(3, 5.0, 15).unwrap();
    let full = DomainMask::full(&g);
    for c in [0.0, 1.0, 3.0] {
        let got = lambda1(&ScalarField::constant(&g, c), &full).unwrap();
        let want = c + 3.0 * (PI / 10.0).powi(2);
        out.note(got);
        out.check(
            rel(got, want) <= 0.02,
            format!("σ ≡ {c}: {got:.6} vs {want:.6}"),
        );
    }
    let sigma = noise_field(&g, &mut rng(400));
    let base = lambda1(&sigma, &full).unwrap();
    for t in [-2.0, 0.5, 7.0] {
        let shifted = lambda1(&sigma.map(|v| v + t), &full).unwrap();
        let err = (shifted - base - t).abs() / base.abs().max(1.0);
        out.note(shifted);
        out.check(err <= 1e-10, format!("shift {t}: {err:.3e}"));
    }
    out
}

/// Gaussian profile at fixed spacing h = 0.5, L = 4, 6, 8, 10, 12.
fn gaussian_sweep() -> Vec<(f64, f64)> {
    [4.0, 6.0, 8.0, 10.0, 12.0]
        .into_iter()
        .map(|l: f64| {
            let n = (2.0 * l / 0.5) as usize - 1;
            let g = Grid::new(3, l, n).unwrap();
            (
                l,
                lambda1(&gaussian_sigma(&g), &DomainMask::full(&g)).unwrap(),
            )
        })
        .collect()
}

fn c4b_gaussian_sweep() -> Outcome {
    let mut out = Outcome::new();
    let sweep = gaussian_sweep();
    for w in sweep.windows(2) {
        out.check(w[1].1 < w[0].1, format!("not decreasing at L = {}", w[1].0));
    }
    for &(_, v) in &sweep {
        out.note(v);
    }
    let last = sweep.last().unwrap().1;
    let floor = 3.0 * (PI / 24.0).powi(2);
    out.check(
        last < 0.05,
        format!("λ₁ = {last:.5} at L = 12, box floor 3(π/24)² = {floor:.5} already exceeds 0.05"),
    );
    out
}

fn c5_nu_consistency() -> Outcome {
    let mut out = Outcome::new();
    let g = Grid::new(2, 4.0, 23).unwrap();
    let sigma = smooth_field(&g, &mut rng(500), 4);
    let masks = [
        DomainMask::full(&g),
        DomainMask::ball(&g, &[0.0, 0.0], 2.0),
        DomainMask::ball(&g, &[1.5, -1.0], 1.0),
        DomainMask::ball(&g, &[-3.0, 3.0], 1.5),
        DomainMask::exterior(&g, 1.0),
        DomainMask::exterior(&g, 3.0),
        DomainMask::from_fn(&g, |x| x[0] > 0.0),
        DomainMask::from_fn(&g, |x| x[0].abs() + x[1].abs() < 2.5),
        DomainMask::from_fn(&g, |x| x[0] * x[1] > 0.0),
        DomainMask::from_fn(&g, |x| x[1] < -1.0 || x[1] > 1.0),
    ];
    let mut worst: f64 = 0.0;
    for m in &masks {
        let nu = nu_s(&sigma, m, 2.0, NuOptions::default()).unwrap().value;
        let l1 = lambda1(&sigma, m).unwrap();
        worst = worst.max(rel(nu, l1));
        out.notes(&[nu, l1]);
    }
    out.check(worst <= 1e-6, format!("ν₂ vs λ₁ {worst:.3e}"));

    let g = Grid::new(2, 6.0, 31).unwrap();
    let sigma = example_sigma(&g, 1.5, 0.5, poincare_mu(&g, 1.5).unwrap()).unwrap();
    let radius = 1.5;
    let centres: Vec<Vec<f64>> = (0..6)
        .map(|k| vec![(6.0 - radius) * k as f64 / 5.0, 0.0])
        .collect();
    let opts = NuOptions {
        restarts: 2,
        ..NuOptions::default()
    };
    let rep = shifted_ball_diagnostic(&sigma, radius, &centres, &[], 2.0, opts).unwrap();
    let march: Vec<f64> = rep.nu_values.iter().map(|e| e.nu.unwrap()).collect();
    out.notes(&march);
    for w in march.windows(2) {
        out.check(w[1] >= w[0], format!("march decreases: {march:?}"));
    }
    out
}

fn c6_exponents() -> Outcome {
    let mut out = Outcome::new();
    let mut disagreements = 0;
    for n in 3..=8usize {
        let nf = n as f64;
        let lo = 2.0f64.max(nf / 2.0);
        for k in 1..=10 {
            let alpha = lo + (nf - lo) * k as f64 / 10.0;
            let right = critical_power(n) + 0.5;
            for j in 0..200 {
                let p = 1.0 + (right - 1.0) * j as f64 / 199.0;
                if exponent_set_contains(alpha, n, p).unwrap()
                    != merged_interval_contains(alpha, n, p).unwrap()
                {
                    disagreements += 1;
                }
            }
        }
    }
    out.print.push(disagreements);
    out.check(
        disagreements == 0,
        format!("{disagreements} scan points disagree"),
    );

    let a34 = alpha_for_p(3, 4.0).unwrap();
    out.note(a34);
    out.check(a34 == 12.0, format!("α(3, 4) = {a34}"));
    for n in 3..=6usize {
        let nf = n as f64;
        let lo = (nf + 2.0 - 4.0 / nf) / (nf - 2.0);
        let hi = critical_power(n);
        for k in 0..200 {
            let p = lo + (hi - lo) * k as f64 / 200.0;
            let a = alpha_for_p(n, p).unwrap();
            out.note(a);
            out.check(a >= 2.0 * nf, format!("α({n}, {p}) = {a} < 2N"));
            out.check(
                exponent_set_contains(a, n, p).unwrap(),
                format!("p = {p} not in the set for α({n}, p)"),
            );
        }
    }
    out
}

fn c7_gradient() -> Outcome {
    let mut out = Outcome::new();
    for metric in [Metric::Ab, Metric::AbStar] {
        let g = Grid::new(2, 2.0, 9).unwrap();
        let op =
            ReducedOperator::with_tolerance(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap(), 1e-13, 0)
                .unwrap();
        let prob = EnergyProblem::new(op, power_nonlinearity(3.0, 2).unwrap(), metric)
            .unwrap()
            .with_outer_tolerance(1e-13);
        let mut r = rng(700);
        let mut orders = Vec::new();
        for _ in 0..20 {
            let u = smooth_field(&g, &mut r, 3).scale(4.0);
            let h = smooth_field(&g, &mut r, 3).scale(4.0);
            let exact = prob.inner(&prob.gradient(&u).unwrap(), &h).unwrap();
            let err = |d: f64| {
                let jp = prob.energy(&u.add(&h.scale(d)).unwrap()).unwrap();
                let jm = prob.energy(&u.sub(&h.scale(d)).unwrap()).unwrap();
                ((jp - jm) / (2.0 * d) - exact).abs()
            };
            let (e3, e4) = (err(1e-3), err(1e-4));
            out.notes(&[exact, e3, e4]);
            let scale = prob.norm(&h).unwrap().powi(3) * u.max_abs().max(1.0);
            out.check(
                e3 <= 1e-5 * scale + 1e-7,
                format!("{metric:?}: error {e3:.3e} at δ = 1e-3"),
            );
            if e4 > 1e-10 {
                orders.push((e3 / e4).log10());
            }
        }
        let bad = orders.iter().filter(|o| (**o - 2.0).abs() >= 0.2).count();
        out.check(
            orders.len() >= 15,
            format!("{metric:?}: {} pairs above the noise floor", orders.len()),
        );
        out.check(bad == 0, format!("{metric:?}: {bad} pairs off order 2"));
    }
    out
}

fn c8_mountain_pass() -> Outcome {
    let mut out = Outcome::new();
    let cfg = SolverConfig::default();
    for (dim, n, limit) in [(3, 15, 600.0), (1, 127, 10.0)] {
        let prob = reference_problem(dim, n);
        let t = Instant::now();
        let sol = mountain_pass(&prob, &cfg).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let norm = prob.norm(&sol.u).unwrap();
        let tag = format!("d = {dim}");
        out.check(
            sol.converged,
            format!("{tag}: not converged {:?}", sol.warnings),
        );
        out.check(
            sol.grad_norm <= 1e-6,
            format!("{tag}: ‖grad‖ = {:.3e}", sol.grad_norm),
        );
        out.check(sol.energy > 0.0, format!("{tag}: J = {}", sol.energy));
        out.check(norm > 1e-2, format!("{tag}: ‖u‖ = {norm:.3e}"));
        out.check(
            sol.residual_1 <= 1e-6,
            format!("{tag}: r1 = {:.3e}", sol.residual_1),
        );
        out.check(
            sol.residual_2 <= 1e-6,
            format!("{tag}: r2 = {:.3e}", sol.residual_2),
        );
        out.check(secs <= limit, format!("{tag}: {secs:.1} s > {limit} s"));
        out.notes(sol.u.values());
        out.notes(&[sol.energy, sol.grad_norm, sol.residual_1, sol.residual_2]);
    }
    out
}

fn c9_three_solutions() -> Outcome {
    let mut out = Outcome::new();
    let prob = reference_problem(3, 15);
    let t = Instant::now();
    let three = three_solutions(&prob, &SolverConfig::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (u1, u2) = (&three.positive, &three.negative);
    out.check(
        u1.sign_class == SignClass::Positive && u1.min_u > 0.0,
        format!("u₁ min {:.3e}", u1.min_u),
    );
    out.check(
        u2.sign_class == SignClass::Negative && u2.max_u < 0.0,
        format!("u₂ max {:.3e}", u2.max_u),
    );
    out.check(u1.min_v > 0.0, format!("v₁ min {:.3e}", u1.min_v));
    out.check(u2.max_v < 0.0, format!("v₂ max {:.3e}", u2.max_v));
    let gap = (u1.energy - u2.energy).abs() / u1.energy.abs();
    out.check(gap <= 1e-8, format!("J(u₁) vs J(u₂) {gap:.3e}"));
    match &three.sign_changing {
        Some(u3) => {
            out.check(
                u3.sign_class == SignClass::SignChanging,
                format!("u₃ is {:?}", u3.sign_class),
            );
            out.notes(u3.u.values());
        }
        None => out.check(false, "no sign-changing solution"),
    }
    for s in [Some(u1), Some(u2), three.sign_changing.as_ref()]
        .into_iter()
        .flatten()
    {
        out.check(s.converged, format!("{} not converged", s.label));
        out.check(
            s.residual_1 <= 1e-6 && s.residual_2 <= 1e-6,
            format!(
                "{}: r = ({:.3e}, {:.3e})",
                s.label, s.residual_1, s.residual_2
            ),
        );
        out.notes(&[s.energy, s.residual_1, s.residual_2]);
    }
    out.notes(u1.u.values());
    out.notes(u2.u.values());
    out.check(secs <= 1800.0, format!("{secs:.1} s"));
    out
}

fn c10_maximum_principle() -> Outcome {
    let mut out = Outcome::new();
    let op = reference_op(3, 5.0, 15);
    let rep = op.maxprinciple_check(50, 1000, 1e-10).unwrap();
    let f = rep.factorized.as_ref().unwrap();
    out.check(
        rep.b_inverse.violations == 0,
        format!("(−Δ+b)⁻¹: {} violations", rep.b_inverse.violations),
    );
    out.check(
        f.violations == 0,
        format!("factorized: {} violations", f.violations),
    );
    out.notes(&[rep.b_inverse.worst_min, f.worst_min]);
    for (d, n) in [(1, 9), (2, 9), (3, 5)] {
        let g = Grid::new(d, 2.0, n).unwrap();
        let sys = DenseSystem::constant(&g, 1.0, 3.0, 1.0);
        let b_inv = (&sys.lap + &sys.b).try_inverse().unwrap();
        let star_inv = sys.star().try_inverse().unwrap();
        let neg = b_inv
            .iter()
            .chain(star_inv.iter())
            .filter(|&&v| v < 0.0)
            .count();
        out.check(
            neg == 0,
            format!("d = {d}, n = {n}: {neg} negative entries"),
        );
        out.note(b_inv.min().min(star_inv.min()));
    }
    out
}

fn c11_moreau() -> Outcome {
    let mut out = Outcome::new();
    let prob = reference_problem(2, 15);
    let mut r = rng(1100);
    let mut failed = 0;
    for k in 0..30 {
        let u = if k % 2 == 0 {
            noise_field(prob.grid(), &mut r)
        } else {
            smooth_field(prob.grid(), &mut r, 5)
        };
        let p = cone_project(prob.op(), &u, &ConeOptions::default()).unwrap();
        let c = &p.certificate;
        if !(p.converged
            && c.min_rel >= -1e-8
            && c.orthogonality_rel <= 1e-8
            && c.polar_sampled_rel <= 1e-8)
        {
            failed += 1;
        }
        out.notes(&[c.min_rel, c.orthogonality_rel, c.polar_sampled_rel]);
    }
    out.check(failed == 0, format!("{failed} of 30 certificates failed"));

    let mut worst: f64 = 0.0;
    for (d, n) in [(1, 9), (1, 16), (1, 64), (2, 5), (2, 8), (3, 4)] {
        let g = Grid::new(d, 1.5, n).unwrap();
        let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap()).unwrap();
        let m = DenseSystem::constant(&g, 1.0, 3.0, 1.0).star();
        for _ in 0..5 {
            let u = noise_field(&g, &mut r);
            let p = cone_project(&op, &u, &ConeOptions::default()).unwrap();
            let want = if g.len() <= 16 {
                cone_qp_enumerate(&m, &vec(&u))
            } else {
                cone_qp(&m, &vec(&u))
            };
            worst = worst.max(p.pk.sub(&field(&g, &want)).unwrap().max_abs() / u.max_abs());
            out.notes(p.pk.values());
        }
    }
    out.check(worst <= 1e-8, format!("QP oracle mismatch {worst:.3e}"));
    out
}

fn c12_hypotheses() -> Outcome {
    let mut out = Outcome::new();
    let g = Grid::new(3, 5.0, 15).unwrap();
    let power = validate_hypotheses(&power_nonlinearity(3.0, 3).unwrap(), &g, 2000, 1);
    for h in ["h1", "h2", "h3", "h4", "h5"] {
        out.check(
            power.get(h).is_some_and(|c| c.passed),
            format!("power fails {h}"),
        );
    }
    let linear = validate_hypotheses(&linear_nonlinearity(3.0).unwrap(), &g, 500, 1);
    let h4 = linear.get("h4").unwrap();
    out.check(
        !h4.passed && h4.witness.is_some(),
        "linear f: no h4 witness",
    );
    let shifted = validate_hypotheses(&shifted_power_nonlinearity(3.0).unwrap(), &g, 500, 1);
    let h5 = shifted.get("h5").unwrap();
    out.check(
        !h5.passed && h5.witness.is_some(),
        "shifted power: no h5 witness",
    );
    for w in [&h4.witness, &h5.witness].into_iter().flatten() {
        out.notes(&[w.u, w.lhs, w.rhs]);
    }
    out
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 13] = [
    ("1", "operator symmetry", c1_symmetry),
    ("2", "norm identity", c2_norm_identity),
    ("3", "factorization identity", c3_factorization),
    (
        "4a",
        "spectral oracle and shift identity",
        c4a_spectral_oracle,
    ),
    ("4b", "gaussian sweep", c4b_gaussian_sweep),
    ("5", "nu_s consistency", c5_nu_consistency),
    ("6", "exponent calculus", c6_exponents),
    ("7", "gradient correctness", c7_gradient),
    ("8", "mountain pass", c8_mountain_pass),
    ("9", "three solutions", c9_three_solutions),
    ("10", "maximum principle", c10_maximum_principle),
    ("11", "moreau certificates", c11_moreau),
    ("12", "hypothesis validators", c12_hypotheses),
];

fn criterion(id: &str) {
    let (id, title, f) = CRITERIA.iter().find(|c| c.0 == id).unwrap();
    let (out, elapsed) = run(id, title, *f);
    if *id == "1" {
        assert!(
            elapsed.as_secs_f64() <= 30.0,
            "criterion 1 took {elapsed:?}"
        );
    }
    assert!(out.pass, "criterion {id}: {}", out.detail);
}

#[test]
fn criterion_01_operator_symmetry() {
    criterion("1");
}

#[test]
fn criterion_02_norm_identity() {
    criterion("2");
}

#[test]
fn criterion_03_factorization_identity() {
    criterion("3");
}

#[test]
fn criterion_04a_spectral_oracle() {
    criterion("4a");
}

#[test]
fn criterion_04b_gaussian_sweep() {
    criterion("4b");
}

#[test]
fn criterion_05_nu_consistency() {
    criterion("5");
}

#[test]
fn criterion_06_exponent_calculus() {
    criterion("6");
}

#[test]
fn criterion_07_gradient() {
    criterion("7");
}

#[test]
fn criterion_08_mountain_pass() {
    criterion("8");
}

#[test]
fn criterion_09_three_solutions() {
    criterion("9");
}

#[test]
fn criterion_10_maximum_principle() {
    criterion("10");
}

#[test]
fn criterion_11_moreau() {
    criterion("11");
}

#[test]
fn criterion_12_hypotheses() {
    criterion("12");
}

#[test]
fn criterion_13_determinism() {
    let t = Instant::now();
    let threads = std::env::var("FHNVS_THREADS").unwrap_or_else(|_| "1".into());
    let mut out = Outcome::new();
    out.check(threads.trim() == "1", format!("FHNVS_THREADS = {threads}"));
    for (id, _, f) in CRITERIA {
        let first = f().print;
        let second = f().print;
        out.check(!first.is_empty(), format!("{id}: empty fingerprint"));
        out.check(first == second, format!("{id} differs between runs"));
    }
    emit("13", "determinism", &out, t.elapsed());
    assert!(out.pass, "criterion 13: {}", out.detail);
}
