mod common;

use common::{bits, cone_qp, cone_qp_enumerate, field, vec, DenseSystem};
use fhnvs::coefficients::constant_coeffs;
use fhnvs::energy::{EnergyProblem, Metric};
use fhnvs::nonlinearity::{linear_nonlinearity, power_nonlinearity};
use fhnvs::nonlocal::ReducedOperator;
use fhnvs::random::{gaussian_bump, noise_field, nonnegative_field, rng, smooth_field};
use fhnvs::solvers::{
    cone_project, disjoint_bumps, find_endpoint_g, mountain_pass, mountain_pass_from,
    neg_cone_project, newton_refine, three_solutions, ConeOptions, Constraint, SolverConfig,
};
use fhnvs::verify::SignClass;
use fhnvs::{Error, Grid, ScalarField};

fn problem(dim: usize, l: f64, n: usize, a: f64, b: f64, metric: Metric) -> EnergyProblem {
    let g = Grid::new(dim, l, n).unwrap();
    let op = ReducedOperator::new(constant_coeffs(&g, a, b, 1.0).unwrap()).unwrap();
    EnergyProblem::new(op, power_nonlinearity(3.0, dim).unwrap(), metric).unwrap()
}

fn fast() -> EnergyProblem {
    problem(1, 5.0, 127, 1.0, 3.0, Metric::AbStar)
}

#[test]
fn cone_projection_matches_dense_qp() {
    for (d, n) in [(1, 9), (1, 16), (2, 4), (2, 5), (2, 8), (3, 4)] {
        let g = Grid::new(d, 1.5, n).unwrap();
        let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap()).unwrap();
        let m = DenseSystem::constant(&g, 1.0, 3.0, 1.0).star();
        let mut r = rng(n as u64);
        for _ in 0..5 {
            let u = noise_field(&g, &mut r);
            let p = cone_project(&op, &u, &ConeOptions::default()).unwrap();
            assert!(p.converged);
            let oracle = if g.len() <= 16 {
                cone_qp_enumerate(&m, &vec(&u))
            } else {
                cone_qp(&m, &vec(&u))
            };
            let diff = p.pk.sub(&field(&g, &oracle)).unwrap().max_abs();
            assert!(diff <= 1e-8 * u.max_abs(), "d = {d}, n = {n}: {diff}");
        }
    }
}

#[test]
fn moreau_certificates_on_random_fields() {
    let prob = problem(2, 3.0, 15, 1.0, 3.0, Metric::AbStar);
    let mut r = rng(30);
    for k in 0..30 {
        let u = if k % 2 == 0 {
            noise_field(prob.grid(), &mut r)
        } else {
            smooth_field(prob.grid(), &mut r, 5)
        };
        let p = cone_project(prob.op(), &u, &ConeOptions::default()).unwrap();
        let c = &p.certificate;
        assert!(c.passed, "{c:?}");
        assert!(c.min_rel >= -1e-8 && c.orthogonality_rel <= 1e-8 && c.polar_sampled_rel <= 1e-8);
        let sum = p.pk.add(&p.polar).unwrap();
        assert!(sum.sub(&u).unwrap().max_abs() <= 1e-14 * u.max_abs());
    }
}

#[test]
fn cone_projection_fixed_points() {
    let prob = problem(2, 3.0, 15, 1.0, 3.0, Metric::AbStar);
    let g = *prob.grid();
    let u = nonnegative_field(&g, &mut rng(2));
    let p = cone_project(prob.op(), &u, &ConeOptions::default()).unwrap();
    assert_eq!(bits(p.pk.values()), bits(u.values()));
    assert_eq!(p.polar.max_abs(), 0.0);

    // −M⁻¹(bump) is in the polar cone
    let y = prob
        .op()
        .factorized_inverse(&gaussian_bump(&g, &[1.0, 0.0], 0.5))
        .unwrap()
        .scale(-1.0);
    let p = cone_project(prob.op(), &y, &ConeOptions::default()).unwrap();
    assert!(p.pk.max_abs() <= 1e-8 * y.max_abs());

    // −K mirrors K
    let u = noise_field(&g, &mut rng(5));
    let neg = neg_cone_project(prob.op(), &u, &ConeOptions::default()).unwrap();
    let pos = cone_project(prob.op(), &u.scale(-1.0), &ConeOptions::default()).unwrap();
    assert!(neg.pk.add(&pos.pk).unwrap().max_abs() <= 1e-12 * u.max_abs());
}

#[test]
fn cone_projection_needs_star_certificate() {
    let prob = problem(1, 2.0, 15, 1.0, 1.0, Metric::Ab);
    let u = ScalarField::constant(prob.grid(), 1.0);
    assert!(matches!(
        cone_project(prob.op(), &u, &ConeOptions::default()),
        Err(Error::Certification(_))
    ));
}

#[test]
fn endpoint_search() {
    let prob = fast();
    let g = *prob.grid();
    let bump = gaussian_bump(&g, &[0.0], 1.0);
    let e = find_endpoint_g(&prob, &bump, &SolverConfig::default()).unwrap();
    assert!(e.level < 0.0 && e.lambda0.is_finite());
    assert!(prob.energy(&e.g).unwrap() < 0.0);
    if e.doublings > 0 {
        assert!(e.half_level >= 0.0);
    }
    assert!(find_endpoint_g(&prob, &ScalarField::zeros(&g), &SolverConfig::default()).is_err());
}

#[test]
fn endpoint_search_fails_for_linear_f() {
    // on (−1, 1) the ab-norm dominates the L2 norm, so J(λu) = λ²(…) ≥ 0
    let g = Grid::new(1, 1.0, 31).unwrap();
    let op = ReducedOperator::new(constant_coeffs(&g, 1.0, 3.0, 1.0).unwrap()).unwrap();
    let prob = EnergyProblem::new(op, linear_nonlinearity(3.0).unwrap(), Metric::Ab).unwrap();
    let bump = gaussian_bump(&g, &[0.0], 0.3);
    let err = find_endpoint_g(&prob, &bump, &SolverConfig::default()).unwrap_err();
    assert!(
        matches!(err, Error::NotConverged { iterations: 60, .. }),
        "{err}"
    );
}

#[test]
fn newton_fixed_points() {
    let prob = fast();
    let z = ScalarField::zeros(prob.grid());
    let (u, rep) = newton_refine(&prob, &z, 1e-9).unwrap();
    assert_eq!(u.max_abs(), 0.0);
    assert!(rep.converged && rep.warning.is_some());

    let sol = mountain_pass(&prob, &SolverConfig::default()).unwrap();
    let (again, rep) = newton_refine(&prob, &sol.u, 1e-9).unwrap();
    assert_eq!(rep.iterations, 0);
    assert_eq!(bits(again.values()), bits(sol.u.values()));
}

#[test]
fn mountain_pass_fast_mode() {
    let prob = fast();
    let cfg = SolverConfig::default();
    let sol = mountain_pass(&prob, &cfg).unwrap();
    assert!(sol.converged, "{:?}", sol.warnings);
    assert!(sol.grad_norm <= 1e-6);
    assert!(sol.energy > 0.0);
    assert!(prob.norm(&sol.u).unwrap() > 1e-2);
    assert!(sol.residual_1 <= 1e-6 && sol.residual_2 <= 1e-6);
    assert!(!sol.collapsed);
    // inf over paths ≤ max over the straight path
    assert!(sol.energy <= sol.initial_path_max.unwrap() * (1.0 + 1e-9));
    // per-sweep monotone path level
    for w in sol.trace.windows(2) {
        assert!(w[1].level <= w[0].level);
    }
    let newton = sol.newton.as_ref().unwrap();
    assert!(newton.converged && newton.iterations <= 6);
    assert!(sol.ps.as_ref().unwrap().bounded);
}

#[test]
fn mountain_pass_odd_symmetry() {
    let prob = fast();
    let cfg = SolverConfig::default();
    let bump = gaussian_bump(prob.grid(), &[0.0], 1.25);
    let plus = mountain_pass_from(&prob, &cfg, &bump, Constraint::Free).unwrap();
    let minus = mountain_pass_from(&prob, &cfg, &bump.scale(-1.0), Constraint::Free).unwrap();
    assert!(plus.converged && minus.converged);
    assert!((plus.energy - minus.energy).abs() <= 1e-8 * plus.energy);
    assert!(plus.u.add(&minus.u).unwrap().max_abs() <= 1e-6 * plus.u.max_abs());
}

#[test]
fn mountain_pass_is_deterministic() {
    let prob = fast();
    let cfg = SolverConfig::default();
    let a = mountain_pass(&prob, &cfg).unwrap();
    let b = mountain_pass(&prob, &cfg).unwrap();
    assert_eq!(bits(a.u.values()), bits(b.u.values()));
    assert_eq!(a.trace, b.trace);
}

#[test]
fn three_solutions_fast_mode() {
    let prob = fast();
    let three = three_solutions(&prob, &SolverConfig::default()).unwrap();
    let (u1, u2) = (&three.positive, &three.negative);
    let u3 = three
        .sign_changing
        .as_ref()
        .expect("no sign-changing solution");
    assert_eq!(u1.sign_class, SignClass::Positive);
    assert_eq!(u2.sign_class, SignClass::Negative);
    assert_eq!(u3.sign_class, SignClass::SignChanging);
    assert_eq!(u1.sign_class_v, SignClass::Positive);
    assert_eq!(u2.sign_class_v, SignClass::Negative);
    assert!(u1.min_u > 0.0 && u1.min_v > 0.0);
    assert!((u1.energy - u2.energy).abs() <= 1e-8 * u1.energy);
    assert!(u3.energy > u1.energy);
    for s in [u1, u2, u3] {
        assert!(s.converged, "{}: {:?}", s.label, s.warnings);
        assert!(s.residual_1 <= 1e-6 && s.residual_2 <= 1e-6);
    }
}

#[test]
fn three_solutions_refuses_negative_e() {
    let prob = problem(1, 5.0, 63, 1.0, 1.0, Metric::Ab);
    assert!(matches!(
        three_solutions(&prob, &SolverConfig::default()),
        Err(Error::Certification(_))
    ));
}

#[test]
fn solver_config_validation() {
    let ok = SolverConfig::default();
    assert!(ok.validate().is_ok());
    for bad in [
        SolverConfig {
            path_points: 2,
            ..ok.clone()
        },
        SolverConfig {
            grad_tol: 0.0,
            ..ok.clone()
        },
        SolverConfig {
            descent_step: 1.5,
            ..ok.clone()
        },
        SolverConfig {
            rho_fraction: 1.0,
            ..ok.clone()
        },
        SolverConfig {
            restarts: 0,
            ..ok.clone()
        },
    ] {
        assert!(matches!(bad.validate(), Err(Error::Config { .. })));
    }
}

#[test]
fn bumps_have_disjoint_supports() {
    for (d, n) in [(1, 127), (2, 31), (3, 15)] {
        let g = Grid::new(d, 5.0, n).unwrap();
        for angle in [0.0, 0.7, 2.0] {
            let (w1, w2) = disjoint_bumps(&g, angle);
            assert!(w1.min() >= 0.0 && w2.max() <= 0.0);
            assert!(w1.max() > 0.0 && w2.min() < 0.0);
            let s1: Vec<usize> = (0..g.len()).filter(|&i| w1.values()[i] > 0.0).collect();
            let s2: Vec<usize> = (0..g.len()).filter(|&i| w2.values()[i] < 0.0).collect();
            let mut gap = f64::INFINITY;
            for &i in &s1 {
                let x = g.coords(i);
                for &j in &s2 {
                    let y = g.coords(j);
                    gap = gap.min((0..d).map(|k| (x[k] - y[k]).powi(2)).sum::<f64>().sqrt());
                }
            }
            assert!(gap >= 4.0 * g.spacing() - 1e-12, "d = {d}: gap {gap}");
        }
    }
}
