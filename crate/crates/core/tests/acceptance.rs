// Numbered end-to-end checks at fixed tolerances. Each one prints a single
// [PASS] line so the suite output reads as a checklist; the numbers match
// the order of the pipeline (operator identities, change of variables,
// reduction, solvers, lift, hypothesis gates, degenerate geometry).

use std::f64::consts::PI;
use std::sync::Arc;

use polared::{
    assemble_reduced, build_change_of_variables, builtin_measure, check_hypotheses,
    divergence_residual, lift_profile, radial_apply, scalar_map, solve_collocation, solve_linear,
    solve_shooting_symmetric, BuiltinMeasure, ChangeOfVariables, CollocationInit,
    HypothesisConfig, Nonlinearity, ReducedProblem, ScalarMap, SmoothRadial, SolutionProfile,
    TruncatedDomain, Verdict,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn cv_on(kind: BuiltinMeasure, dim: u32, r0: f64) -> Arc<ChangeOfVariables> {
    let m = builtin_measure(kind, dim, false).unwrap();
    Arc::new(build_change_of_variables(&m, r0, 1e-12).unwrap())
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn c1_laplacian_identities() {
    // Delta(r^2) = 2n on flat space, any dimension
    let sq = SmoothRadial::new(|r| r * r, |r| 2.0 * r, |_| 2.0);
    for &n in &[2u32, 3, 5] {
        let m = builtin_measure(BuiltinMeasure::Euclidean, n, false).unwrap();
        for k in 0..25 {
            let r = 0.1 + 0.19 * k as f64;
            let lap = radial_apply(&m, &sq, r).unwrap();
            let err = (lap - 2.0 * n as f64).abs();
            assert!(err <= 1e-10, "Delta r^2 off by {err} at r={r}, n={n}");
        }
    }

    // Delta(cos r) = -2 cos r on the 2-sphere (first nonconstant eigenvalue)
    let cosr = SmoothRadial::new(f64::cos, |r| -r.sin(), |r| -r.cos());
    let m = builtin_measure(BuiltinMeasure::Sphere, 2, false).unwrap();
    for k in 0..25 {
        let r = 0.1 + (PI - 0.2) * k as f64 / 24.0;
        let lap = radial_apply(&m, &cosr, r).unwrap();
        let err = (lap + 2.0 * r.cos()).abs();
        assert!(err <= 1e-10, "Delta cos off by {err} at r={r}");
    }

    println!("[PASS] 1 laplacian identities: Delta(r^2)=2n (n=2,3,5) and Delta(cos r)=-2cos r on S^2, to 1e-10");
}

#[test]
fn c2_change_of_variables_closed_forms() {
    // phi = r on (0, inf), r0 = 1: J(r) = ln r
    let cv = cv_on(BuiltinMeasure::Euclidean, 2, 1.0);
    for k in 0..50 {
        let r = 0.05 * (400.0f64).powf(k as f64 / 49.0); // log-spaced 0.05 .. 20
        let err = (cv.forward(r).unwrap() - r.ln()).abs();
        assert!(err <= 1e-8, "ln r off by {err} at r={r}");
    }
    for k in 0..50 {
        let s = -2.5 + 5.0 * k as f64 / 49.0;
        let err = (cv.forward(cv.inverse(s).unwrap()).unwrap() - s).abs();
        assert!(err <= 1e-8, "round trip off by {err} at s={s}");
    }

    // phi = sin r on (0, pi), r0 = pi/2: J(r) = ln tan(r/2)
    let cv = cv_on(BuiltinMeasure::Sphere, 2, PI / 2.0);
    for k in 0..50 {
        let r = 0.06 + (PI - 0.12) * k as f64 / 49.0;
        let err = (cv.forward(r).unwrap() - (r / 2.0).tan().ln()).abs();
        assert!(err <= 1e-8, "ln tan(r/2) off by {err} at r={r}");
    }
    for k in 0..50 {
        let s = -3.0 + 6.0 * k as f64 / 49.0;
        let err = (cv.forward(cv.inverse(s).unwrap()).unwrap() - s).abs();
        assert!(err <= 1e-8, "round trip off by {err} at s={s}");
    }

    println!("[PASS] 2 change of variables: J = ln r and J = ln tan(r/2) at 50 points each, round trips, to 1e-8");
}

#[test]
fn c3_reduced_coefficient_identity() {
    let mut rng = StdRng::seed_from_u64(20240814);
    let cases: [(BuiltinMeasure, u32, f64, f64, f64); 6] = [
        (BuiltinMeasure::Euclidean, 2, 1.0, 0.2, 5.0),
        (BuiltinMeasure::Euclidean, 3, 1.0, 0.25, 3.0),
        (BuiltinMeasure::Sphere, 2, PI / 2.0, 0.3, PI - 0.3),
        (BuiltinMeasure::Sphere, 3, PI / 2.0, 0.4, PI - 0.4),
        (BuiltinMeasure::Hyperbolic, 2, 1.0, 0.2, 4.0),
        (BuiltinMeasure::FlatCylinder, 2, 0.0, -3.0, 3.0),
    ];
    for (kind, dim, r0, lo, hi) in cases {
        let m = builtin_measure(kind, dim, false).unwrap();
        let cv = Arc::new(build_change_of_variables(&m, r0, 1e-12).unwrap());
        let b: ScalarMap = scalar_map(|r: f64| 0.5 + 1.0 / (1.0 + r * r));
        let p = assemble_reduced(Arc::clone(&cv), b.clone(), Nonlinearity::power(0.5)).unwrap();
        for _ in 0..100 {
            let r = rng.gen_range(lo..hi);
            let s = cv.forward(r).unwrap();
            let (phi, _) = m.eval_measure(r).unwrap();
            let want = b(r) * phi * phi;
            let got = p.q(s).unwrap();
            assert!(
                (got - want).abs() <= 1e-7,
                "q(J(r)) = {got} but b phi^2 = {want} at r={r} on {kind:?} n={dim}"
            );
        }
    }

    // with b = 1 the flat reduction is q(s) = r(s)^{2(n-1)}
    for (dim, lo, hi) in [(2u32, 0.2, 5.0), (3u32, 0.3, 3.0)] {
        let cv = cv_on(BuiltinMeasure::Euclidean, dim, 1.0);
        let p = assemble_reduced(Arc::clone(&cv), scalar_map(|_| 1.0), Nonlinearity::power(0.5))
            .unwrap();
        for _ in 0..100 {
            let r = rng.gen_range(lo..hi);
            let s = cv.forward(r).unwrap();
            let want = r.powi(2 * (dim as i32 - 1));
            let got = p.q(s).unwrap();
            assert!((got - want).abs() <= 1e-7, "flat form off: {got} vs {want} at r={r}");
        }
    }

    println!("[PASS] 3 reduced coefficient: q(J(r)) = b(r) phi(r)^2 at 100 random radii per builtin measure, to 1e-7; flat case matches r(s)^(2(n-1))");
}

#[test]
fn c4_linear_solver_oracle() {
    // q = 1 on [-1, 1] with zero boundary values: z = (1 - s^2)/2
    let p = ReducedProblem::from_coefficient(scalar_map(|_| 1.0), Nonlinearity::constant());
    let d = TruncatedDomain::new(1.0, 199, 0.0).unwrap();
    let sol = solve_linear(&p, &d).unwrap();
    for (&s, &z) in sol.grid.iter().zip(&sol.values) {
        let err = (z - 0.5 * (1.0 - s * s)).abs();
        assert!(err <= 1e-9, "parabola off by {err} at s={s}");
    }

    // independent finite-difference route on 10^4+1 nodes, random smooth q
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let al = rng.gen_range(0.5..1.5);
        let be = rng.gen_range(0.1..0.5);
        let ga = rng.gen_range(0.3..0.8);
        let de = rng.gen_range(0.0..PI);
        let q = scalar_map(move |s: f64| al + be * (ga * s + de).cos().powi(2));
        let p = ReducedProblem::from_coefficient(q, Nonlinearity::constant());
        let d = TruncatedDomain::new(1.0, 9999, 0.0).unwrap();
        let green = solve_linear(&p, &d).unwrap();
        let fd = solve_collocation(&p, &d, CollocationInit::Flat(0.1)).unwrap();
        assert!(fd.converged);
        let gap = sup_gap(&green.values, &fd.values);
        worst = worst.max(gap);
        assert!(gap <= 1e-6, "green vs finite differences disagree by {gap}");
    }

    println!("[PASS] 4 linear solver: (1-s^2)/2 oracle to 1e-9; 5 random smooth q vs 10^4-node finite differences, worst gap {worst:.2e} <= 1e-6");
}

#[test]
fn c5_nonlinear_cross_validation() {
    // two independent nonlinear routes on the 2-sphere reduction, b = 1,
    // f = sqrt(z): q(s) = sech(s)^2
    let m = builtin_measure(BuiltinMeasure::Sphere, 2, false).unwrap();
    let cv = Arc::new(build_change_of_variables(&m, PI / 2.0, 1e-12).unwrap());
    let p = assemble_reduced(Arc::clone(&cv), scalar_map(|_| 1.0), Nonlinearity::power(0.5))
        .unwrap();
    let d = TruncatedDomain::new(3.0, 1599, 0.5).unwrap();
    let col = solve_collocation(&p, &d, CollocationInit::Default).unwrap();
    let sh = solve_shooting_symmetric(&p, &d, 1e-10).unwrap();
    assert!(col.converged && sh.converged);
    let gap = sup_gap(&col.values, &sh.values);
    assert!(gap <= 1e-5, "shooting vs collocation gap {gap}");

    // manufactured solution z* = exp(-s^2) of z'' + q sqrt(z) = 0 with
    // q = (2 - 4 s^2) exp(-s^2 / 2)
    let p = ReducedProblem::from_coefficient(
        scalar_map(|s: f64| (2.0 - 4.0 * s * s) * (-0.5 * s * s).exp()),
        Nonlinearity::power(0.5),
    );
    let bc = (-9.0f64).exp();
    let coarse = TruncatedDomain::new(3.0, 4999, bc).unwrap();
    let warm = solve_collocation(&p, &coarse, CollocationInit::Flat(bc + 1.0)).unwrap();
    let fine = TruncatedDomain::new(3.0, 39999, bc).unwrap();
    let init = resample(&warm, &fine);
    let sol = solve_collocation(&p, &fine, CollocationInit::Profile(init)).unwrap();
    assert!(sol.converged);
    let err = sol
        .grid
        .iter()
        .zip(&sol.values)
        .map(|(&s, &z)| (z - (-s * s).exp()).abs())
        .fold(0.0f64, f64::max);
    assert!(err <= 1e-7, "manufactured profile recovered only to {err}");

    println!("[PASS] 5 nonlinear cross-validation: shooting vs collocation gap {gap:.2e} <= 1e-5 on the sphere reduction; exp(-s^2) recovered to {err:.2e} <= 1e-7");
}

fn resample(from: &SolutionProfile, to: &TruncatedDomain) -> Vec<f64> {
    let grid = to.grid();
    grid.iter()
        .map(|&s| {
            let j = match from.grid.binary_search_by(|g| g.partial_cmp(&s).unwrap()) {
                Ok(j) => return from.values[j],
                Err(j) => j.clamp(1, from.grid.len() - 1),
            };
            let (s0, s1) = (from.grid[j - 1], from.grid[j]);
            let t = (s - s0) / (s1 - s0);
            from.values[j - 1] * (1.0 - t) + from.values[j] * t
        })
        .collect()
}

#[test]
fn c6_lift_and_residual_closure() {
    // solve in s on the plane (phi = r, s = ln r), lift back to r, and
    // measure the divergence-form residual on the lifted grid
    let m = builtin_measure(BuiltinMeasure::Euclidean, 2, false).unwrap();
    let cv = Arc::new(build_change_of_variables(&m, 1.0, 1e-12).unwrap());
    let b: ScalarMap = scalar_map(|r: f64| (-(r - 1.0) * (r - 1.0)).exp());
    let f = Nonlinearity::power(0.5);
    let p = assemble_reduced(Arc::clone(&cv), b.clone(), f.clone()).unwrap();

    let run = |n: usize| -> f64 {
        let d = TruncatedDomain::new(4.0, n, 1e-3).unwrap();
        let sol = solve_collocation(&p, &d, CollocationInit::Default).unwrap();
        assert!(sol.converged && sol.positive);
        let lifted = lift_profile(&sol, &cv).unwrap();
        let table = lifted.to_radial_function().unwrap();
        let res = divergence_residual(&m, &b, &f, &table).unwrap();
        res.scaled_sup(0.9)
    };

    let e800 = run(800);
    assert!(e800 <= 1e-5, "scaled residual {e800} at n=800");
    let e1600 = run(1600);
    let ratio = e800 / e1600;
    assert!(ratio >= 3.5, "decay factor {ratio} under grid doubling");

    println!("[PASS] 6 lift-and-residual closure: scaled sup {e800:.2e} <= 1e-5 on the interior 90%, doubling decay factor {ratio:.2} >= 3.5");
}

#[test]
fn c7_hypothesis_gates() {
    let config = HypothesisConfig {
        truncations: vec![1.0, 1.5, 2.0],
        ..HypothesisConfig::default()
    };

    // (i) across geometries: both ends of the transversal must run away
    let image_verdict = |kind: BuiltinMeasure, dim: u32, r0: f64| -> Verdict {
        let m = builtin_measure(kind, dim, false).unwrap();
        let cv = Arc::new(build_change_of_variables(&m, r0, 1e-10).unwrap());
        let p = assemble_reduced(cv, scalar_map(|_| 1.0), Nonlinearity::power(0.5)).unwrap();
        check_hypotheses(&p, &config).domain_image.verdict
    };
    assert_eq!(image_verdict(BuiltinMeasure::Euclidean, 2, 1.0), Verdict::Holds);
    assert_eq!(image_verdict(BuiltinMeasure::Sphere, 2, PI / 2.0), Verdict::Holds);
    assert_eq!(image_verdict(BuiltinMeasure::Sphere, 3, PI / 2.0), Verdict::Holds);
    assert_eq!(image_verdict(BuiltinMeasure::FlatCylinder, 2, 0.0), Verdict::Holds);
    assert_eq!(image_verdict(BuiltinMeasure::Hyperbolic, 2, 1.0), Verdict::Fails);
    assert_eq!(image_verdict(BuiltinMeasure::Hyperbolic, 3, 1.0), Verdict::Fails);
    // phi = r^2 integrates to a bounded transversal on the outer side
    assert_eq!(image_verdict(BuiltinMeasure::Euclidean, 3, 1.0), Verdict::Fails);

    // (iii) power sweep: z^p is admissible exactly for 0 < p < 1
    let growth_verdict = |f: Nonlinearity| -> Verdict {
        let p = ReducedProblem::from_coefficient(scalar_map(|_| 1.0), f);
        check_hypotheses(&p, &config).nonlinearity_growth.verdict
    };
    for k in 1..10 {
        let p = 0.1 * k as f64;
        assert_eq!(growth_verdict(Nonlinearity::power(p)), Verdict::Holds, "p = {p}");
    }
    for p in [1.0, 1.5, 2.0] {
        assert_eq!(growth_verdict(Nonlinearity::power(p)), Verdict::Fails, "p = {p}");
    }

    // q = 1: the f-stripped family z = (L^2 - s^2)/2 has sup L^2/2, which
    // runs away with L, so the report must not come out as holds
    let lin = check_hypotheses(
        &ReducedProblem::from_coefficient(scalar_map(|_| 1.0), Nonlinearity::power(1.0)),
        &HypothesisConfig::default(),
    );
    assert_ne!(lin.linear_positive.verdict, Verdict::Holds);
    assert_eq!(lin.linear_positive.verdict, Verdict::Inconclusive);
    assert_ne!(lin.overall, Verdict::Holds);

    println!("[PASS] 7 hypothesis gates: transversal-image verdicts correct on 7 geometries; growth verdicts match 0<p<1 on the power sweep; the q=1 linear family is not reported as holds");
}

#[test]
fn c8_flat_cylinder_identity_reduction() {
    // phi = 1: s = r, q = b, and the lift changes nothing
    let m = builtin_measure(BuiltinMeasure::FlatCylinder, 2, false).unwrap();
    let cv = Arc::new(build_change_of_variables(&m, 0.0, 1e-10).unwrap());
    for k in 0..25 {
        let r = -3.0 + 0.25 * k as f64;
        assert!((cv.forward(r).unwrap() - r).abs() <= 1e-12);
        assert!((cv.inverse(r).unwrap() - r).abs() <= 1e-12);
        assert!((cv.forward_deriv(r).unwrap() - 1.0).abs() <= 1e-12);
    }

    let b: ScalarMap = scalar_map(|r: f64| 1.2 + 0.4 * (0.7 * r).sin().powi(2));
    let p = assemble_reduced(Arc::clone(&cv), b.clone(), Nonlinearity::constant()).unwrap();
    for k in 0..25 {
        let s = -2.0 +exp_step(k);
        assert!((p.q(s).unwrap() - b(s)).abs() <= 1e-12, "q != b at s={s}");
    }

    let d = TruncatedDomain::new(2.0, 399, 0.25).unwrap();
    let reduced = solve_linear(&p, &d).unwrap();
    let lifted = lift_profile(&reduced, &cv).unwrap();
    assert!(sup_gap(&lifted.grid, &reduced.grid) <= 1e-12);
    assert!(sup_gap(&lifted.values, &reduced.values) <= 1e-12);
    assert!(sup_gap(&lifted.deriv, &reduced.deriv) <= 1e-12);

    // the same problem posed directly in r gives the same table
    let direct = ReducedProblem::from_coefficient(b.clone(), Nonlinearity::constant());
    let direct_sol = solve_linear(&direct, &d).unwrap();
    assert!(sup_gap(&direct_sol.values, &reduced.values) <= 1e-12);
    assert!(sup_gap(&direct_sol.deriv, &reduced.deriv) <= 1e-12);

    println!("[PASS] 8 flat cylinder: identity reduction (J=id, q=b) and lift verified end-to-end to 1e-12");
}

fn exp_step(k: usize) -> f64 {
    // 25 points over [0, 4], denser near 0
    4.0 * ((k as f64 / 24.0).powf(1.3))
}
