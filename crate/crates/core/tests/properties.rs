use heat_impulse::{
    assemble_terminal_map, build_basis, indicator_matrix, oracle_min_time, solve_ball_fixed_point,
    solve_ball_least_norm, solve_min_time, verify, ControlSpace, DomainSpec, Field,
    FixedPointOptions, ImpulseOperator, OracleGrid, Problem, ProblemSpec, SecularOptions, Status,
    TerminalMap,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

fn actuator() -> impl Strategy<Value = (f64, f64)> {
    (0.0..0.7f64, 0.1..0.3f64).prop_map(|(lo, w)| (lo, (lo + w).min(1.0)))
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> ProblemSpec {
    let y0: Vec<f64> = (0..n).map(|k| rng.random_range(-1.0..1.0) / (k + 1) as f64).collect();
    let mut y0 = Field::from_vec(y0);
    y0 = y0.scale(1.0 / y0.norm());
    let lo = rng.random_range(0.0..0.6);
    let hi = lo + rng.random_range(0.2..0.4);
    ProblemSpec::new(
        y0,
        DomainSpec::new(1.0, lo, hi).unwrap(),
        rng.random_range(0.1..0.3),
        rng.random_range(0.1..0.6),
        rng.random_range(0.0..0.03),
    )
    .with_modes(n)
}

/// Draws nontrivial instances until `count` are collected.
fn nontrivial_instances(seed: u64, n: usize, count: usize) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = Problem::new(&random_spec(&mut rng, n)).unwrap();
        if p.check_nontrivial().unwrap().nontrivial {
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_composes(c in coeffs(12), s in 0.0..0.3f64, t in 0.0..0.3f64) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 12).unwrap();
        let f = Field::from_vec(c);
        let two = basis.semigroup_apply(&basis.semigroup_apply(&f, s).unwrap(), t).unwrap();
        let one = basis.semigroup_apply(&f, s + t).unwrap();
        prop_assert!((&two - &one).norm() <= 1e-14 * (1.0 + f.norm()));
    }

    #[test]
    fn energy_decays_at_first_eigenvalue(c in coeffs(12), t in 0.001..0.5f64) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 12).unwrap();
        let f = Field::from_vec(c);
        let bound = (-basis.lambda1() * t).exp() * f.norm();
        prop_assert!(basis.semigroup_apply(&f, t).unwrap().norm() <= bound * (1.0 + 1e-14));
    }

    #[test]
    fn indicator_is_symmetric_with_unit_spectrum((lo, hi) in actuator()) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 16).unwrap();
        let x = indicator_matrix(&basis, &DomainSpec::new(1.0, lo, hi).unwrap());
        let m = x.matrix();
        prop_assert!((m - m.transpose()).amax() < 1e-15);
        let eig = m.clone().symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|e| (-1e-12..=1.0 + 1e-12).contains(e)));
        // The smallest eigenvalue shrinks quickly with N; at low N it is
        // well above rounding and must be strictly positive.
        let small = build_basis(&DomainSpec::full(1.0).unwrap(), 4).unwrap();
        let x4 = indicator_matrix(&small, &DomainSpec::new(1.0, lo, hi).unwrap());
        prop_assert!(x4.matrix().clone().cholesky().is_some());
    }

    #[test]
    fn indicator_is_monotone_in_the_actuator((lo, hi) in actuator(), grow in 0.0..0.2f64) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 12).unwrap();
        let small = indicator_matrix(&basis, &DomainSpec::new(1.0, lo, hi).unwrap());
        let big_hi = (hi + grow).min(1.0);
        let big = indicator_matrix(&basis, &DomainSpec::new(1.0, lo, big_hi).unwrap());
        let diff = big.matrix() - small.matrix();
        prop_assert!(diff.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12));
    }

    #[test]
    fn value_is_nonincreasing_in_bound(
        c in coeffs(10),
        (lo, hi) in actuator(),
        m1 in 0.0..1.0f64,
        dm in 0.0..1.0f64,
        dt in 0.0..0.2f64,
    ) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 10).unwrap();
        let x = indicator_matrix(&basis, &DomainSpec::new(1.0, lo, hi).unwrap());
        let b = ImpulseOperator::new(&x, ControlSpace::Actuator);
        let map = assemble_terminal_map(&basis, &b, &Field::from_vec(c), 0.01, 0.01 + dt).unwrap();
        let small = solve_ball_least_norm(&map, m1, SecularOptions::default()).unwrap();
        let large = solve_ball_least_norm(&map, m1 + dm, SecularOptions::default()).unwrap();
        prop_assert!(large.value <= small.value + 1e-12);
        let zero = solve_ball_least_norm(&map, 0.0, SecularOptions::default()).unwrap();
        prop_assert_eq!(zero.value, map.b.norm());
    }

    #[test]
    fn complementarity_holds(c in coeffs(10), (lo, hi) in actuator(), m in 0.01..2.0f64) {
        let basis = build_basis(&DomainSpec::full(1.0).unwrap(), 10).unwrap();
        let x = indicator_matrix(&basis, &DomainSpec::new(1.0, lo, hi).unwrap());
        let b = ImpulseOperator::new(&x, ControlSpace::Actuator);
        let map = assemble_terminal_map(&basis, &b, &Field::from_vec(c), 0.0, 0.02).unwrap();
        let s = solve_ball_least_norm(&map, m, SecularOptions::default()).unwrap();
        prop_assert!(s.multiplier >= 0.0);
        prop_assert!(s.u.norm() <= m * (1.0 + 1e-10));
        prop_assert!(s.multiplier * (s.u.norm() - m).abs() <= 1e-9 * (1.0 + s.multiplier));
    }

    #[test]
    fn value_decays_exponentially_after_impulse(
        seed in 0u64..1000,
        t in 0.0..0.3f64,
        s in 0.0..0.3f64,
    ) {
        let p = nontrivial_instances(seed, 8, 1).pop().unwrap();
        let tau = p.spec().tau;
        let lambda1 = p.basis().lambda1();
        let d0 = p.value(tau + t).unwrap();
        let d1 = p.value(tau + t + s).unwrap();
        prop_assert!(d1 <= (-lambda1 * s).exp() * d0 + 1e-10);
    }
}

#[test]
fn minimal_time_is_first_crossing() {
    for p in nontrivial_instances(11, 16, 10) {
        let sol = p.solve().unwrap();
        assert_eq!(sol.status, Status::Nontrivial);
        let spec = p.spec();
        let time_tol = spec.tolerances.time;
        let before = (sol.t_star - 10.0 * time_tol).max(spec.tau);
        assert!(p.value(before).unwrap() > spec.r);
        let slack = p.basis().lambda1() * spec.r * time_tol;
        assert!(sol.d_at_t_star <= spec.r + slack);
    }
}

#[test]
fn terminal_state_lies_on_target_sphere() {
    for p in nontrivial_instances(12, 16, 10) {
        let sol = p.solve().unwrap();
        let y = heat_impulse::terminal_state(&p, &sol).unwrap();
        let r = p.spec().r;
        assert!((y.norm() - r).abs() <= r * 1e-5, "{} vs {r}", y.norm());
    }
}

#[test]
fn optimal_control_is_unique_across_fixed_point_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for p in nontrivial_instances(13, 12, 5) {
        let sol = p.solve().unwrap();
        let map = p.terminal_map(sol.t_star).unwrap();
        let m = p.spec().bound;
        for _ in 0..10 {
            let init: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let init = Field::from_vec(init);
            let init = init.scale(m / init.norm());
            let fp = solve_ball_fixed_point(&map, m, &init, FixedPointOptions::default()).unwrap();
            assert!((&fp.u - &sol.u_star).norm() <= 1e-6 * m);
        }
    }
}

#[test]
fn maximum_condition_holds_against_random_controls() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for p in nontrivial_instances(14, 12, 5) {
        let sol = p.solve().unwrap();
        let cert = verify(&p, &sol).unwrap();
        let w = p.impulse().apply(&cert.adjoint_at_tau);
        let m = p.spec().bound;
        let best = w.inner(&sol.u_star);
        for _ in 0..100 {
            let v: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = Field::from_vec(v);
            let v = v.scale(m * rng.random_range(0.0..1.0) / v.norm());
            assert!(w.inner(&v) <= best + 1e-10 * (1.0 + best.abs()));
        }
    }
}

#[test]
fn solver_matches_oracle_on_two_modes() {
    let grid = OracleGrid::default();
    for p in nontrivial_instances(15, 2, 6) {
        let sol = p.solve().unwrap();
        let oracle = oracle_min_time(p.spec(), &grid).unwrap();
        assert!(
            (sol.t_star - oracle.t).abs() <= 2e-3,
            "solver {} oracle {}",
            sol.t_star,
            oracle.t
        );
    }
}

#[test]
fn secular_solution_beats_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let b = Field::from_vec((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
        let map = TerminalMap::from_parts(a, b).unwrap();
        let m = rng.random_range(0.1..1.0);
        let s = solve_ball_least_norm(&map, m, SecularOptions::default()).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..20_000 {
            let v = Field::from_vec((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
            let v = v.scale(m * rng.random_range(0.0..1.0f64).powf(0.25) / v.norm());
            best = best.min(map.value(&v));
        }
        assert!(s.value <= best + 1e-12);
        assert!(best - s.value <= 0.05 * (1.0 + s.value));
    }
}

#[test]
fn closed_form_solution_through_public_api() {
    let spec = ProblemSpec::new(Field::unit(1, 1), DomainSpec::full(1.0).unwrap(), 0.1, 0.5, 0.0);
    let sol = solve_min_time(&spec).unwrap();
    let expected = 5f64.ln() / std::f64::consts::PI.powi(2);
    assert!((sol.t_star - expected).abs() <= 1e-8);
    assert!((&sol.u_star + &Field::unit(64, 1).scale(0.5)).norm() <= 1e-10);
}
