use lzkz::circuit::{
    basis_decompose, euler_decompose, mat_mul, max_abs_diff, prepare_anticrossing, step_unitary,
    trotter_evolve, trotter_states, unitarity_error, GateU3, LayeredCircuit, Mat2,
    PauliHamiltonian, TimeGrid, IDENTITY,
};
use lzkz::lz::{chi_anticrossing, lz_probability, ode_oracle_at, QuenchParams, ORACLE_TOL};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Haar-random U(2): uniform unit quaternion times a uniform phase.
fn haar(rng: &mut ChaCha8Rng) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (
        Complex64::new(q[0], q[1]) / n,
        Complex64::new(q[2], q[3]) / n,
    );
    let ph = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
    [[ph * a, -ph * b.conj()], [ph * b, ph * a.conj()]]
}

/// e^{M} by scaling and squaring of a 20-term Taylor series.
fn expm(m: &Mat2) -> Mat2 {
    let norm = m.iter().flatten().map(|v| v.norm()).sum::<f64>();
    let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = Complex64::new(0.5f64.powi(s), 0.0);
    let a: Mat2 = [
        [m[0][0] * scale, m[0][1] * scale],
        [m[1][0] * scale, m[1][1] * scale],
    ];
    let mut term = IDENTITY;
    let mut sum = IDENTITY;
    for k in 1..=20 {
        term = mat_mul(&term, &a);
        let f = Complex64::new(1.0 / k as f64, 0.0);
        term = [
            [term[0][0] * f, term[0][1] * f],
            [term[1][0] * f, term[1][1] * f],
        ];
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

#[test]
fn random_unitaries_round_trip_through_both_decompositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let u = haar(&mut rng);
        let g = euler_decompose(&u).unwrap();
        assert!((0.0..=PI).contains(&g.theta));
        assert!(max_abs_diff(&g.matrix(), &u) <= 1e-9);
        let layer = basis_decompose(&g);
        assert!(max_abs_diff(&layer.matrix(), &u) <= 1e-9);
        let again = euler_decompose(&layer.matrix()).unwrap();
        assert!(max_abs_diff(&again.matrix(), &u) <= 1e-9);
    }
}

#[test]
fn random_angles_compile_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let g = GateU3 {
            theta: rng.random_range(0.0..PI),
            phi: rng.random_range(-PI..PI),
            lambda: rng.random_range(-PI..PI),
            gamma: rng.random_range(-PI..PI),
        };
        assert!(max_abs_diff(&basis_decompose(&g).matrix(), &g.matrix()) <= 1e-9);
    }
}

#[test]
fn gimbal_cases_round_trip() {
    for phase in [0.0, 0.3, -2.0] {
        for m in [IDENTITY, lzkz::circuit::BasisGate::X.matrix()] {
            let p = Complex64::from_polar(1.0, phase);
            let u = [[m[0][0] * p, m[0][1] * p], [m[1][0] * p, m[1][1] * p]];
            let g = euler_decompose(&u).unwrap();
            assert!(max_abs_diff(&g.matrix(), &u) < 1e-12);
        }
    }
    let g = euler_decompose(&IDENTITY).unwrap();
    assert_eq!(g.lambda, 0.0);
}

#[test]
fn step_unitary_matches_series_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let h = PauliHamiltonian {
            x: rng.random_range(-3.0..3.0),
            y: rng.random_range(-3.0..3.0),
            z: rng.random_range(-3.0..3.0),
        };
        let m = h.matrix();
        let minus_i_dt = Complex64::new(0.0, -0.2);
        let a = [
            [m[0][0] * minus_i_dt, m[0][1] * minus_i_dt],
            [m[1][0] * minus_i_dt, m[1][1] * minus_i_dt],
        ];
        let d = max_abs_diff(step_unitary(&h, 0.2).matrix(), &expm(&a));
        assert!(d < 1e-12, "{d:e}");
    }
}

fn sup_error(n: usize) -> f64 {
    let q = QuenchParams::with_anneal_time(2.0).unwrap();
    let chi = chi_anticrossing(&q).unwrap();
    let g = TimeGrid::new(0.0, 10.0, n).unwrap();
    let c = trotter_evolve(&q, &g, &prepare_anticrossing()).unwrap();
    c.points()
        .iter()
        .map(|p| (p.p - lz_probability(p.t, &q, &chi).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn trotter_error_is_first_order() {
    let errs: Vec<f64> = [25, 50, 100, 200].iter().map(|&n| sup_error(n)).collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((r - 2.0).abs() <= 0.4, "{errs:?}");
    }
    assert!(errs[1] <= 0.05, "{errs:?}");
}

#[test]
fn single_small_step_agrees_with_oracle_to_first_order() {
    let q = QuenchParams::with_anneal_time(1.0).unwrap();
    let s0 = prepare_anticrossing();
    for dt in [1e-2, 1e-3] {
        let g = TimeGrid::new(0.0, dt, 1).unwrap();
        let s = trotter_states(&q, &g, &s0).unwrap()[1];
        let o = ode_oracle_at(&q, 0.0, &s0, &[dt], ORACLE_TOL).unwrap()[0];
        let err = (s.alpha - o.alpha).norm() + (s.beta - o.beta).norm();
        // The local error of left-endpoint sampling is O(dt²).
        assert!(err < dt * dt, "dt = {dt}: {err:e}");
    }
}

#[test]
fn deep_circuits_stay_unitary() {
    let q = QuenchParams::with_anneal_time(0.7).unwrap();
    let g = TimeGrid::new(-5.0, 20.0, 10_000).unwrap();
    let c = LayeredCircuit::compile(&q, &g, 1).unwrap();
    assert!(unitarity_error(&c.matrix(10_000)) < 1e-9);
}

#[test]
fn anticrossing_start_has_half_population() {
    let q = QuenchParams::with_anneal_time(1.0).unwrap();
    let g = TimeGrid::new(0.0, 10.0, 50).unwrap();
    let c = trotter_evolve(&q, &g, &prepare_anticrossing()).unwrap();
    assert!((c.points()[0].p - 0.5).abs() < 1e-15);
}

proptest! {
    #[test]
    fn trotter_conserves_norm(t_a in 0.05f64..5.0, n in 1usize..300, t_f in 0.5f64..20.0) {
        let q = QuenchParams::with_anneal_time(t_a).unwrap();
        let g = TimeGrid::new(0.0, t_f, n).unwrap();
        for s in trotter_states(&q, &g, &prepare_anticrossing()).unwrap() {
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }
}
