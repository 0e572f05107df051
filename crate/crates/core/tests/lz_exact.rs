use lzkz::lz::{
    amplitudes_at, anticrossing_state, chi_anticrossing, chi_from_time, classical_lz,
    lz_asymptotic, lz_probability, ode_oracle, ode_oracle_at, AmplitudePair, QuenchParams,
    ORACLE_TOL,
};
use lzkz::ode::dop853;
use lzkz::special::pcf_d;
use num_complex::Complex64;
use proptest::prelude::*;

fn params(t_a: f64) -> QuenchParams {
    QuenchParams::with_anneal_time(t_a).unwrap()
}

#[test]
fn closed_form_matches_direct_integration() {
    let start = anticrossing_state();
    for (t_a, t_end) in [(0.05, 4.0), (0.5, 10.0), (1.0, 5.0), (2.0, 10.0)] {
        let q = params(t_a);
        let chi = chi_anticrossing(&q).unwrap();
        let run = ode_oracle(&q, 0.0, t_end, &start, ORACLE_TOL).unwrap();
        for (t, want) in run.iter().step_by(50) {
            let got = amplitudes_at(*t, &q, &chi).unwrap();
            assert!(
                (got.alpha - want.alpha).norm() < 1e-8 && (got.beta - want.beta).norm() < 1e-8,
                "t_a = {t_a}, t = {t}: {got:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn backward_evolution_matches_integration() {
    // The oracle only integrates forward, so start it at the far point and
    // compare at the anticrossing.
    let q = params(1.0);
    let chi = chi_anticrossing(&q).unwrap();
    let early = amplitudes_at(-6.0, &q, &chi).unwrap();
    let back = ode_oracle_at(&q, -6.0, &early, &[0.0], ORACLE_TOL).unwrap()[0];
    let want = anticrossing_state();
    assert!((back.alpha - want.alpha).norm() < 1e-8);
    assert!((back.beta - want.beta).norm() < 1e-8);
}

#[test]
fn long_time_probability_approaches_limit() {
    // δ = 1: the residual oscillation at t = 200 is ~Δ t_a / t ≈ 1e-2 in
    // amplitude, so average |β|² over a late window instead of sampling it.
    let q = params(4.0);
    let chi = chi_anticrossing(&q).unwrap();
    let limit = lz_asymptotic(&q).unwrap();
    let n = 400;
    let mean: f64 = (0..n)
        .map(|k| lz_probability(300.0 + 100.0 * k as f64 / n as f64, &q, &chi).unwrap())
        .sum::<f64>()
        / n as f64;
    assert!((mean - limit).abs() < 1e-3, "{mean} vs {limit}");

    let at = lz_probability(200.0, &q, &chi).unwrap();
    let ode = ode_oracle_at(&q, 0.0, &anticrossing_state(), &[200.0], ORACLE_TOL).unwrap()[0];
    assert!((at - ode.p1()).abs() < 1e-6, "{at} vs {}", ode.p1());
}

#[test]
fn plateau_average_matches_limit_for_unit_anneal() {
    let q = params(1.0);
    let chi = chi_anticrossing(&q).unwrap();
    let limit = lz_asymptotic(&q).unwrap();
    let n = 500;
    let mean: f64 = (0..n)
        .map(|k| lz_probability(100.0 + 100.0 * k as f64 / n as f64, &q, &chi).unwrap())
        .sum::<f64>()
        / n as f64;
    assert!((mean - limit).abs() < 2e-3, "{mean} vs {limit}");
}

#[test]
fn full_sweep_from_ground_state_reproduces_classical_formula() {
    // Start deep in the past in the ground state of the diabatic bias and
    // run through the crossing; the excited fraction is e^{−2πδ}.
    for t_a in [0.05, 0.2, 0.5] {
        let q = params(t_a);
        let t0 = -60.0;
        let init = AmplitudePair::zero();
        let run = ode_oracle(&q, t0, 60.0, &init, ORACLE_TOL).unwrap();
        let tail: Vec<f64> = run
            .iter()
            .filter(|(t, _)| *t > 40.0)
            .map(|(_, a)| a.p1())
            .collect();
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let stayed = 1.0 - mean;
        let want = classical_lz(q.delta()).unwrap();
        assert!(
            (stayed - want).abs() < 5e-3,
            "t_a = {t_a}: {stayed} vs {want}"
        );
    }
}

#[test]
fn coefficients_from_early_state_track_integration() {
    let q = params(0.5);
    let init = AmplitudePair::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
    let chi = chi_from_time(&init, -2.0, &q).unwrap();
    let times = [-1.0, 0.0, 1.5, 3.0];
    let want = ode_oracle_at(&q, -2.0, &init, &times, ORACLE_TOL).unwrap();
    for (t, w) in times.iter().zip(want) {
        let got = amplitudes_at(*t, &q, &chi).unwrap();
        assert!((got.alpha - w.alpha).norm() < 1e-8, "t = {t}");
        assert!((got.beta - w.beta).norm() < 1e-8, "t = {t}");
    }
}

#[test]
fn parabolic_cylinder_solves_weber_along_a_ray() {
    // w'' = (z²/4 − p − 1/2) w along z = s e^{iπ/4}, integrated from the
    // closed form at s = 2 back to s = 0.5 and forward to s = 4.
    let p = Complex64::new(0.0, -0.125);
    let dir = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let d = |s: f64| pcf_d(p, dir * s).unwrap();
    let h = 1e-4;
    let start = d(2.0);
    let slope = (d(2.0 + h) - d(2.0 - h)) / (2.0 * h);
    let rhs = |s: f64, y: &[f64; 4]| {
        let z = dir * s;
        let w = Complex64::new(y[0], y[1]);
        let acc = dir * dir * (z * z / 4.0 - p - 0.5) * w;
        [y[2], y[3], acc.re, acc.im]
    };
    let y0 = [start.re, start.im, slope.re, slope.im];
    let out = dop853(rhs, 2.0, y0, &[3.0, 4.0], 1e-12, 1e-12).unwrap();
    for (s, y) in [3.0, 4.0].iter().zip(out) {
        let want = d(*s);
        let got = Complex64::new(y[0], y[1]);
        assert!(
            (got - want).norm() < 1e-6 * want.norm().max(1.0),
            "s = {s}: {got} vs {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_amplitudes_are_normalized(t_a in 0.02f64..2.0, t in -10.0f64..10.0) {
        let q = params(t_a);
        let chi = chi_anticrossing(&q).unwrap();
        let a = amplitudes_at(t, &q, &chi).unwrap();
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limit_is_a_probability_decreasing_in_anneal_time(t_a in 0.01f64..50.0, f in 1.01f64..3.0) {
        let p = lz_asymptotic(&params(t_a)).unwrap();
        let p2 = lz_asymptotic(&params(t_a * f)).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!(p2 < p);
    }
}

#[test]
fn early_diabatic_start_approaches_the_classical_coefficients() {
    let q = QuenchParams::with_anneal_time(1.0).unwrap();
    let delta = q.delta();
    let target = delta.sqrt() * (-std::f64::consts::PI * delta / 4.0).exp();
    let errors: Vec<(f64, f64)> = [-100.0, -1000.0, -10000.0]
        .iter()
        .map(|&t_i| {
            let chi = chi_from_time(&AmplitudePair::zero(), t_i, &q).unwrap();
            (
                chi.chi1().unwrap().norm(),
                (chi.chi2().unwrap().norm() - target).abs(),
            )
        })
        .collect();
    assert!(errors[0].0 < 2e-2 && errors[0].1 < 2e-2, "{errors:?}");
    for w in errors.windows(2) {
        let ratio = w[0].0 / w[1].0;
        assert!((5.0..20.0).contains(&ratio), "{errors:?}");
    }
    assert!(errors[2].0 < 1e-4 && errors[2].1 < 1e-4, "{errors:?}");
}
