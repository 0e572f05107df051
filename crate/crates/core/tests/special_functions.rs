use lzkz::special::{pcf_d, pcf_d_scaled, Scaled};
use lzkz::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_in_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    loop {
        let w = c(rng.random_range(-r..r), rng.random_range(-r..r));
        if w.norm() <= r {
            return w;
        }
    }
}

/// 400 random points of the supported region with 30-digit reference
/// values stored as (ln|D|, arg D).
#[test]
fn reference_table_over_supported_region() {
    let data = include_str!("data/pcf_reference.csv");
    let mut total = 0;
    let mut unconverged = Vec::new();
    for line in data.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (p, z) = (c(f[0], f[1]), c(f[2], f[3]));
        let want = Scaled {
            mantissa: Complex64::from_polar(1.0, f[5]),
            log_scale: f[4],
        };
        total += 1;
        match pcf_d_scaled(p, z) {
            Ok(got) => {
                let err = got.rel_dist(want);
                assert!(err <= 1e-8, "p = {p}, z = {z}: relative error {err:e}");
            }
            Err(Error::Convergence(_)) => unconverged.push((p, z)),
            Err(e) => panic!("p = {p}, z = {z}: {e}"),
        }
    }
    // A few large-|p| interior points cannot be certified in double
    // precision; those must be reported, never returned silently wrong.
    assert!(
        unconverged.len() * 100 <= total,
        "{} of {total} unconverged: {unconverged:?}",
        unconverged.len()
    );
}

#[test]
fn recurrence_residual_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let p = random_in_disc(&mut rng, 49.0);
        let z = random_in_disc(&mut rng, 50.0);
        let d = |q: Complex64| pcf_d_scaled(q, z).unwrap();
        let (up, mid, down) = (d(p + 1.0), d(p), d(p - 1.0));
        // D_{p+1} − z D_p + p D_{p−1}, formed at a common scale.
        let res = up + mid.scale(-z) + down.scale(p);
        let bound = up.ln_abs().max(0.0);
        assert!(
            res.ln_abs() - bound <= (1e-7f64).ln(),
            "p = {p}, z = {z}: residual e^{} vs bound e^{bound}",
            res.ln_abs()
        );
        checked += 1;
    }
}

#[test]
fn weber_equation_residual_along_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let p = random_in_disc(&mut rng, 5.0);
        let theta = rng.random_range(-3.0..3.0_f64);
        let r = rng.random_range(0.5..12.0_f64);
        let dir = Complex64::from_polar(1.0, theta);
        let z = dir * r;
        let q = z * z / 4.0 - p - 0.5;
        let h = 0.02 / (1.0 + q.norm()).sqrt();
        let u = |k: f64| pcf_d(p, z + dir * (k * h)).unwrap();
        // Five-point second difference along the ray; (d/ds)² = dir² (d/dz)².
        let second = (-u(2.0) + 16.0 * u(1.0) - 30.0 * u(0.0) + 16.0 * u(-1.0) - u(-2.0))
            / (12.0 * h * h)
            / (dir * dir);
        let rhs = q * u(0.0);
        let scale = second.norm().max(rhs.norm());
        assert!(
            (second - rhs).norm() <= 1e-5 * scale,
            "p = {p}, z = {z}: residual {:e}",
            (second - rhs).norm() / scale
        );
    }
}
