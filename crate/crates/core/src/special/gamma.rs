//! Complex gamma function via the Lanczos approximation (g = 7, nine
//! coefficients) with reflection for `Re z < 1/2`.
//!
//! Everything is computed in log space first so that arguments with large
//! imaginary part (where `|Γ|` decays like `e^{-π|Im z|/2}`) neither
//! underflow nor lose the phase.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(z)` on some branch: `exp(ln_gamma(z)) = Γ(z)`, but the imaginary
/// part is not the continuous log-gamma branch.
///
/// Returns `-inf` real part at the poles (non-positive integers).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        if is_nonpositive_integer(z) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        // Γ(z)Γ(1-z) = π / sin(πz)
        Complex64::new(PI.ln(), 0.0) - ln_sinpi(z) - ln_gamma(Complex64::new(1.0, 0.0) - z)
    } else {
        let zm = z - 1.0;
        let mut x = Complex64::new(LANCZOS[0], 0.0);
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            x += c / (zm + i as f64);
        }
        let t = zm + G + 0.5;
        HALF_LN_2PI + (zm + 0.5) * t.ln() - t + x.ln()
    }
}

/// `Γ(z)`. Poles map to an infinite value.
pub fn gamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// `1/Γ(z)`, entire; exactly zero at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `sin(πz)` with the real part reduced modulo 2 first, so integers give
/// exact zeros.
pub fn sinpi(z: Complex64) -> Complex64 {
    let x = reduce_mod2(z.re);
    Complex64::new(PI * x, PI * z.im).sin()
}

/// `x` reduced to `[-1, 1]` modulo 2 (the period of `sin(πx)`).
fn reduce_mod2(x: f64) -> f64 {
    x - 2.0 * (x / 2.0).round()
}

/// `ln sin(πz)` without overflow for large `|Im z|`.
fn ln_sinpi(z: Complex64) -> Complex64 {
    if z.im.abs() < 5.0 {
        return sinpi(z).ln();
    }
    let w = Complex64::new(reduce_mod2(z.re), z.im);
    let i = Complex64::i();
    if w.im > 0.0 {
        // sin(πw) = e^{-iπw} (1 - e^{2iπw}) · i/2
        -i * PI * w + (i * 0.5).ln() + (Complex64::new(1.0, 0.0) - (2.0 * i * PI * w).exp()).ln()
    } else {
        // sin(πw) = e^{iπw} (1 - e^{-2iπw}) · (-i/2)
        i * PI * w + (-i * 0.5).ln() + (Complex64::new(1.0, 0.0) - (-2.0 * i * PI * w).exp()).ln()
    }
}
