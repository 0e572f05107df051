//! Exact Landau–Zener dynamics.
//!
//! The drive is `H(t) = −(t/2t_a) σz − (Δ/2) σx` acting on amplitudes
//! `(α, β)` of the diabatic states `|0⟩, |1⟩`. With `δ = Δ² t_a / 4` and
//! `z = t e^{iπ/4}/√t_a` the solution is
//!
//! ```text
//! α = e^{−3iπ/4}/√δ · [δ χ1 D_{−1−iδ}(z) + χ2 D_{iδ}(iz)]
//! β =                  χ1 D_{−iδ}(z)    + χ2 D_{−1+iδ}(iz)
//! ```
//!
//! for constants `(χ1, χ2)` fixed by the initial condition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use crate::error::{Error, Result};
use crate::ode::dop853;
use crate::special::gamma::ln_gamma;
use crate::special::pcf::{pcf_d_scaled_unbounded, Scaled};

/// Largest adiabaticity accepted by the coefficient formulas.
pub const MAX_DELTA: f64 = 400.0;

/// Parameters of one linear quench: gap `Δ` and anneal time `t_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchParams {
    gap: f64,
    anneal_time: f64,
}

impl QuenchParams {
    pub fn new(gap: f64, anneal_time: f64) -> Result<Self> {
        if !(anneal_time > 0.0 && anneal_time.is_finite()) {
            return Err(Error::Domain(format!(
                "anneal time must be positive and finite, got {anneal_time}"
            )));
        }
        if !(gap >= 0.0 && gap.is_finite()) {
            return Err(Error::Domain(format!(
                "gap must be non-negative and finite, got {gap}"
            )));
        }
        Ok(QuenchParams { gap, anneal_time })
    }

    /// Unit gap, the setting used throughout the sweeps.
    pub fn with_anneal_time(anneal_time: f64) -> Result<Self> {
        Self::new(1.0, anneal_time)
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn anneal_time(&self) -> f64 {
        self.anneal_time
    }

    /// `δ = Δ² t_a / 4`.
    pub fn delta(&self) -> f64 {
        self.gap * self.gap * self.anneal_time / 4.0
    }

    /// `k = −iδ/2`.
    pub fn order_k(&self) -> Complex64 {
        Complex64::new(0.0, -self.delta() / 2.0)
    }

    /// Bias `ε(t) = t / t_a`.
    pub fn bias(&self, t: f64) -> f64 {
        t / self.anneal_time
    }

    /// `z(t) = t e^{iπ/4} / √t_a`.
    pub fn z_of_t(&self, t: f64) -> Complex64 {
        Complex64::from_polar(t / self.anneal_time.sqrt(), PI / 4.0)
    }
}

/// Amplitudes of `|0⟩` and `|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl AmplitudePair {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        AmplitudePair { alpha, beta }
    }

    /// Diabatic `|0⟩`.
    pub fn zero() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Diabatic `|1⟩`.
    pub fn one() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// Population of `|1⟩`.
    pub fn p1(&self) -> f64 {
        self.beta.norm_sqr()
    }

    fn check_normalized(&self, tol: f64) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > tol || !n.is_finite() {
            return Err(Error::Precondition(format!(
                "amplitudes must be normalized, |α|²+|β|² = {n}"
            )));
        }
        Ok(())
    }
}

/// Coefficients `(χ1, χ2)`, stored with a shared scale factor
/// `e^{log_scale}` because they grow like `e^{3πδ/4}`, together with
/// bounds on their absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiPair {
    chi1: Complex64,
    chi2: Complex64,
    log_scale: f64,
    ln_err: [f64; 2],
}

impl ChiPair {
    /// Exact user-supplied coefficients (error = representation rounding).
    pub fn new(chi1: Complex64, chi2: Complex64) -> Self {
        ChiPair {
            chi1,
            chi2,
            log_scale: 0.0,
            ln_err: [
                ln_or_neg_inf(EPS * chi1.norm()),
                ln_or_neg_inf(EPS * chi2.norm()),
            ],
        }
    }

    fn from_scaled(a: Scaled, b: Scaled, ln_err: [f64; 2]) -> Self {
        let s = match (a.is_zero(), b.is_zero()) {
            (true, true) => 0.0,
            (true, false) => b.log_scale,
            (false, true) => a.log_scale,
            (false, false) => a.log_scale.max(b.log_scale),
        };
        let un = |x: Scaled| {
            if x.is_zero() {
                x.mantissa
            } else {
                x.mantissa * (x.log_scale - s).exp()
            }
        };
        ChiPair {
            chi1: un(a),
            chi2: un(b),
            log_scale: s,
            ln_err,
        }
    }

    pub fn chi1(&self) -> Result<Complex64> {
        self.unscale(self.chi1)
    }

    pub fn chi2(&self) -> Result<Complex64> {
        self.unscale(self.chi2)
    }

    pub fn chi1_scaled(&self) -> Scaled {
        Scaled::new(self.chi1, self.log_scale)
    }

    pub fn chi2_scaled(&self) -> Scaled {
        Scaled::new(self.chi2, self.log_scale)
    }

    /// Bounds on the absolute errors of `(χ1, χ2)` (may be `inf` when the
    /// coefficients themselves exceed the `f64` range).
    pub fn abs_errors(&self) -> [f64; 2] {
        [self.ln_err[0].exp(), self.ln_err[1].exp()]
    }

    fn unscale(&self, m: Complex64) -> Result<Complex64> {
        let v = m * self.log_scale.exp();
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!(
                "coefficient magnitude e^{:.1} exceeds f64; use the scaled accessors",
                self.log_scale
            )))
        }
    }
}

const EPS: f64 = f64::EPSILON;

/// Absolute error allowed in an assembled amplitude.
pub const AMPLITUDE_TOL: f64 = 1e-9;

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A scaled value with the logarithm of its absolute error bound.
#[derive(Clone, Copy)]
struct Tracked {
    v: Scaled,
    ln_err: f64,
}

impl Tracked {
    fn from_rel(v: Scaled, rel: f64) -> Self {
        Tracked {
            v,
            ln_err: v.ln_abs() + ln_or_neg_inf(rel),
        }
    }

    fn exact(c: Complex64) -> Self {
        Tracked::from_rel(Scaled::from_complex(c), EPS)
    }

    fn mul(self, o: Tracked) -> Tracked {
        // |ab − âb̂| ≤ |a| err_b + |b| err_a (first order)
        Tracked {
            v: self.v * o.v,
            ln_err: log_add(self.v.ln_abs() + o.ln_err, o.v.ln_abs() + self.ln_err),
        }
    }

    fn add(self, o: Tracked) -> Tracked {
        let v = self.v + o.v;
        // rounding of the sum itself
        let round = ln_or_neg_inf(EPS) + self.v.ln_abs().max(o.v.ln_abs());
        Tracked {
            v,
            ln_err: log_add(log_add(self.ln_err, o.ln_err), round),
        }
    }

    fn scale(self, c: Complex64) -> Tracked {
        let l = c.norm().ln();
        Tracked {
            v: self.v.scale(c),
            ln_err: self.ln_err + l,
        }
    }

    fn neg(self) -> Tracked {
        self.scale(-Complex64::new(1.0, 0.0))
    }

    /// Plain value, failing if its error bound exceeds `tol`.
    fn finish(self, tol: f64, what: &str) -> Result<Complex64> {
        let v = self.v.value();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "{what} magnitude e^{:.1}",
                self.v.ln_abs()
            )));
        }
        if self.ln_err > tol.ln() {
            return Err(Error::Convergence(format!(
                "{what}: cancellation leaves an error bound of {:.1e} (> {tol:e})",
                self.ln_err.exp()
            )));
        }
        Ok(v)
    }
}

fn check_delta(params: &QuenchParams) -> Result<f64> {
    let d = params.delta();
    if d > MAX_DELTA {
        return Err(Error::OutOfRange(format!(
            "adiabaticity δ = {d} exceeds {MAX_DELTA}"
        )));
    }
    if d == 0.0 {
        return Err(Error::Domain(
            "the parabolic-cylinder representation needs δ > 0 (nonzero gap)".into(),
        ));
    }
    Ok(d)
}

/// Coefficients for the anticrossing start: the ground state
/// `(|0⟩ + |1⟩)/√2` of `H(0)` at `t = 0`.
///
/// Closed forms in gamma functions of `k = −iδ/2`, evaluated in log space.
pub fn chi_anticrossing(params: &QuenchParams) -> Result<ChiPair> {
    let delta = check_delta(params)?;
    let k = params.order_k();
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    // ik = δ/2 is real, so √(ik) = √(δ/2) and √(2ik) = √δ.
    let sqrt_ik = (delta / 2.0).sqrt();
    let sqrt_2ik = delta.sqrt();

    // χ1 = −2^k e^{iπk}/(4√(ik)) · (√(2ik) Γ(k) + (1+i) Γ(½+k)) / Γ(2k)
    let ratio1 = (ln_gamma(k + 0.5) - ln_gamma(k)).exp();
    let ln_chi1 = k * LN_2 + i * PI * k + ln_gamma(k) - ln_gamma(2.0 * k)
        + (sqrt_2ik + (one + i) * ratio1).ln();
    let chi1 = Scaled::new(
        Complex64::from_polar(1.0, ln_chi1.im) * (-1.0 / (4.0 * sqrt_ik)),
        ln_chi1.re,
    );

    // χ2 = e^{iπk}/2^{k+1} · (2ik Γ(½−k) + (1−i)√(2ik) Γ(1−k)) / Γ(1−2k)
    let ratio2 = (ln_gamma(one - k) - ln_gamma(0.5 - k)).exp();
    let ln_chi2 = i * PI * k - (k + 1.0) * LN_2 + ln_gamma(0.5 - k) - ln_gamma(one - 2.0 * k)
        + (delta + (one - i) * sqrt_2ik * ratio2).ln();
    let chi2 = Scaled::new(Complex64::from_polar(1.0, ln_chi2.im), ln_chi2.re);

    // The closed forms reconstruct (−1/√2, −1/√2); flip the global sign so
    // the coefficients reproduce the prepared state itself.
    let rel = 16.0 * EPS * (1.0 + PI * delta);
    let ln_rel = rel.ln();
    Ok(ChiPair::from_scaled(
        chi1.scale(-one),
        chi2.scale(-one),
        [chi1.ln_abs() + ln_rel, chi2.ln_abs() + ln_rel],
    ))
}

/// The four parabolic cylinder values entering the amplitudes at `z`:
/// `(D_{−1−iδ}(z), D_{iδ}(iz), D_{−iδ}(z), D_{−1+iδ}(iz))`.
fn basis_at(delta: f64, z: Complex64) -> Result<[Tracked; 4]> {
    let i = Complex64::i();
    let p = Complex64::new(0.0, delta);
    let d = |q: Complex64, w: Complex64| -> Result<Tracked> {
        let (v, est) = pcf_d_scaled_unbounded(q, w)?;
        Ok(Tracked::from_rel(v, est))
    };
    Ok([d(-1.0 - p, z)?, d(p, i * z)?, d(-p, z)?, d(p - 1.0, i * z)?])
}

fn chi_tracked(chi: &ChiPair) -> (Tracked, Tracked) {
    (
        Tracked {
            v: chi.chi1_scaled(),
            ln_err: chi.ln_err[0],
        },
        Tracked {
            v: chi.chi2_scaled(),
            ln_err: chi.ln_err[1],
        },
    )
}

fn beta_tracked(z: Complex64, delta: f64, chi: &ChiPair) -> Result<Tracked> {
    let p = Complex64::new(0.0, delta);
    let (v1, e1) = pcf_d_scaled_unbounded(-p, z)?;
    let (v2, e2) = pcf_d_scaled_unbounded(p - 1.0, Complex64::i() * z)?;
    let (x1, x2) = chi_tracked(chi);
    Ok(x1
        .mul(Tracked::from_rel(v1, e1))
        .add(x2.mul(Tracked::from_rel(v2, e2))))
}

/// Amplitudes at the complex point `z` for given coefficients.
///
/// Fails with a convergence error when cancellation between the two
/// terms leaves an absolute error bound above [`AMPLITUDE_TOL`]; the terms
/// grow like `e^{πδ}`, so this happens for δ beyond roughly 6.
pub fn amplitudes_at_z(
    z: Complex64,
    params: &QuenchParams,
    chi: &ChiPair,
) -> Result<AmplitudePair> {
    let delta = check_delta(params)?;
    let [a, b, _, _] = basis_at(delta, z)?;
    let (x1, x2) = chi_tracked(chi);
    let pre = Complex64::from_polar(1.0 / delta.sqrt(), -3.0 * PI / 4.0);
    let alpha = x1
        .mul(a)
        .scale(Complex64::new(delta, 0.0))
        .add(x2.mul(b))
        .scale(pre);
    let beta = beta_tracked(z, delta, chi)?;
    Ok(AmplitudePair::new(
        alpha.finish(AMPLITUDE_TOL, "α")?,
        beta.finish(AMPLITUDE_TOL, "β")?,
    ))
}

/// Amplitudes at real time `t`.
pub fn amplitudes_at(t: f64, params: &QuenchParams, chi: &ChiPair) -> Result<AmplitudePair> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    amplitudes_at_z(params.z_of_t(t), params, chi)
}

/// `|β(z(t))|²`, the population of `|1⟩` at time `t`.
pub fn lz_probability(t: f64, params: &QuenchParams, chi: &ChiPair) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let delta = check_delta(params)?;
    let beta = beta_tracked(params.z_of_t(t), delta, chi)?;
    Ok(beta.finish(AMPLITUDE_TOL, "β")?.norm_sqr())
}

/// Coefficients reproducing `initial` at the complex point `z_i`.
pub fn chi_general(
    initial: &AmplitudePair,
    z_i: Complex64,
    params: &QuenchParams,
) -> Result<ChiPair> {
    initial.check_normalized(1e-9)?;
    let delta = check_delta(params)?;
    let [a, b, c, e] = basis_at(delta, z_i)?;
    // Invert the 2×2 map (χ1, χ2) ↦ (e^{3iπ/4}√δ α, β).
    let a_prime =
        Tracked::exact(Complex64::from_polar(delta.sqrt(), 3.0 * PI / 4.0) * initial.alpha);
    let beta = Tracked::exact(initial.beta);
    let det = a
        .mul(e)
        .scale(Complex64::new(delta, 0.0))
        .add(b.mul(c).neg());
    if det.v.ln_abs() < (1e-14f64).ln() {
        return Err(Error::SingularDenominator(det.v.ln_abs().exp()));
    }
    let n1 = a_prime.mul(e).add(b.mul(beta).neg());
    let n2 = a
        .mul(beta)
        .scale(Complex64::new(delta, 0.0))
        .add(c.mul(a_prime).neg());
    // x = n/det: err ≤ err_n/|det| + |n| err_det/|det|²
    let div = |n: Tracked| -> (Scaled, f64) {
        let inv = Scaled::new(det.v.mantissa.inv(), -det.v.log_scale);
        let ln_det = det.v.ln_abs();
        let ln_err = log_add(n.ln_err - ln_det, n.v.ln_abs() + det.ln_err - 2.0 * ln_det);
        (n.v * inv, ln_err)
    };
    let (chi1, err1) = div(n1);
    let (chi2, err2) = div(n2);
    Ok(ChiPair::from_scaled(chi1, chi2, [err1, err2]))
}

/// [`chi_general`] for an initial condition given at real time `t_i`.
pub fn chi_from_time(initial: &AmplitudePair, t_i: f64, params: &QuenchParams) -> Result<ChiPair> {
    chi_general(initial, params.z_of_t(t_i), params)
}

/// Asymptotic transition probability `1 − e^{−3πδ/2} |χ2|² / δ` for the
/// anticrossing start.
pub fn lz_asymptotic(params: &QuenchParams) -> Result<f64> {
    if params.delta() == 0.0 {
        return Ok(0.5);
    }
    let delta = check_delta(params)?;
    let chi = chi_anticrossing(params)?;
    let ln_chi2 = chi.chi2_scaled().ln_abs();
    let x = 2.0 * ln_chi2 - 1.5 * PI * delta - delta.ln();
    Ok(-x.exp_m1())
}

/// Small-`t_a` expansion `½ − (√π/4) t_a^{1/2} + (√π/32)(π − ln 4) t_a^{3/2}`
/// truncated to `terms` ∈ {1, 2, 3}.
pub fn lz_asymptotic_series(t_a: f64, terms: usize) -> Result<f64> {
    if !(t_a >= 0.0) {
        return Err(Error::Domain(format!(
            "anneal time must be >= 0, got {t_a}"
        )));
    }
    let sp = PI.sqrt();
    let coeffs = [
        (0.5, 0.0),
        (-sp / 4.0, 0.5),
        (sp / 32.0 * (PI - 4.0_f64.ln()), 1.5),
    ];
    truncated_series(&coeffs, t_a, terms)
}

pub(crate) fn truncated_series(coeffs: &[(f64, f64)], x: f64, terms: usize) -> Result<f64> {
    if terms == 0 || terms > coeffs.len() {
        return Err(Error::Precondition(format!(
            "terms must be in 1..={}, got {terms}",
            coeffs.len()
        )));
    }
    Ok(coeffs[..terms]
        .iter()
        .map(|&(c, e)| if e == 0.0 { c } else { c * x.powf(e) })
        .sum())
}

/// Classical Landau–Zener probability `e^{−2πδ}` of staying in the initial
/// diabatic state after a full sweep from `t = −∞`.
pub fn classical_lz(delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("δ must be >= 0, got {delta}")));
    }
    Ok((-2.0 * PI * delta).exp())
}

/// The anticrossing preparation `(|0⟩ + |1⟩)/√2`.
pub fn anticrossing_state() -> AmplitudePair {
    AmplitudePair::new(
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    )
}

/// Default integration tolerance of the oracle.
pub const ORACLE_TOL: f64 = 1e-12;

/// Direct integration of `i d/dt (α, β) = H(t) (α, β)` with an 8th-order
/// adaptive Runge–Kutta method, sampled at `times` (ascending, starting at
/// or after `t_start`).
pub fn ode_oracle_at(
    params: &QuenchParams,
    t_start: f64,
    initial: &AmplitudePair,
    times: &[f64],
    tolerance: f64,
) -> Result<Vec<AmplitudePair>> {
    if !(1e-13..=1e-6).contains(&tolerance) {
        return Err(Error::Precondition(format!(
            "tolerance must lie in [1e-13, 1e-6], got {tolerance}"
        )));
    }
    initial.check_normalized(1e-9)?;
    let half_gap = params.gap() / 2.0;
    let inv_2ta = 0.5 / params.anneal_time();
    let rhs = |t: f64, y: &[f64; 4]| {
        // dα/dt = i(t/2t_a) α + i(Δ/2) β ;  dβ/dt = i(Δ/2) α − i(t/2t_a) β
        let e = t * inv_2ta;
        let (ar, ai, br, bi) = (y[0], y[1], y[2], y[3]);
        [
            -(e * ai + half_gap * bi),
            e * ar + half_gap * br,
            -(half_gap * ai - e * bi),
            half_gap * ar - e * br,
        ]
    };
    let y0 = [
        initial.alpha.re,
        initial.alpha.im,
        initial.beta.re,
        initial.beta.im,
    ];
    let ys = dop853(rhs, t_start, y0, times, tolerance, tolerance)?;
    Ok(ys
        .into_iter()
        .map(|y| AmplitudePair::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
        .collect())
}

/// Number of intervals in the uniform output grid of [`ode_oracle`].
pub const ORACLE_INTERVALS: usize = 1000;

/// [`ode_oracle_at`] on a uniform grid of `ORACLE_INTERVALS + 1` points
/// spanning `[t_start, t_end]`.
pub fn ode_oracle(
    params: &QuenchParams,
    t_start: f64,
    t_end: f64,
    initial: &AmplitudePair,
    tolerance: f64,
) -> Result<Vec<(f64, AmplitudePair)>> {
    if !(t_start < t_end) || !t_end.is_finite() || !t_start.is_finite() {
        return Err(Error::Precondition(format!(
            "need t_start < t_end, got [{t_start}, {t_end}]"
        )));
    }
    let times: Vec<f64> = (0..=ORACLE_INTERVALS)
        .map(|k| {
            if k == ORACLE_INTERVALS {
                t_end
            } else {
                t_start + (t_end - t_start) * k as f64 / ORACLE_INTERVALS as f64
            }
        })
        .collect();
    let amps = ode_oracle_at(params, t_start, initial, &times, tolerance)?;
    Ok(times.into_iter().zip(amps).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t_a: f64) -> QuenchParams {
        QuenchParams::with_anneal_time(t_a).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let q = QuenchParams::new(2.0, 0.5).unwrap();
        assert_eq!(q.delta(), 0.5);
        assert_eq!(q.order_k(), Complex64::new(0.0, -0.25));
        assert!(QuenchParams::new(1.0, 0.0).is_err());
        assert!(QuenchParams::new(1.0, -1.0).is_err());
        assert!(QuenchParams::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn anticrossing_reconstructs_prepared_state() {
        for t_a in [0.01, 0.1, 1.0, 2.0, 10.0] {
            let q = params(t_a);
            let chi = chi_anticrossing(&q).unwrap();
            let amp = amplitudes_at(0.0, &q, &chi).unwrap();
            let want = anticrossing_state();
            assert!(
                (amp.alpha - want.alpha).norm() < 1e-10,
                "t_a = {t_a}: {amp:?}"
            );
            assert!(
                (amp.beta - want.beta).norm() < 1e-10,
                "t_a = {t_a}: {amp:?}"
            );
        }
    }

    #[test]
    fn cancellation_is_reported_for_large_delta() {
        // Both terms are ~e^{πδ} ≈ 1e34 at δ = 25 while the sum is O(1).
        let q = params(100.0);
        let chi = chi_anticrossing(&q).unwrap();
        assert!(matches!(
            amplitudes_at(0.0, &q, &chi),
            Err(Error::Convergence(_))
        ));
        assert!(matches!(
            lz_probability(0.0, &q, &chi),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn chi2_modulus_reference() {
        // 30-digit evaluation of the closed form at δ = 0.25 (t_a = 1).
        let chi = chi_anticrossing(&params(1.0)).unwrap();
        let m = chi.chi2().unwrap().norm_sqr();
        assert!((m - CHI2_SQ_DELTA_QUARTER).abs() < 1e-12 * m, "{m}");
    }
    const CHI2_SQ_DELTA_QUARTER: f64 = 0.700_838_014_234_927_8;

    #[test]
    fn large_delta_is_scaled_not_overflowed() {
        let q = QuenchParams::new(1.0, 4.0 * 390.0).unwrap();
        let chi = chi_anticrossing(&q).unwrap();
        assert!(matches!(chi.chi2(), Err(Error::Overflow(_))));
        // P∞ decays like 1/(64δ²) for a start at the anticrossing.
        let p = lz_asymptotic(&q).unwrap();
        assert!((p * 64.0 * 390.0f64.powi(2) - 1.0).abs() < 1e-3, "{p}");
        let q = QuenchParams::new(1.0, 4.0 * 401.0).unwrap();
        assert!(matches!(chi_anticrossing(&q), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn probability_at_zero_is_half() {
        for t_a in [0.05, 0.5, 2.0] {
            let q = params(t_a);
            let chi = chi_anticrossing(&q).unwrap();
            assert!((lz_probability(0.0, &q, &chi).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn asymptotic_limits() {
        assert!((lz_asymptotic(&params(1e-8)).unwrap() - 0.5).abs() < 1e-4);
        let p = lz_asymptotic(&params(200.0)).unwrap();
        assert!((p - 6.250_820_737e-6).abs() < 1e-14, "{p}");
        assert_eq!(
            lz_asymptotic(&QuenchParams::new(0.0, 1.0).unwrap()).unwrap(),
            0.5
        );
    }

    #[test]
    fn asymptotic_reference_values() {
        // 30-digit evaluation of the closed form.
        for (t_a, want) in [
            (0.05, 0.40199266),
            (0.1, 0.36288711),
            (0.5, 0.21776636),
            (1.0, 0.13694890),
            (2.0, 0.06422947),
        ] {
            let p = lz_asymptotic(&params(t_a)).unwrap();
            assert!((p - want).abs() < 1e-8, "t_a = {t_a}: {p}");
        }
    }

    #[test]
    fn series_truncations() {
        assert_eq!(lz_asymptotic_series(0.0, 1).unwrap(), 0.5);
        assert_eq!(lz_asymptotic_series(0.0, 3).unwrap(), 0.5);
        let two = lz_asymptotic_series(0.04, 2).unwrap();
        assert!((two - (0.5 - PI.sqrt() / 4.0 * 0.2)).abs() < 1e-15);
        assert!(lz_asymptotic_series(0.1, 0).is_err());
        assert!(lz_asymptotic_series(0.1, 4).is_err());
        assert!(lz_asymptotic_series(-0.1, 2).is_err());
    }

    #[test]
    fn classical_formula() {
        assert_eq!(classical_lz(0.0).unwrap(), 1.0);
        assert!((classical_lz(LN_2 / (2.0 * PI)).unwrap() - 0.5).abs() < 1e-15);
        assert!(classical_lz(-1.0).is_err());
    }

    #[test]
    fn general_coefficients_round_trip() {
        let q = params(1.0);
        let init = AmplitudePair::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let z = q.z_of_t(1.0);
        let chi = chi_general(&init, z, &q).unwrap();
        let back = amplitudes_at_z(z, &q, &chi).unwrap();
        assert!((back.alpha - init.alpha).norm() < 1e-9);
        assert!((back.beta - init.beta).norm() < 1e-9);
    }

    #[test]
    fn general_agrees_with_anticrossing_at_origin() {
        for t_a in [0.1, 1.0, 3.0] {
            let q = params(t_a);
            let g = chi_general(&anticrossing_state(), Complex64::new(0.0, 0.0), &q).unwrap();
            let a = chi_anticrossing(&q).unwrap();
            assert!((g.chi1().unwrap() - a.chi1().unwrap()).norm() < 1e-9);
            assert!((g.chi2().unwrap() - a.chi2().unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn unnormalized_initial_state_rejected() {
        let q = params(1.0);
        let bad = AmplitudePair::new(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0));
        assert!(matches!(
            chi_general(&bad, Complex64::new(0.0, 0.0), &q),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn oracle_decoupled_keeps_moduli() {
        let q = QuenchParams::new(0.0, 1.0).unwrap();
        let init = AmplitudePair::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let run = ode_oracle(&q, -5.0, 5.0, &init, 1e-12).unwrap();
        for (_, a) in run {
            assert!((a.alpha.norm() - 0.6).abs() < 1e-10);
            assert!((a.beta.norm() - 0.8).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_rabi_when_bias_frozen() {
        // t_a → ∞ freezes ε ≈ 0: H = −(Δ/2)σx, |β|² = sin²(Δt/2).
        let q = QuenchParams::new(1.3, 1e12).unwrap();
        let run = ode_oracle(&q, 0.0, 20.0, &AmplitudePair::zero(), 1e-12).unwrap();
        for (t, a) in run {
            let want = (1.3 * t / 2.0).sin().powi(2);
            assert!((a.p1() - want).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn oracle_preconditions() {
        let q = params(1.0);
        let s = anticrossing_state();
        assert!(ode_oracle(&q, 1.0, 0.0, &s, 1e-10).is_err());
        assert!(ode_oracle(&q, 0.0, 1.0, &s, 1e-14).is_err());
        assert!(ode_oracle(&q, 0.0, 1.0, &s, 1e-5).is_err());
    }
}
