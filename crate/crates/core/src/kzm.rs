//! Adiabatic-impulse picture of the quench: the freeze-out time, the
//! resulting transition probability and its small-`t_a` series, the
//! jump-time protocol for reading an asymptotic probability off a finite
//! curve, and the three-parameter fit used to compare against data.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{nelder_mead, SimplexOptions};
use crate::lz::{chi_anticrossing, lz_probability, truncated_series, QuenchParams};

/// Matching constant `η` and gap `Δ` of the adiabatic-impulse picture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AIParams {
    eta: f64,
    gap: f64,
}

impl Default for AIParams {
    fn default() -> Self {
        AIParams {
            eta: eta_first_order_match(),
            gap: 1.0,
        }
    }
}

impl AIParams {
    pub fn new(eta: f64, gap: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!(
                "η must be positive and finite, got {eta}"
            )));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::Domain(format!(
                "gap must be positive and finite, got {gap}"
            )));
        }
        Ok(AIParams { eta, gap })
    }

    pub fn with_eta(eta: f64) -> Result<Self> {
        Self::new(eta, 1.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }
}

/// The value of `η` that makes the leading `√t_a` term of the
/// adiabatic-impulse series equal that of the exact asymptotic probability.
pub fn eta_first_order_match() -> f64 {
    PI / 4.0
}

fn check_anneal_time(t_a: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { t_a >= 0.0 } else { t_a > 0.0 };
    if !ok || !t_a.is_finite() {
        return Err(Error::Domain(format!("invalid anneal time {t_a}")));
    }
    Ok(())
}

/// Freeze-out time `t̂`, where the inverse gap equals `η t̂`:
/// `t̂ = t_a (Δ/√2) √(√(1 + 4/(Δ²η t_a)²) − 1)`.
pub fn lz_jump_time_hat(t_a: f64, ai: &AIParams) -> Result<f64> {
    check_anneal_time(t_a, false)?;
    let x = ai.gap * ai.gap * ai.eta * t_a;
    let q = 4.0 / (x * x);
    // √(1+q) − 1 rewritten without cancellation for small q
    let inner = q / ((1.0 + q).sqrt() + 1.0);
    Ok(t_a * ai.gap / 2f64.sqrt() * inner.sqrt())
}

/// The two algebraic forms of the adiabatic-impulse probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiProbability {
    /// `½ (1 − 1/√(1 + ε̂²))` with `ε̂ = t̂ / t_a` the bias at the freeze-out.
    pub via_bias: f64,
    /// `½ − ½ √(1 − 2/((η t_a)² + η t_a √((η t_a)² + 4) + 2))`.
    pub via_radical: f64,
}

impl AiProbability {
    pub fn value(&self) -> f64 {
        self.via_radical
    }
}

/// Adiabatic-impulse transition probability for a start in the ground state
/// at the anticrossing. Only defined for `Δ = 1`.
pub fn p_ai(t_a: f64, ai: &AIParams) -> Result<AiProbability> {
    check_anneal_time(t_a, true)?;
    if ai.gap != 1.0 {
        return Err(Error::Precondition(format!(
            "the adiabatic-impulse probability assumes Δ = 1, got {}",
            ai.gap
        )));
    }
    let via_bias = if t_a == 0.0 {
        0.5
    } else {
        let eps_hat = lz_jump_time_hat(t_a, ai)? / t_a;
        0.5 * (1.0 - 1.0 / (1.0 + eps_hat * eps_hat).sqrt())
    };
    let x = ai.eta * t_a;
    let via_radical = 0.5 - 0.5 * (1.0 - 2.0 / (x * x + x * (x * x + 4.0).sqrt() + 2.0)).sqrt();
    Ok(AiProbability {
        via_bias,
        via_radical,
    })
}

/// `½ − (√η/2) t_a^{1/2} + (η√η/8) t_a^{3/2}` truncated to `terms` ∈ {1, 2, 3}.
pub fn p_ai_series(t_a: f64, ai: &AIParams, terms: usize) -> Result<f64> {
    check_anneal_time(t_a, true)?;
    let se = ai.eta.sqrt();
    let coeffs = [(0.5, 0.0), (-se / 2.0, 0.5), (ai.eta * se / 8.0, 1.5)];
    truncated_series(&coeffs, t_a, terms)
}

/// Where the samples of a [`TransitionCurve`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Trotter,
    Lindblad,
    Shots,
    External,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Trotter => "trotter",
            Provenance::Lindblad => "lindblad",
            Provenance::Shots => "shots",
            Provenance::External => "external",
        }
    }
}

/// One sample: time, layer index, population of `|1⟩`, and the
/// readout-mitigated population when there is one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub layer: usize,
    pub p: f64,
    pub p_mitigated: Option<f64>,
}

impl CurvePoint {
    pub fn new(t: f64, layer: usize, p: f64) -> Self {
        CurvePoint {
            t,
            layer,
            p,
            p_mitigated: None,
        }
    }

    /// The value used for estimates: mitigated when available.
    pub fn value(&self) -> f64 {
        self.p_mitigated.unwrap_or(self.p)
    }
}

const PROBABILITY_SLACK: f64 = 1e-9;

/// Population of `|1⟩` sampled along one quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCurve {
    points: Vec<CurvePoint>,
    params: QuenchParams,
    provenance: Provenance,
    outside_unit_interval: bool,
}

impl TransitionCurve {
    pub fn new(
        points: Vec<CurvePoint>,
        params: QuenchParams,
        provenance: Provenance,
    ) -> Result<Self> {
        if points.iter().any(|q| !q.t.is_finite()) {
            return Err(Error::Precondition("curve times must be finite".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::Precondition(format!(
                "curve times must increase strictly, found {} then {}",
                w[0].t, w[1].t
            )));
        }
        let in_unit = |p: f64| (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p);
        if let Some(q) = points.iter().find(|q| !in_unit(q.p)) {
            return Err(Error::Precondition(format!(
                "probability {} at t = {} is outside [0, 1]",
                q.p, q.t
            )));
        }
        let mut outside = false;
        for q in &points {
            if let Some(m) = q.p_mitigated {
                if !m.is_finite() {
                    return Err(Error::Precondition(format!(
                        "mitigated value {m} at t = {}",
                        q.t
                    )));
                }
                if !in_unit(m) {
                    if !matches!(provenance, Provenance::Shots | Provenance::External) {
                        return Err(Error::Precondition(format!(
                            "mitigated value {m} outside [0, 1] on a {} curve",
                            provenance.as_str()
                        )));
                    }
                    outside = true;
                }
            }
        }
        Ok(TransitionCurve {
            points,
            params,
            provenance,
            outside_unit_interval: outside,
        })
    }

    /// Exact curve from the anticrossing at `t_k = k t_f / intervals`.
    pub fn analytic(params: QuenchParams, t_f: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(t_f > 0.0) {
            return Err(Error::Precondition(format!(
                "need t_f > 0 and at least one interval, got t_f = {t_f}, {intervals}"
            )));
        }
        let chi = chi_anticrossing(&params)?;
        let points = (0..=intervals)
            .map(|k| {
                let t = t_f * k as f64 / intervals as f64;
                Ok(CurvePoint::new(t, k, lz_probability(t, &params, &chi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, params, Provenance::Analytic)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn params(&self) -> &QuenchParams {
        &self.params
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// True when some mitigated value lies outside `[0, 1]`.
    pub fn outside_unit_interval(&self) -> bool {
        self.outside_unit_interval
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples required by [`jump_time_star`].
pub const MIN_JUMP_SAMPLES: usize = 200;
/// Tail samples required by [`asymptotic_estimate`].
pub const MIN_TAIL_SAMPLES: usize = 5;
const REFINE_FACTOR: usize = 10;

/// First zero of `d²P/dt²` after `t = 0` on an analytic curve.
///
/// The sign change is located on the samples, resampled ten times more
/// densely around it, and bisected on the centered second difference of
/// the exact probability.
pub fn jump_time_star(curve: &TransitionCurve) -> Result<f64> {
    if curve.provenance != Provenance::Analytic {
        return Err(Error::Precondition(format!(
            "the jump time is taken from the analytic curve, got a {} curve",
            curve.provenance.as_str()
        )));
    }
    if curve.len() < MIN_JUMP_SAMPLES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_JUMP_SAMPLES} samples, got {}",
            curve.len()
        )));
    }
    let pts = &curve.points;
    let second: Vec<(usize, f64)> = (1..pts.len() - 1)
        .filter(|&i| pts[i].t > 0.0)
        .map(|i| (i, second_difference(&pts[i - 1..=i + 1])))
        .filter(|&(_, d)| d != 0.0)
        .collect();
    let bracket = second
        .windows(2)
        .find(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0));
    let Some((i, j)) = bracket else {
        return Err(Error::NotFound(format!(
            "no sign change of d²P/dt² on [0, {}]",
            pts[pts.len() - 1].t
        )));
    };

    let params = curve.params;
    let chi = chi_anticrossing(&params)?;
    let h = (pts[j].t - pts[i].t) / REFINE_FACTOR as f64;
    let g = |t: f64| -> Result<f64> {
        let p = |s: f64| lz_probability(s, &params, &chi);
        Ok((p(t + h)? - 2.0 * p(t)? + p(t - h)?) / (h * h))
    };

    let lo = pts[i - 1].t.max(h);
    let hi = pts[(j + 1).min(pts.len() - 1)].t;
    let steps = ((hi - lo) / h).round() as usize;
    let mut a = lo;
    let mut ga = g(a)?;
    for k in 1..=steps {
        let b = if k == steps { hi } else { lo + k as f64 * h };
        let gb = g(b)?;
        if ga != 0.0 && gb != 0.0 && ga.signum() != gb.signum() {
            return bisect(&g, a, b, ga);
        }
        if gb != 0.0 {
            a = b;
            ga = gb;
        }
    }
    Err(Error::NotFound(format!(
        "sign change near t = {} did not survive refinement",
        pts[i].t
    )))
}

fn second_difference(w: &[CurvePoint]) -> f64 {
    let (h1, h2) = (w[1].t - w[0].t, w[2].t - w[1].t);
    2.0 * ((w[2].p - w[1].p) / h2 - (w[1].p - w[0].p) / h1) / (h1 + h2)
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a <= 1e-13 * m.abs().max(1.0) {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Plateau average of a finite-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub mean: f64,
    /// Half the peak-to-peak spread of the averaged samples.
    pub zeta_eb: f64,
    pub t_star: f64,
    pub tail_samples: usize,
}

/// Mean and half-spread of the samples with `t ≥ t_star`.
pub fn asymptotic_estimate(curve: &TransitionCurve, t_star: f64) -> Result<AsymptoticEstimate> {
    let (Some(first), Some(last)) = (curve.points.first(), curve.points.last()) else {
        return Err(Error::Precondition("empty curve".into()));
    };
    if !(first.t..=last.t).contains(&t_star) {
        return Err(Error::Precondition(format!(
            "t* = {t_star} lies outside the curve span [{}, {}]",
            first.t, last.t
        )));
    }
    let tail: Vec<f64> = curve
        .points
        .iter()
        .filter(|q| q.t >= t_star)
        .map(CurvePoint::value)
        .collect();
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail {
            t_star,
            found: tail.len(),
            needed: MIN_TAIL_SAMPLES,
        });
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(AsymptoticEstimate {
        mean,
        zeta_eb: (hi - lo) / 2.0,
        t_star,
        tail_samples: tail.len(),
    })
}

/// Result of fitting `x1 − x2 √(1 − 2/((x3 t)² + x3 t √((x3 t)² + 4) + 2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AIFit {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// The fit model at `t_a` for parameters `(x1, x2, x3)`.
pub fn ai_model(x: &[f64; 3], t_a: f64) -> f64 {
    let u = x[2] * t_a;
    x[0] - x[1] * (1.0 - 2.0 / (u * u + u * (u * u + 4.0).sqrt() + 2.0)).sqrt()
}

/// Least-squares fit of [`ai_model`] from the start `(½, ½, π/4)`.
///
/// Hitting the iteration cap is reported through `converged`, not as an
/// error.
pub fn fit_ai(points: &[(f64, f64)]) -> Result<AIFit> {
    if points.len() < 4 {
        return Err(Error::Precondition(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(t, p)) = points
        .iter()
        .find(|(t, p)| !(t.is_finite() && *t > 0.0 && p.is_finite()))
    {
        return Err(Error::Precondition(format!("invalid point ({t}, {p})")));
    }
    let t0 = points[0].0;
    if points.iter().all(|&(t, _)| t == t0) {
        return Err(Error::DegenerateData(format!(
            "all anneal times equal {t0}"
        )));
    }
    let mut ts: Vec<f64> = points.iter().map(|&(t, _)| t).collect();
    ts.sort_by(f64::total_cmp);
    if let Some(w) = ts.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Precondition(format!(
            "duplicate anneal time {}",
            w[0]
        )));
    }

    let sse = |x: &[f64; 3]| {
        if x[2] <= 0.0 {
            return f64::INFINITY;
        }
        points
            .iter()
            .map(|&(t, p)| (ai_model(x, t) - p).powi(2))
            .sum::<f64>()
    };
    let m = nelder_mead(sse, [0.5, 0.5, PI / 4.0], SimplexOptions::default());
    Ok(AIFit {
        x1: m.x[0],
        x2: m.x[1],
        x3: m.x[2],
        residual: (m.value / points.len() as f64).sqrt(),
        converged: m.converged,
        iterations: m.iterations,
    })
}
