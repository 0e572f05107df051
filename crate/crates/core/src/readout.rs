//! Finite-shot sampling and first-order readout-error mitigation.
//!
//! Probability vectors are `[P(0), P(1)]`. The calibration matrix is
//! `A = [[p00, p01], [p10, p11]]` with `p_ij = P(measure i | prepared j)`,
//! so `P_noisy = A · P_ideal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;
/// Smallest `|det A|` accepted for inversion.
pub const MIN_DETERMINANT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    p00: f64,
    p01: f64,
    p10: f64,
    p11: f64,
}

impl ReadoutCalibration {
    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        for (name, v) in [("p00", p00), ("p01", p01), ("p10", p10), ("p11", p11)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Precondition(format!(
                    "{name} = {v} is not a probability"
                )));
            }
        }
        if (p00 + p10 - 1.0).abs() > STOCHASTIC_TOL || (p01 + p11 - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Precondition(format!(
                "calibration columns must sum to 1: {} and {}",
                p00 + p10,
                p01 + p11
            )));
        }
        Ok(ReadoutCalibration { p00, p01, p10, p11 })
    }

    pub fn identity() -> Self {
        ReadoutCalibration {
            p00: 1.0,
            p01: 0.0,
            p10: 0.0,
            p11: 1.0,
        }
    }

    /// Completes the columns from the two off-diagonal error rates
    /// `p10 = P(1|0)` and `p01 = P(0|1)`.
    pub fn from_error_rates(p_meas1_prep0: f64, p_meas0_prep1: f64) -> Result<Self> {
        for v in [p_meas1_prep0, p_meas0_prep1] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Precondition(format!(
                    "readout error rate {v} outside [0, 1)"
                )));
            }
        }
        Self::new(
            1.0 - p_meas1_prep0,
            p_meas0_prep1,
            p_meas1_prep0,
            1.0 - p_meas0_prep1,
        )
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.p00, self.p01], [self.p10, self.p11]]
    }

    pub fn determinant(&self) -> f64 {
        self.p00 * self.p11 - self.p01 * self.p10
    }
}

fn check_distribution(p: &[f64; 2]) -> Result<()> {
    if !(p[0].is_finite() && p[1].is_finite()) || (p[0] + p[1] - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "probability vector {p:?} does not sum to 1"
        )));
    }
    Ok(())
}

/// `A · p_ideal`.
pub fn apply_readout_noise(p_ideal: &[f64; 2], cal: &ReadoutCalibration) -> Result<[f64; 2]> {
    check_distribution(p_ideal)?;
    let a = cal.matrix();
    Ok([
        a[0][0] * p_ideal[0] + a[0][1] * p_ideal[1],
        a[1][0] * p_ideal[0] + a[1][1] * p_ideal[1],
    ])
}

/// The inverted vector, which can leave `[0, 1]` for noisy input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub p: [f64; 2],
    pub outside_unit_interval: bool,
}

impl Mitigated {
    /// Clips each component to `[0, 1]` and renormalizes.
    pub fn clipped(&self) -> [f64; 2] {
        clip_renormalize(&self.p)
    }
}

pub fn clip_renormalize(p: &[f64; 2]) -> [f64; 2] {
    let c = [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)];
    let s = c[0] + c[1];
    [c[0] / s, c[1] / s]
}

/// `A⁻¹ · p_noisy`.
pub fn mitigate(p_noisy: &[f64; 2], cal: &ReadoutCalibration) -> Result<Mitigated> {
    check_distribution(p_noisy)?;
    let det = cal.determinant();
    if det.abs() < MIN_DETERMINANT {
        return Err(Error::SingularCalibration(det));
    }
    let a = cal.matrix();
    let p = [
        (a[1][1] * p_noisy[0] - a[0][1] * p_noisy[1]) / det,
        (a[0][0] * p_noisy[1] - a[1][0] * p_noisy[0]) / det,
    ];
    let out = p.iter().any(|v| !(0.0..=1.0).contains(v));
    Ok(Mitigated {
        p,
        outside_unit_interval: out,
    })
}

/// Outcome of measuring `shots` copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    pub n0: u64,
    pub n1: u64,
    pub shots: u64,
    pub seed: u64,
}

impl ShotResult {
    pub fn p1_hat(&self) -> f64 {
        self.n1 as f64 / self.shots as f64
    }

    pub fn frequencies(&self) -> [f64; 2] {
        let p1 = self.p1_hat();
        [1.0 - p1, p1]
    }
}

/// Binomial draw of `|1⟩` counts with a ChaCha8 stream seeded by `seed`.
pub fn sample_shots(p1: f64, shots: u64, seed: u64) -> Result<ShotResult> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::Precondition(format!(
            "p1 = {p1} is not a probability"
        )));
    }
    if shots == 0 {
        return Err(Error::Precondition("need at least one shot".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p1).map_err(|e| Error::Precondition(e.to_string()))?;
    let n1 = dist.sample(&mut rng);
    Ok(ShotResult {
        n0: shots - n1,
        n1,
        shots,
        seed,
    })
}
