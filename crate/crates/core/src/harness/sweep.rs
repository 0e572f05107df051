use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::DeviceProfile;
use crate::circuit::{prepare_anticrossing, trotter_evolve, TimeGrid};
use crate::error::{Error, Result};
use crate::kzm::{
    asymptotic_estimate, fit_ai, jump_time_star, AIFit, AsymptoticEstimate, CurvePoint, Provenance,
    TransitionCurve,
};
use crate::lz::QuenchParams;
use crate::open::{lindblad_evolve, rate_scale_for, DensityMatrix};
use crate::readout::{apply_readout_noise, clip_renormalize, mitigate, sample_shots};

/// Intervals of the analytic curve used to locate `t*`.
pub const DENSE_INTERVALS: usize = 400;

const SHORT_WINDOW_LIMIT: f64 = 0.17;
const LONG_WINDOW_LIMIT: f64 = 2.0;

/// End of the time window for anneal time `t_a`: 4 up to 0.17, 10 up to 2.
/// Longer anneals need `extend` and reuse the long window.
pub fn window_rule(t_a: f64, extend: bool) -> Result<f64> {
    if !(t_a > 0.0 && t_a.is_finite()) {
        return Err(Error::Domain(format!(
            "anneal time must be positive, got {t_a}"
        )));
    }
    if t_a <= SHORT_WINDOW_LIMIT {
        Ok(4.0)
    } else if t_a <= LONG_WINDOW_LIMIT || extend {
        Ok(10.0)
    } else {
        Err(Error::OutOfRange(format!(
            "t_a = {t_a} is beyond {LONG_WINDOW_LIMIT}; pass the window override to extend"
        )))
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// 40 log-spaced anneal times in `[0.05, 2]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(0.05, 2.0, 40)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Trotter,
    Lindblad,
    /// Finite shots through the readout calibration, then mitigation.
    Shots,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        self.provenance().as_str()
    }

    pub fn provenance(self) -> Provenance {
        match self {
            Mode::Analytic => Provenance::Analytic,
            Mode::Trotter => Provenance::Trotter,
            Mode::Lindblad => Provenance::Lindblad,
            Mode::Shots => Provenance::Shots,
        }
    }

    pub fn needs_profile(self) -> bool {
        matches!(self, Mode::Lindblad | Mode::Shots)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "trotter" => Ok(Mode::Trotter),
            "lindblad" => Ok(Mode::Lindblad),
            "shots" => Ok(Mode::Shots),
            _ => Err(Error::Precondition(format!(
                "unknown mode `{s}` (expected analytic, trotter, lindblad or shots)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<f64>,
    /// Layers per curve, `N_t`.
    pub steps: usize,
    pub shots: u64,
    pub mode: Mode,
    pub seed: u64,
    /// Accept anneal times beyond 2 with the long window.
    pub extend_window: bool,
    /// Profile qubit used by the noisy modes.
    pub qubit: usize,
    /// Clip mitigated values to `[0, 1]` before averaging.
    pub clip_mitigated: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: default_grid(),
            steps: 50,
            shots: 5000,
            mode: Mode::Analytic,
            seed: 0,
            extend_window: false,
            qubit: 0,
            clip_mitigated: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self, profile: Option<&DeviceProfile>) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Precondition("the anneal-time grid is empty".into()));
        }
        if let Some(&t) = self.grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Precondition(format!(
                "grid value {t} is not positive"
            )));
        }
        if let Some(w) = self.grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(format!(
                "grid must ascend strictly, found {} then {}",
                w[0], w[1]
            )));
        }
        for &t in &self.grid {
            window_rule(t, self.extend_window)?;
        }
        if self.steps == 0 {
            return Err(Error::Precondition("need at least one layer".into()));
        }
        if self.mode == Mode::Shots && self.shots == 0 {
            return Err(Error::Precondition(
                "shots mode needs at least one shot".into(),
            ));
        }
        if self.mode.needs_profile() {
            let Some(p) = profile else {
                return Err(Error::Precondition(format!(
                    "{} mode needs a device profile",
                    self.mode
                )));
            };
            let q = p.qubit(self.qubit)?;
            q.noise()?;
            q.calibration()?;
        }
        Ok(())
    }
}

/// One anneal time of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub t_a: f64,
    pub t_f: f64,
    pub curve: TransitionCurve,
    pub estimate: AsymptoticEstimate,
}

/// Everything needed to reproduce and inspect a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub generator: String,
    pub config: SweepConfig,
    pub profile: Option<DeviceProfile>,
    pub cells: Vec<CellRecord>,
    /// Absent for grids too small to fit.
    pub fit: Option<AIFit>,
}

/// SplitMix64 finalizer over `parent` and `stream`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one grid cell. `cell_seed` drives the shot sampling.
pub fn run_cell(
    t_a: f64,
    config: &SweepConfig,
    profile: Option<&DeviceProfile>,
    cell_seed: u64,
) -> Result<CellRecord> {
    let params = QuenchParams::with_anneal_time(t_a)?;
    let t_f = window_rule(t_a, config.extend_window)?;
    let t_star = jump_time_star(&TransitionCurve::analytic(params, t_f, DENSE_INTERVALS)?)?;
    let grid = TimeGrid::new(0.0, t_f, config.steps)?;
    let qubit = || -> Result<_> {
        let p = profile.ok_or_else(|| {
            Error::Precondition(format!("{} mode needs a device profile", config.mode))
        })?;
        p.qubit(config.qubit)
    };

    let curve = match config.mode {
        Mode::Analytic => TransitionCurve::analytic(params, t_f, config.steps)?,
        Mode::Trotter => trotter_evolve(&params, &grid, &prepare_anticrossing())?,
        Mode::Lindblad => {
            let q = qubit()?;
            let rho0 = DensityMatrix::from_pure(&prepare_anticrossing());
            lindblad_evolve(
                &params,
                &grid,
                &q.noise()?,
                &rho0,
                rate_scale_for(&grid, q.t_sx),
            )?
        }
        Mode::Shots => {
            let cal = qubit()?.calibration()?;
            let exact = TransitionCurve::analytic(params, t_f, config.steps)?;
            let points = exact
                .points()
                .iter()
                .map(|q| {
                    let p1 = q.p.clamp(0.0, 1.0);
                    let noisy = apply_readout_noise(&[1.0 - p1, p1], &cal)?;
                    let seed = derive_seed(cell_seed, q.layer as u64);
                    let shot = sample_shots(noisy[1].clamp(0.0, 1.0), config.shots, seed)?;
                    let m = mitigate(&shot.frequencies(), &cal)?;
                    let p_mit = if config.clip_mitigated {
                        clip_renormalize(&m.p)[1]
                    } else {
                        m.p[1]
                    };
                    Ok(CurvePoint {
                        p_mitigated: Some(p_mit),
                        ..CurvePoint::new(q.t, q.layer, shot.p1_hat())
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            TransitionCurve::new(points, params, Provenance::Shots)?
        }
    };
    let estimate = asymptotic_estimate(&curve, t_star)?;
    Ok(CellRecord {
        t_a,
        t_f,
        curve,
        estimate,
    })
}

/// Runs every anneal time of the grid in parallel and fits the plateau
/// estimates.
pub fn run_sweep(
    config: &SweepConfig,
    profile: Option<&DeviceProfile>,
) -> Result<ExperimentRecord> {
    config.validate(profile)?;
    let cells = config
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &t_a)| {
            run_cell(t_a, config, profile, derive_seed(config.seed, i as u64)).map_err(|e| {
                Error::Cell {
                    t_a,
                    mode: config.mode.to_string(),
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = if cells.len() >= 4 {
        let pts: Vec<(f64, f64)> = cells.iter().map(|c| (c.t_a, c.estimate.mean)).collect();
        Some(fit_ai(&pts)?)
    } else {
        None
    };
    Ok(ExperimentRecord {
        generator: concat!("lzkz ", env!("CARGO_PKG_VERSION")).to_string(),
        config: config.clone(),
        profile: profile.cloned(),
        cells,
        fit,
    })
}

/// Runs the sweep described by a record's own configuration.
pub fn rerun(record: &ExperimentRecord) -> Result<ExperimentRecord> {
    run_sweep(&record.config, record.profile.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        assert_eq!(window_rule(0.1, false).unwrap(), 4.0);
        assert_eq!(window_rule(0.17, false).unwrap(), 4.0);
        assert_eq!(window_rule(0.1700001, false).unwrap(), 10.0);
        assert_eq!(window_rule(1.0, false).unwrap(), 10.0);
        assert_eq!(window_rule(2.0, false).unwrap(), 10.0);
        assert!(matches!(window_rule(2.5, false), Err(Error::OutOfRange(_))));
        assert_eq!(window_rule(2.5, true).unwrap(), 10.0);
        assert!(window_rule(0.0, true).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 40);
        assert_eq!((g[0], g[39]), (0.05, 2.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }

    #[test]
    fn mode_parsing_round_trips() {
        for m in [Mode::Analytic, Mode::Trotter, Mode::Lindblad, Mode::Shots] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("kraus".parse::<Mode>().is_err());
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), 100);
        assert_eq!(derive_seed(7, 3), s[3]);
        assert_ne!(derive_seed(8, 3), s[3]);
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig {
            grid: vec![0.1, 0.5, 1.0],
            ..SweepConfig::default()
        };
        assert!(c.validate(None).is_ok());
        c.grid = vec![0.5, 0.1];
        assert!(c.validate(None).is_err());
        c.grid = vec![0.1, 3.0];
        assert!(matches!(c.validate(None), Err(Error::OutOfRange(_))));
        c.extend_window = true;
        assert!(c.validate(None).is_ok());
        c.mode = Mode::Lindblad;
        assert!(matches!(c.validate(None), Err(Error::Precondition(_))));
    }

    #[test]
    fn small_grid_skips_the_fit() {
        let c = SweepConfig {
            grid: vec![0.1, 1.0],
            ..SweepConfig::default()
        };
        let r = run_sweep(&c, None).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert!(r.fit.is_none());
        assert_eq!(r.cells[0].t_f, 4.0);
        assert_eq!(r.cells[1].curve.len(), 51);
    }
}
