//! Relaxation and dephasing of the driven qubit, either as a continuous
//! Lindblad evolution or as noise channels interleaved with ideal layers.
//!
//! Rates are per microsecond. A `rate_scale` converts simulation time into
//! physical microseconds, so one layer of length `dt` decoheres for
//! `rate_scale · dt` µs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    adjoint, hamiltonian_at, mat_mul, step_unitary, Mat2, PauliHamiltonian, TimeGrid, IDENTITY,
};
use crate::error::{Error, Result};
use crate::kzm::{CurvePoint, Provenance, TransitionCurve};
use crate::lz::{AmplitudePair, QuenchParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Device coherence times in µs. `f64::INFINITY` switches a process off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    t1: f64,
    t2: f64,
}

impl NoiseParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t2 > 0.0) {
            return Err(Error::InvalidNoise(format!(
                "T1 and T2 must be positive, got T1 = {t1}, T2 = {t2}"
            )));
        }
        if t2 > 2.0 * t1 {
            return Err(Error::InvalidNoise(format!(
                "T2 = {t2} exceeds 2·T1 = {}; the dephasing rate would be negative",
                2.0 * t1
            )));
        }
        Ok(NoiseParams { t1, t2 })
    }

    pub fn noiseless() -> Self {
        NoiseParams {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
        }
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// `Γ = 1/T1`.
    pub fn relaxation_rate(&self) -> f64 {
        1.0 / self.t1
    }

    /// `γ_φ = 1/T2 − 1/(2T1)`.
    pub fn dephasing_rate(&self) -> f64 {
        1.0 / self.t2 - 1.0 / (2.0 * self.t1)
    }
}

/// `L1 = √Γ |0⟩⟨1|` and `L2 = √γ_φ σz`.
pub fn collapse_ops(noise: &NoiseParams) -> [Mat2; 2] {
    let a = Complex64::new(noise.relaxation_rate().sqrt(), 0.0);
    let b = noise.dephasing_rate().sqrt();
    [
        [[ZERO, a], [ZERO, ZERO]],
        [
            [Complex64::new(b, 0.0), ZERO],
            [ZERO, Complex64::new(-b, 0.0)],
        ],
    ]
}

/// A validated single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-9;
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-9;

    pub fn new(m: Mat2) -> Result<Self> {
        let rho = DensityMatrix(m);
        let herm = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::Precondition(format!(
                "density matrix not Hermitian ({herm:e})"
            )));
        }
        if (rho.trace() - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::Precondition(format!(
                "density matrix trace {}",
                rho.trace()
            )));
        }
        if rho.min_eigenvalue() < -Self::POSITIVITY_TOL {
            return Err(Error::Precondition(format!(
                "density matrix eigenvalue {}",
                rho.min_eigenvalue()
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(s: &AmplitudePair) -> Self {
        DensityMatrix([
            [s.alpha * s.alpha.conj(), s.alpha * s.beta.conj()],
            [s.beta * s.alpha.conj(), s.beta * s.beta.conj()],
        ])
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    /// `⟨1|ρ|1⟩`.
    pub fn population1(&self) -> f64 {
        self.0[1][1].re
    }

    pub fn purity(&self) -> f64 {
        let m = &self.0;
        m[0][0].re.powi(2) + m[1][1].re.powi(2) + 2.0 * m[0][1].norm_sqr()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = &self.0;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let half_diff = 0.5 * (m[0][0].re - m[1][1].re);
        mean - (half_diff * half_diff + m[0][1].norm_sqr()).sqrt()
    }
}

fn add_scaled(a: &Mat2, b: &Mat2, s: f64) -> Mat2 {
    let mut m = *a;
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] += b[i][j] * s;
        }
    }
    m
}

/// `−i[H, ρ] + Σ (L ρ L† − ½{L†L, ρ})`.
pub fn lindblad_rhs(rho: &Mat2, h: &Mat2, ops: &[Mat2]) -> Mat2 {
    let i = Complex64::i();
    let hr = mat_mul(h, rho);
    let rh = mat_mul(rho, h);
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = -i * (hr[r][c] - rh[r][c]);
        }
    }
    for l in ops {
        let ld = adjoint(l);
        let jump = mat_mul(&mat_mul(l, rho), &ld);
        let ldl = mat_mul(&ld, l);
        let anti = add_scaled(&mat_mul(&ldl, rho), &mat_mul(rho, &ldl), 1.0);
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += jump[r][c] - 0.5 * anti[r][c];
            }
        }
    }
    out
}

/// Maximum number of integrator substeps in one layer.
pub const MAX_SUBSTEPS: usize = 1_000_000;
/// Substep size times the generator norm.
const SUBSTEP_NORM: f64 = 0.01;

fn generator_norm(h: &PauliHamiltonian, ops: &[Mat2]) -> f64 {
    let frob = |m: &Mat2| m.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>();
    2.0 * h.norm() + ops.iter().map(frob).sum::<f64>() * 2.0
}

fn scaled_ops(noise: &NoiseParams, rate_scale: f64) -> Vec<Mat2> {
    let s = Complex64::new(rate_scale.sqrt(), 0.0);
    collapse_ops(noise)
        .iter()
        .map(|l| [[l[0][0] * s, l[0][1] * s], [l[1][0] * s, l[1][1] * s]])
        .filter(|l| l.iter().flatten().any(|v| *v != ZERO))
        .collect()
}

fn rk4_segment(
    rho: Mat2,
    h: &PauliHamiltonian,
    ops: &[Mat2],
    duration: f64,
    substeps: usize,
) -> Mat2 {
    let hm = h.matrix();
    let step = duration / substeps as f64;
    let f = |r: &Mat2| lindblad_rhs(r, &hm, ops);
    let mut r = rho;
    for _ in 0..substeps {
        let k1 = f(&r);
        let k2 = f(&add_scaled(&r, &k1, step / 2.0));
        let k3 = f(&add_scaled(&r, &k2, step / 2.0));
        let k4 = f(&add_scaled(&r, &k3, step));
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (step / 6.0);
            }
        }
    }
    r
}

/// Options of [`lindblad_states`].
#[derive(Debug, Clone, Copy)]
pub struct LindbladOptions {
    /// Multiplies the automatically chosen substep count.
    pub refine: usize,
    /// Replace the drive by `H = 0`.
    pub free_decay: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            refine: 1,
            free_decay: false,
        }
    }
}

/// Continuous Lindblad evolution with the Hamiltonian held at `H(t_k)`
/// during layer `k`, recording `⟨1|ρ|1⟩` at every layer boundary.
pub fn lindblad_evolve(
    params: &QuenchParams,
    grid: &TimeGrid,
    noise: &NoiseParams,
    rho0: &DensityMatrix,
    rate_scale: f64,
) -> Result<TransitionCurve> {
    let states = lindblad_states(
        params,
        grid,
        noise,
        rho0,
        rate_scale,
        LindbladOptions::default(),
    )?;
    curve_from(params, grid, &states)
}

/// [`lindblad_evolve`] returning the density matrices themselves.
pub fn lindblad_states(
    params: &QuenchParams,
    grid: &TimeGrid,
    noise: &NoiseParams,
    rho0: &DensityMatrix,
    rate_scale: f64,
    opts: LindbladOptions,
) -> Result<Vec<DensityMatrix>> {
    if !(rate_scale >= 0.0 && rate_scale.is_finite()) {
        return Err(Error::Precondition(format!(
            "rate scale must be >= 0, got {rate_scale}"
        )));
    }
    let ops = scaled_ops(noise, rate_scale);
    let dt = grid.dt();
    let mut rho = *rho0.matrix();
    let mut out = Vec::with_capacity(grid.steps() + 1);
    out.push(*rho0);
    for k in 0..grid.steps() {
        let h = if opts.free_decay {
            PauliHamiltonian {
                x: 0.0,
                y: 0.0,
                z: 0.0,
            }
        } else {
            hamiltonian_at(grid.time(k), params)
        };
        let want = (generator_norm(&h, &ops) * dt / SUBSTEP_NORM)
            .ceil()
            .max(1.0);
        let substeps = want as usize * opts.refine.max(1);
        if want > MAX_SUBSTEPS as f64 || substeps > MAX_SUBSTEPS {
            return Err(Error::StepBudget(format!(
                "layer {k} needs {want} substeps (cap {MAX_SUBSTEPS})"
            )));
        }
        rho = rk4_segment(rho, &h, &ops, dt, substeps);
        out.push(DensityMatrix(rho));
    }
    Ok(out)
}

fn curve_from(
    params: &QuenchParams,
    grid: &TimeGrid,
    states: &[DensityMatrix],
) -> Result<TransitionCurve> {
    let points = states
        .iter()
        .enumerate()
        .map(|(k, r)| CurvePoint::new(grid.time(k), k, r.population1()))
        .collect();
    TransitionCurve::new(points, *params, Provenance::Lindblad)
}

/// Physical microseconds per unit of simulation time, `2 t_SX / dt`, so a
/// layer of length `dt` decoheres for two `√X` pulse durations.
pub fn rate_scale_for(grid: &TimeGrid, t_sx_ns: f64) -> f64 {
    2.0 * t_sx_ns * 1e-3 / grid.dt()
}

/// Kraus operators of amplitude damping for `τ` µs followed by `σz`
/// dephasing for the same time.
pub fn layer_channel(noise: &NoiseParams, tau_us: f64) -> Vec<Mat2> {
    let p = -(-noise.relaxation_rate() * tau_us).exp_m1();
    let r = -0.5 * (-2.0 * noise.dephasing_rate() * tau_us).exp_m1();
    let c = |x: f64| Complex64::new(x, 0.0);
    let damping = [
        [[c(1.0), ZERO], [ZERO, c((1.0 - p).sqrt())]],
        [[ZERO, c(p.sqrt())], [ZERO, ZERO]],
    ];
    let sz = [[c(1.0), ZERO], [ZERO, c(-1.0)]];
    let dephasing = [scale(&IDENTITY, (1.0 - r).sqrt()), scale(&sz, r.sqrt())];
    let mut out = Vec::with_capacity(4);
    for d in &dephasing {
        for a in &damping {
            out.push(mat_mul(d, a));
        }
    }
    out
}

fn scale(m: &Mat2, s: f64) -> Mat2 {
    add_scaled(&[[ZERO; 2]; 2], m, s)
}

fn apply_channel(rho: &Mat2, kraus: &[Mat2]) -> Mat2 {
    kraus.iter().fold([[ZERO; 2]; 2], |acc, k| {
        add_scaled(&acc, &mat_mul(&mat_mul(k, rho), &adjoint(k)), 1.0)
    })
}

/// Ideal step unitaries each followed by the noise channel of one layer
/// (`2 t_SX`).
pub fn kraus_evolve(
    params: &QuenchParams,
    grid: &TimeGrid,
    noise: &NoiseParams,
    rho0: &DensityMatrix,
    t_sx_ns: f64,
) -> Result<TransitionCurve> {
    let kraus = layer_channel(noise, 2.0 * t_sx_ns * 1e-3);
    let dt = grid.dt();
    let mut rho = *rho0.matrix();
    let mut states = vec![*rho0];
    for k in 0..grid.steps() {
        let u = *step_unitary(&hamiltonian_at(grid.time(k), params), dt).matrix();
        rho = mat_mul(&mat_mul(&u, &rho), &adjoint(&u));
        rho = apply_channel(&rho, &kraus);
        states.push(DensityMatrix(rho));
    }
    curve_from(params, grid, &states)
}
