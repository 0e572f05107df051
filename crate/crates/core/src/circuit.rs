//! Gate-level simulation of the quench: Trotterized step unitaries, Euler
//! angle extraction and compilation to the `{Rz, √X, X}` basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kzm::{CurvePoint, Provenance, TransitionCurve};
use crate::lz::{AmplitudePair, QuenchParams};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// A traceless Hermitian 2×2 matrix `x σx + y σy + z σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliHamiltonian {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PauliHamiltonian {
    pub fn matrix(&self) -> Mat2 {
        let i = Complex64::i();
        [
            [Complex64::new(self.z, 0.0), self.x - i * self.y],
            [self.x + i * self.y, Complex64::new(-self.z, 0.0)],
        ]
    }

    /// Decomposes `m`, which must be Hermitian and traceless within `1e−12`.
    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let herm = max_abs_diff(m, &adjoint(m));
        let trace = (m[0][0] + m[1][1]).norm();
        if herm > 1e-12 || trace > 1e-12 {
            return Err(Error::Precondition(format!(
                "expected a traceless Hermitian matrix (Hermiticity error {herm:e}, trace {trace:e})"
            )));
        }
        Ok(PauliHamiltonian {
            x: m[1][0].re,
            y: m[1][0].im,
            z: m[0][0].re,
        })
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Difference of the two eigenvalues.
    pub fn gap(&self) -> f64 {
        2.0 * self.norm()
    }
}

/// `H(t) = −(t/2t_a) σz − (Δ/2) σx`.
pub fn hamiltonian_at(t: f64, params: &QuenchParams) -> PauliHamiltonian {
    PauliHamiltonian {
        x: -params.gap() / 2.0,
        y: 0.0,
        z: -params.bias(t) / 2.0,
    }
}

/// A 2×2 unitary matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

/// Tolerance on `‖U†U − I‖` for accepted unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

impl Unitary2 {
    pub fn new(m: Mat2) -> Result<Self> {
        let err = unitarity_error(&m);
        if !(err <= UNITARITY_TOL) {
            return Err(Error::NonUnitary(err));
        }
        Ok(Unitary2(m))
    }

    pub fn identity() -> Self {
        Unitary2(IDENTITY)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// `self · other` (apply `other` first).
    pub fn then_after(&self, other: &Unitary2) -> Unitary2 {
        Unitary2(mat_mul(&self.0, &other.0))
    }

    pub fn apply(&self, s: &AmplitudePair) -> AmplitudePair {
        let m = &self.0;
        AmplitudePair::new(
            m[0][0] * s.alpha + m[0][1] * s.beta,
            m[1][0] * s.alpha + m[1][1] * s.beta,
        )
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// `max |(U†U − I)_ij|`.
pub fn unitarity_error(m: &Mat2) -> f64 {
    max_abs_diff(&mat_mul(&adjoint(m), m), &IDENTITY)
}

/// `e^{−iH dt} = cos(|n| dt) I − i sin(|n| dt) n̂·σ` for `H = n·σ`.
pub fn step_unitary(h: &PauliHamiltonian, dt: f64) -> Unitary2 {
    let n = h.norm();
    if n == 0.0 || dt == 0.0 {
        return Unitary2::identity();
    }
    let (s, c) = (n * dt).sin_cos();
    let k = s / n;
    let i = Complex64::i();
    Unitary2([
        [
            Complex64::new(c, -k * h.z),
            -i * k * Complex64::new(h.x, -h.y),
        ],
        [
            -i * k * Complex64::new(h.x, h.y),
            Complex64::new(c, k * h.z),
        ],
    ])
}

/// `e^{iγ} U(θ, φ, λ)` with
/// `U = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateU3 {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl GateU3 {
    pub fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        GateU3 {
            theta,
            phi,
            lambda,
            gamma: 0.0,
        }
    }

    /// The matrix without the global phase.
    pub fn u3_matrix(&self) -> Mat2 {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = |a: f64| Complex64::from_polar(1.0, a);
        [
            [Complex64::new(c, 0.0), -e(self.lambda) * s],
            [e(self.phi) * s, e(self.phi + self.lambda) * c],
        ]
    }

    pub fn matrix(&self) -> Mat2 {
        let g = Complex64::from_polar(1.0, self.gamma);
        let mut m = self.u3_matrix();
        for row in &mut m {
            for v in row {
                *v *= g;
            }
        }
        m
    }
}

/// Wraps an angle to `(−π, π]`.
fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Euler angles and global phase with `θ ∈ [0, π]`. When `sin θ/2 = 0`
/// the split between `φ` and `λ` is fixed by `λ = 0`.
pub fn euler_decompose(u: &Mat2) -> Result<GateU3> {
    let err = unitarity_error(u);
    if !(err <= UNITARITY_TOL) {
        return Err(Error::NonUnitary(err));
    }
    let [[a, b], [c, d]] = *u;
    let theta = 2.0 * c.norm().atan2(a.norm());
    let gamma = a.arg();
    let (phi, lambda) = if c.norm() < 1e-14 {
        ((d.arg() - gamma), 0.0)
    } else {
        (c.arg() - gamma, (-b).arg() - gamma)
    };
    Ok(GateU3 {
        theta,
        phi: wrap(phi),
        lambda: wrap(lambda),
        gamma: wrap(gamma),
    })
}

/// Native single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasisGate {
    I,
    /// `Rz(α) = diag(e^{−iα/2}, e^{iα/2})`.
    Rz(f64),
    SX,
    X,
}

impl BasisGate {
    pub fn matrix(&self) -> Mat2 {
        let half = Complex64::new(0.5, 0.5);
        let half_c = Complex64::new(0.5, -0.5);
        match *self {
            BasisGate::I => IDENTITY,
            BasisGate::Rz(a) => [
                [Complex64::from_polar(1.0, -a / 2.0), ZERO],
                [ZERO, Complex64::from_polar(1.0, a / 2.0)],
            ],
            BasisGate::SX => [[half, half_c], [half_c, half]],
            BasisGate::X => [[ZERO, ONE], [ONE, ZERO]],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisGate::I => "id",
            BasisGate::Rz(_) => "rz",
            BasisGate::SX => "sx",
            BasisGate::X => "x",
        }
    }
}

/// A gate sequence in time order plus the global phase that makes it equal
/// its source gate exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub source: GateU3,
    pub gates: Vec<BasisGate>,
    pub phase: f64,
}

impl Layer {
    /// `e^{i phase} · g_last ⋯ g_first`.
    pub fn matrix(&self) -> Mat2 {
        let mut m = IDENTITY;
        for g in &self.gates {
            m = mat_mul(&g.matrix(), &m);
        }
        let p = Complex64::from_polar(1.0, self.phase);
        for row in &mut m {
            for v in row {
                *v *= p;
            }
        }
        m
    }
}

/// `U(θ, φ, λ) = e^{i(λ+φ+π)/2} Rz(φ+π) √X Rz(θ+π) √X Rz(λ)`.
pub fn basis_decompose(g: &GateU3) -> Layer {
    Layer {
        source: *g,
        gates: vec![
            BasisGate::Rz(g.lambda),
            BasisGate::SX,
            BasisGate::Rz(g.theta + PI),
            BasisGate::SX,
            BasisGate::Rz(g.phi + PI),
        ],
        phase: g.gamma + (g.lambda + g.phi + PI) / 2.0,
    }
}

/// The rotation `Ry(π/2)` preparing the anticrossing ground state from `|0⟩`.
pub fn anticrossing_preparation() -> GateU3 {
    GateU3::new(FRAC_PI_2, 0.0, 0.0)
}

/// `Ry(π/2)|0⟩ = (|0⟩ + |1⟩)/√2`, the ground state of `H(0)`.
pub fn prepare_anticrossing() -> AmplitudePair {
    let u = Unitary2(anticrossing_preparation().matrix());
    u.apply(&AmplitudePair::zero())
}

/// Uniform time grid `t_k = t_i + k (t_f − t_i)/N_t`, `k = 0..=N_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_i: f64,
    t_f: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_i: f64, t_f: f64, steps: usize) -> Result<Self> {
        if !(t_i.is_finite() && t_f.is_finite() && t_f > t_i) {
            return Err(Error::Precondition(format!(
                "need finite t_f > t_i, got [{t_i}, {t_f}]"
            )));
        }
        if steps == 0 {
            return Err(Error::Precondition("need at least one step".into()));
        }
        Ok(TimeGrid { t_i, t_f, steps })
    }

    pub fn t_i(&self) -> f64 {
        self.t_i
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_f - self.t_i) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_f
        } else {
            self.t_i + (self.t_f - self.t_i) * k as f64 / self.steps as f64
        }
    }
}

/// Step unitaries `e^{−i H(t_k) dt}`, `k = 0..N_t`, sampling the
/// Hamiltonian at the left end of each step.
pub fn step_unitaries(params: &QuenchParams, grid: &TimeGrid) -> Vec<Unitary2> {
    let dt = grid.dt();
    (0..grid.steps())
        .map(|k| step_unitary(&hamiltonian_at(grid.time(k), params), dt))
        .collect()
}

/// The states after `0, 1, …, N_t` layers.
pub fn trotter_states(
    params: &QuenchParams,
    grid: &TimeGrid,
    initial: &AmplitudePair,
) -> Result<Vec<AmplitudePair>> {
    let n = initial.norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "initial state must be normalized, |α|²+|β|² = {n}"
        )));
    }
    let mut s = *initial;
    let mut out = Vec::with_capacity(grid.steps() + 1);
    out.push(s);
    for u in step_unitaries(params, grid) {
        s = u.apply(&s);
        out.push(s);
    }
    Ok(out)
}

/// `|β|²` after each layer of the Trotterized evolution.
pub fn trotter_evolve(
    params: &QuenchParams,
    grid: &TimeGrid,
    initial: &AmplitudePair,
) -> Result<TransitionCurve> {
    let states = trotter_states(params, grid, initial)?;
    let points = states
        .iter()
        .enumerate()
        .map(|(k, s)| CurvePoint::new(grid.time(k), k, s.p1()))
        .collect();
    TransitionCurve::new(points, *params, Provenance::Trotter)
}

/// Duration of one `√X` pulse on the reference device, in ns.
pub const DEFAULT_T_SX_NS: f64 = 35.555;

/// Physical duration of `layers` compiled layers (two `√X` pulses each).
pub fn interaction_time(layers: usize, t_sx_ns: f64) -> f64 {
    2.0 * t_sx_ns * layers as f64
}

/// A compiled quench: preparation followed by one basis-gate layer per
/// Trotter step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredCircuit {
    pub preparation: Layer,
    pub layers: Vec<Layer>,
    pub shots: u32,
}

impl LayeredCircuit {
    pub fn compile(params: &QuenchParams, grid: &TimeGrid, shots: u32) -> Result<Self> {
        let layers = step_unitaries(params, grid)
            .iter()
            .map(|u| euler_decompose(u.matrix()).map(|g| basis_decompose(&g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LayeredCircuit {
            preparation: basis_decompose(&anticrossing_preparation()),
            layers,
            shots,
        })
    }

    /// Matrix of the preparation followed by the first `depth` layers.
    pub fn matrix(&self, depth: usize) -> Mat2 {
        self.layers[..depth]
            .iter()
            .fold(self.preparation.matrix(), |m, l| mat_mul(&l.matrix(), &m))
    }

    /// `|β|²` measured after each depth `0..=N_t`, starting from `|0⟩`.
    pub fn populations(&self) -> Vec<f64> {
        let mut m = self.preparation.matrix();
        let mut out = vec![m[1][0].norm_sqr()];
        for l in &self.layers {
            m = mat_mul(&l.matrix(), &m);
            out.push(m[1][0].norm_sqr());
        }
        out
    }

    /// One gate per line, angles in radians.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "shots {}", self.shots);
        write_layer(&mut s, "prep", &self.preparation);
        for (k, l) in self.layers.iter().enumerate() {
            write_layer(&mut s, &format!("layer {k}"), l);
        }
        s
    }
}

fn write_layer(s: &mut String, title: &str, l: &Layer) {
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "  phase {:.12}", l.phase);
    for g in &l.gates {
        match g {
            BasisGate::Rz(a) => {
                let _ = writeln!(s, "  rz {a:.12}");
            }
            other => {
                let _ = writeln!(s, "  {}", other.name());
            }
        }
    }
}
