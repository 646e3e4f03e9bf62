//! System parameters, classical linearization and the linear fluctuation
//! generator (drift and noise matrices).

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{CMatrix, NumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid system spec: {0}")]
    InvalidSpec(String),
    #[error("classical fixed point not reached after {iterations} iterations")]
    NoFixedPoint { iterations: usize },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// How the cavity is driven.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Drive {
    /// Effective detuning and linearized couplings given directly.
    Linearized { delta: f64, g: Vec<f64> },
    /// Bare detuning, complex drive amplitude and single-photon couplings.
    Physical {
        delta_c: f64,
        omega_drive: [f64; 2],
        g_single: Vec<f64>,
    },
}

/// Full parameter set of the loop-coupled model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n_mech: usize,
    pub omega: Vec<f64>,
    pub kappa: f64,
    pub gamma: Vec<f64>,
    pub nbar: Vec<f64>,
    /// Nearest-neighbour exchange strengths, length `n_mech - 1`.
    pub eta: Vec<f64>,
    /// Exchange phases in `[0, 2π)`, length `n_mech - 1`.
    pub theta: Vec<f64>,
    pub drive: Drive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Approx {
    Full,
    Rwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CouplingApprox {
    pub optomechanical: Approx,
    pub mechanical: Approx,
}

impl Default for CouplingApprox {
    /// Counter-rotating optomechanical terms kept, phonon hopping in RWA.
    fn default() -> Self {
        Self {
            optomechanical: Approx::Full,
            mechanical: Approx::Rwa,
        }
    }
}

impl SystemSpec {
    /// Uniform chain with a linearized drive; `theta` is broadcast to every bond.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_mech: usize,
        omega_m: f64,
        kappa: f64,
        gamma: f64,
        nbar: f64,
        eta: f64,
        theta: f64,
        delta: f64,
        g: f64,
    ) -> Result<Self, ModelError> {
        let bonds = n_mech.saturating_sub(1);
        Self {
            n_mech,
            omega: vec![omega_m; n_mech],
            kappa,
            gamma: vec![gamma; n_mech],
            nbar: vec![nbar; n_mech],
            eta: vec![eta; bonds],
            theta: vec![theta; bonds],
            drive: Drive::Linearized {
                delta,
                g: vec![g; n_mech],
            },
        }
        .validated()
    }

    /// Checks ranges and list lengths and reduces phases to `[0, 2π)`.
    ///
    /// Frequencies must be strictly positive. Rates, couplings and occupations
    /// may be zero so that lossless and decoupled limits stay expressible.
    pub fn validated(mut self) -> Result<Self, ModelError> {
        let n = self.n_mech;
        let bad = |msg: String| Err(ModelError::InvalidSpec(msg));
        if n == 0 {
            return bad("n_mech must be at least 1".into());
        }
        let bonds = n - 1;
        for (name, len, want) in [
            ("omega", self.omega.len(), n),
            ("gamma", self.gamma.len(), n),
            ("nbar", self.nbar.len(), n),
            ("eta", self.eta.len(), bonds),
            ("theta", self.theta.len(), bonds),
        ] {
            if len != want {
                return bad(format!("{name} has {len} entries, expected {want}"));
            }
        }
        let finite = |x: f64| x.is_finite();
        if !self.omega.iter().all(|&w| finite(w) && w > 0.0) {
            return bad("mechanical frequencies must be finite and > 0".into());
        }
        if !(finite(self.kappa) && self.kappa >= 0.0) {
            return bad("kappa must be finite and >= 0".into());
        }
        if !self.gamma.iter().all(|&g| finite(g) && g >= 0.0) {
            return bad("gamma must be finite and >= 0".into());
        }
        if !self.nbar.iter().all(|&x| finite(x) && x >= 0.0) {
            return bad("nbar must be finite and >= 0".into());
        }
        if !self.eta.iter().all(|&x| finite(x) && x >= 0.0) {
            return bad("eta must be finite and >= 0".into());
        }
        if !self.theta.iter().all(|&x| finite(x)) {
            return bad("theta must be finite".into());
        }
        for t in &mut self.theta {
            *t = t.rem_euclid(TAU);
            if *t >= TAU {
                *t = 0.0;
            }
        }
        match &self.drive {
            Drive::Linearized { delta, g } => {
                if !finite(*delta) {
                    return bad("delta must be finite".into());
                }
                if g.len() != n {
                    return bad(format!("g has {} entries, expected {n}", g.len()));
                }
                if !g.iter().all(|&x| finite(x) && x >= 0.0) {
                    return bad("g must be finite and >= 0".into());
                }
            }
            Drive::Physical {
                delta_c,
                omega_drive,
                g_single,
            } => {
                if !finite(*delta_c) || !omega_drive.iter().all(|&x| finite(x)) {
                    return bad("physical drive parameters must be finite".into());
                }
                if g_single.len() != n {
                    return bad(format!(
                        "g_single has {} entries, expected {n}",
                        g_single.len()
                    ));
                }
                if !g_single.iter().all(|&x| finite(x) && x >= 0.0) {
                    return bad("g_single must be finite and >= 0".into());
                }
            }
        }
        Ok(self)
    }

    /// `(Δ, G)` of a linearized drive.
    pub fn linearized(&self) -> Result<(f64, &[f64]), ModelError> {
        match &self.drive {
            Drive::Linearized { delta, g } => Ok((*delta, g)),
            Drive::Physical { .. } => Err(ModelError::InvalidSpec(
                "drive is physical; linearize first".into(),
            )),
        }
    }

    /// Hermitian single-excitation mechanical block, `H[j][j+1] = η_j e^{iθ_j}`.
    pub fn mechanical_hamiltonian(&self) -> CMatrix {
        let n = self.n_mech;
        let mut h = CMatrix::zeros(n, n);
        for j in 0..n {
            h[(j, j)] = C64::new(self.omega[j], 0.0);
        }
        for j in 0..n.saturating_sub(1) {
            let c = C64::from_polar(self.eta[j], self.theta[j]);
            h[(j, j + 1)] = c;
            h[(j + 1, j)] = c.conj();
        }
        h
    }
}

/// Classical steady state around which fluctuations are linearized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalSteadyState {
    pub alpha: C64,
    pub beta: Vec<C64>,
    pub delta_eff: f64,
    pub g_lin: Vec<C64>,
    /// Drive amplitude actually used (rotated when α is made real).
    pub omega_drive: C64,
    pub iterations: usize,
}

impl ClassicalSteadyState {
    /// System with a linearized drive built from this fixed point, using `|G_j|`.
    pub fn to_linearized_spec(&self, spec: &SystemSpec) -> Result<SystemSpec, ModelError> {
        let mut out = spec.clone();
        out.drive = Drive::Linearized {
            delta: self.delta_eff,
            g: self.g_lin.iter().map(|g| g.norm()).collect(),
        };
        out.validated()
    }
}

const FIXED_POINT_RTOL: f64 = 1e-12;
const FIXED_POINT_CAP: usize = 10_000;
const FIXED_POINT_DAMPING: f64 = 0.5;

/// Self-consistent classical amplitudes with the drive phase rotated so that α is
/// real and positive (which makes every `G_j` real).
pub fn linearize(spec: &SystemSpec) -> Result<ClassicalSteadyState, ModelError> {
    let mut ss = linearize_raw(spec)?;
    if ss.alpha.norm() > 0.0 {
        let r = ss.alpha.norm();
        let alpha = C64::new(r, 0.0);
        // α = −iΩ*/(κ+iΔ)  ⇔  Ω = conj(i α (κ+iΔ)) = −i α (κ − iΔ) for real α.
        let omega = -C64::i() * alpha * C64::new(spec.kappa, -ss.delta_eff);
        let g = match &spec.drive {
            Drive::Physical { g_single, .. } => g_single.clone(),
            Drive::Linearized { .. } => unreachable!("checked in linearize_raw"),
        };
        ss.alpha = alpha;
        ss.omega_drive = omega;
        ss.g_lin = g.iter().map(|&gj| alpha * gj).collect();
    }
    Ok(ss)
}

/// Self-consistent classical amplitudes for the drive exactly as given.
///
/// Damped Picard iteration on `Δ`: `α` from `Δ`, `β` from `|α|²` through the
/// chain equations, then `Δ = Δ_c + 2Σ g_j Re β_j`.
pub fn linearize_raw(spec: &SystemSpec) -> Result<ClassicalSteadyState, ModelError> {
    let (delta_c, omega_drive, g) = match &spec.drive {
        Drive::Physical {
            delta_c,
            omega_drive,
            g_single,
        } => (*delta_c, C64::new(omega_drive[0], omega_drive[1]), g_single),
        Drive::Linearized { .. } => {
            return Err(ModelError::InvalidSpec(
                "linearize needs a physical drive".into(),
            ))
        }
    };
    if !(spec.kappa > 0.0) {
        return Err(ModelError::InvalidSpec("linearize needs kappa > 0".into()));
    }
    let n = spec.n_mech;
    let chain = chain_matrix(spec);
    let lu = crate::numkit::Lu::factor(&chain)?;

    let alpha_of = |delta: f64| -C64::i() * omega_drive.conj() / C64::new(spec.kappa, delta);
    let beta_of = |alpha: C64| -> Result<Vec<C64>, ModelError> {
        let a2 = alpha.norm_sqr();
        let rhs = CMatrix::from_fn(n, 1, |j, _| -C64::i() * g[j] * a2);
        let b = lu.solve(&rhs)?;
        Ok((0..n).map(|j| b[(j, 0)]).collect())
    };
    let delta_of =
        |beta: &[C64]| delta_c + 2.0 * g.iter().zip(beta).map(|(gj, b)| gj * b.re).sum::<f64>();

    let mut delta = delta_c;
    for it in 1..=FIXED_POINT_CAP {
        let alpha = alpha_of(delta);
        let beta = beta_of(alpha)?;
        let target = delta_of(&beta);
        if !target.is_finite() {
            return Err(ModelError::NoFixedPoint { iterations: it });
        }
        let change = (target - delta).abs();
        let next = delta + FIXED_POINT_DAMPING * (target - delta);
        if change <= FIXED_POINT_RTOL * target.abs().max(delta.abs()).max(f64::MIN_POSITIVE)
            || change == 0.0
        {
            let alpha = alpha_of(target);
            let beta = beta_of(alpha)?;
            let delta_eff = delta_of(&beta);
            return Ok(ClassicalSteadyState {
                alpha,
                g_lin: g.iter().map(|&gj| alpha * gj).collect(),
                beta,
                delta_eff,
                omega_drive,
                iterations: it,
            });
        }
        delta = next;
    }
    Err(ModelError::NoFixedPoint {
        iterations: FIXED_POINT_CAP,
    })
}

// (γ_j + iω_j) on the diagonal and iη couplings off it, so that
// chain·β = −i g |α|² reproduces the classical mechanical equations.
fn chain_matrix(spec: &SystemSpec) -> CMatrix {
    let n = spec.n_mech;
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = C64::new(spec.gamma[j], spec.omega[j]);
    }
    for j in 0..n.saturating_sub(1) {
        let e = C64::from_polar(spec.eta[j], spec.theta[j]);
        m[(j, j + 1)] = C64::i() * e;
        m[(j + 1, j)] = C64::i() * e.conj();
    }
    m
}

/// Drift and noise matrices of the linearized fluctuation dynamics
/// `u̇ = A u + noise`, `u = [δa, δb₁ … δb_N, δa†, δb₁† … δb_N†]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftModel {
    pub a: CMatrix,
    pub c: CMatrix,
    pub q: CMatrix,
    pub n_mech: usize,
    pub approx: CouplingApprox,
    /// Amplitude decay rates `[κ, γ₁ … γ_N]`.
    pub decay: Vec<f64>,
}

impl DriftModel {
    pub fn dim(&self) -> usize {
        2 * self.n_mech + 2
    }

    /// Index of `δb_j` (0-based `j`).
    pub fn idx_b(&self, j: usize) -> usize {
        1 + j
    }

    /// Offset from an operator to its adjoint in `u`.
    pub fn conj_offset(&self) -> usize {
        self.n_mech + 1
    }
}

/// Builds the drift matrix for a linearized drive and coupling approximation.
pub fn build_drift(spec: &SystemSpec, approx: CouplingApprox) -> Result<DriftModel, ModelError> {
    let spec = spec.clone().validated()?;
    let (delta, g) = spec.linearized()?;
    let n = spec.n_mech;
    let h = n + 1;
    let dim = 2 * h;
    let i = C64::i();
    // Annihilation rows only; creation rows follow by conjugation below.
    let mut top = vec![vec![C64::new(0.0, 0.0); dim]; h];

    top[0][0] = -C64::new(spec.kappa, delta);
    for j in 0..n {
        let b = 1 + j;
        let gj = C64::new(g[j], 0.0);
        top[0][b] = -i * gj;
        top[b][0] = -i * gj.conj();
        top[b][b] = -C64::new(spec.gamma[j], spec.omega[j]);
        if approx.optomechanical == Approx::Full {
            top[0][h + b] = -i * gj;
            top[b][h] = -i * gj;
        }
    }
    for j in 0..n.saturating_sub(1) {
        let (b1, b2) = (1 + j, 2 + j);
        let e = C64::from_polar(spec.eta[j], spec.theta[j]);
        top[b1][b2] = -i * e;
        top[b2][b1] = -i * e.conj();
        if approx.mechanical == Approx::Full {
            top[b1][h + b2] = -i * e;
            top[b2][h + b1] = -i * e;
        }
    }

    let mut a = CMatrix::zeros(dim, dim);
    for r in 0..h {
        for col in 0..h {
            a[(r, col)] = top[r][col];
            a[(r, h + col)] = top[r][h + col];
            a[(h + r, h + col)] = top[r][col].conj();
            a[(h + r, col)] = top[r][h + col].conj();
        }
    }
    let (c, q) = build_noise(&spec);
    Ok(DriftModel {
        a,
        c,
        q,
        n_mech: n,
        approx,
        decay: std::iter::once(spec.kappa)
            .chain(spec.gamma.iter().copied())
            .collect(),
    })
}

/// Diffusion matrices `(C, Q)` with `Q = (C + Cᵀ)/2`; the cavity bath is vacuum.
pub fn build_noise(spec: &SystemSpec) -> (CMatrix, CMatrix) {
    let n = spec.n_mech;
    let h = n + 1;
    let mut c = CMatrix::zeros(2 * h, 2 * h);
    c[(0, h)] = C64::new(2.0 * spec.kappa, 0.0);
    for j in 0..n {
        let b = 1 + j;
        c[(b, h + b)] = C64::new(2.0 * spec.gamma[j] * (spec.nbar[j] + 1.0), 0.0);
        c[(h + b, b)] = C64::new(2.0 * spec.gamma[j] * spec.nbar[j], 0.0);
    }
    let q = (&c + &c.transpose()).scale(C64::new(0.5, 0.0));
    (c, q)
}
