//! Mode structure: bright/dark and hybrid decompositions for two resonators,
//! normal modes of an N-resonator chain, and the three-level Lambda analogue.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::limits::{self, LimitsError};
use crate::model::{ModelError, SystemSpec};
use crate::numkit::{self, CMatrix, NumError};

/// A collective mode is dark when `|coupling| ≤ DARK_RTOL · max_j G_j`.
pub const DARK_RTOL: f64 = 1e-10;
const DEGENERATE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModesError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, ModesError> {
    Err(ModesError::DomainError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrightDarkModes {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub zeta: f64,
    pub g_plus: f64,
    /// `(G₁, G₂)/G₊`.
    pub weights: [f64; 2],
    pub dark_mode_exists: bool,
}

/// Bright/dark decomposition of two resonators without phonon hopping.
pub fn bright_dark(spec: &SystemSpec) -> Result<BrightDarkModes, ModesError> {
    if spec.n_mech != 2 {
        return domain("bright/dark decomposition needs N = 2");
    }
    if spec.eta[0] != 0.0 {
        return domain("bright/dark decomposition needs eta = 0");
    }
    let (_, g) = spec.linearized()?;
    let (g1, g2) = (g[0], g[1]);
    let (w1, w2) = (spec.omega[0], spec.omega[1]);
    let gp2 = g1 * g1 + g2 * g2;
    if !(gp2 > 0.0) {
        return domain("bright mode undefined when G1 = G2 = 0");
    }
    let gp = gp2.sqrt();
    Ok(BrightDarkModes {
        omega_plus: (g1 * g1 * w1 + g2 * g2 * w2) / gp2,
        omega_minus: (g2 * g2 * w1 + g1 * g1 * w2) / gp2,
        zeta: g1 * g2 * (w1 - w2) / gp2,
        g_plus: gp,
        weights: [g1 / gp, g2 / gp],
        dark_mode_exists: (w1 - w2).abs() <= DEGENERATE_RTOL * w1.max(w2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridModes {
    pub omega_tilde_plus: f64,
    pub omega_tilde_minus: f64,
    pub f: f64,
    pub h: f64,
    pub g_tilde_plus: C64,
    pub g_tilde_minus: C64,
    /// `min(|G̃₊|, |G̃₋|)/G₊`.
    pub darkness: f64,
    pub dark_mode_exists: bool,
}

/// Hybrid modes of two hopping-coupled resonators and their cavity couplings.
pub fn hybrid_transform(spec: &SystemSpec) -> Result<HybridModes, ModesError> {
    if spec.n_mech != 2 {
        return domain("hybrid transform needs N = 2");
    }
    let eta = spec.eta[0];
    if !(eta > 0.0) {
        return domain("hybrid transform needs eta > 0");
    }
    let (_, g) = spec.linearized()?;
    let (g1, g2) = (g[0], g[1]);
    let (w1, w2) = (spec.omega[0], spec.omega[1]);
    let theta = spec.theta[0];
    let split = ((w1 - w2).powi(2) + 4.0 * eta * eta).sqrt();
    let wp = 0.5 * (w1 + w2 + split);
    let wm = 0.5 * (w1 + w2 - split);
    let x = wm - w1;
    let f = x.abs() / (x * x + eta * eta).sqrt();
    let h = eta * f / x;
    let phase = C64::from_polar(1.0, theta);
    let gtp = f * g1 - phase.conj() * h * g2;
    let gtm = phase * h * g1 + f * g2;
    let gp = (g1 * g1 + g2 * g2).sqrt();
    let darkness = if gp > 0.0 {
        gtp.norm().min(gtm.norm()) / gp
    } else {
        0.0
    };
    Ok(HybridModes {
        omega_tilde_plus: wp,
        omega_tilde_minus: wm,
        f,
        h,
        g_tilde_plus: gtp,
        g_tilde_minus: gtm,
        darkness,
        dark_mode_exists: darkness <= DARK_RTOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalModeAnalysis {
    pub n: usize,
    pub method: ModeMethod,
    /// Ordered by `k = 1 … N` (descending frequency).
    pub omega_k: Vec<f64>,
    pub coupling_k: Vec<C64>,
    pub dark_flags: Vec<bool>,
    pub dark_count: usize,
    pub predicted_uncooled: f64,
    pub norm_a: f64,
    pub warnings: Vec<String>,
}

fn is_uniform(xs: &[f64]) -> bool {
    xs.windows(2)
        .all(|w| (w[0] - w[1]).abs() <= DEGENERATE_RTOL * w[0].abs().max(w[1].abs()))
}

/// Normal modes of the chain and their couplings to the cavity.
///
/// Uniform chains use `Ω_k = ω_m + 2η cos(kπ/(N+1))` and
/// `c_k = (G/A) Σ_j e^{iφ_j} sin(jkπ/(N+1))` with `φ_j = Σ_{ν<j} θ_ν`.
/// Anything else is diagonalized numerically.
pub fn normal_modes(spec: &SystemSpec) -> Result<NormalModeAnalysis, ModesError> {
    let (_, g) = spec.linearized()?;
    let n = spec.n_mech;
    let norm_a = ((n as f64 + 1.0) / 2.0).sqrt();
    let gmax = g.iter().copied().fold(0.0, f64::max);
    let mean_nbar = spec.nbar.iter().sum::<f64>() / n as f64;
    let predicted_uncooled = mean_nbar * (n as f64 - 1.0) / n as f64;
    let mut warnings = Vec::new();

    let uniform = is_uniform(&spec.omega) && is_uniform(&spec.eta) && is_uniform(g);
    let (method, omega_k, coupling_k): (ModeMethod, Vec<f64>, Vec<C64>) = if uniform {
        let wm = spec.omega[0];
        let eta = spec.eta.first().copied().unwrap_or(0.0);
        let gg = g[0];
        let mut phi = vec![0.0; n];
        for j in 1..n {
            phi[j] = phi[j - 1] + spec.theta[j - 1];
        }
        let step = PI / (n as f64 + 1.0);
        let omega_k = (1..=n)
            .map(|k| wm + 2.0 * eta * (k as f64 * step).cos())
            .collect();
        let coupling_k = (1..=n)
            .map(|k| {
                let s: C64 = (1..=n)
                    .map(|j| C64::from_polar(1.0, phi[j - 1]) * ((j * k) as f64 * step).sin())
                    .sum();
                s * (gg / norm_a)
            })
            .collect();
        (ModeMethod::ClosedForm, omega_k, coupling_k)
    } else {
        warnings.push(
            "non-uniform chain: normal modes obtained by numerical diagonalization".to_string(),
        );
        let eig = numkit::hermitian_eigen(&spec.mechanical_hamiltonian())?;
        // Descending frequency to mirror k = 1 … N of the uniform chain.
        let order: Vec<usize> = (0..n).rev().collect();
        let omega_k = order.iter().map(|&k| eig.values[k]).collect();
        let coupling_k = order
            .iter()
            .map(|&k| (0..n).map(|j| eig.vectors[(j, k)] * g[j]).sum())
            .collect();
        (ModeMethod::Numeric, omega_k, coupling_k)
    };
    let dark_flags: Vec<bool> = coupling_k
        .iter()
        .map(|c: &C64| c.norm() <= DARK_RTOL * gmax)
        .collect();
    let dark_count = dark_flags.iter().filter(|&&d| d).count();
    Ok(NormalModeAnalysis {
        n,
        method,
        omega_k,
        coupling_k,
        dark_flags,
        dark_count,
        predicted_uncooled,
        norm_a,
        warnings,
    })
}

/// Ascending eigenvalues of the Hermitian mechanical block.
pub fn mechanical_block_eigenvalues(spec: &SystemSpec) -> Result<Vec<f64>, ModesError> {
    Ok(numkit::hermitian_eigen(&spec.mechanical_hamiltonian())?.values)
}

/// Smallest cavity coupling reachable by any mechanical normal mode, relative
/// to `G₊ = (Σ_j G_j²)^{1/2}`. A degenerate eigenspace of dimension two or more
/// always contains a decoupled combination, which gives zero.
pub fn darkness(spec: &SystemSpec) -> Result<f64, ModesError> {
    let (_, g) = spec.linearized()?;
    let gp = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(gp > 0.0) {
        return Ok(0.0);
    }
    let eig = numkit::hermitian_eigen(&spec.mechanical_hamiltonian())?;
    let n = spec.n_mech;
    let scale = spec.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut best = f64::INFINITY;
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && eig.values[end] - eig.values[k] <= 1e-9 * scale {
            end += 1;
        }
        if end - k > 1 {
            return Ok(0.0);
        }
        let c: C64 = (0..n).map(|j| eig.vectors[(j, k)].conj() * g[j]).sum();
        best = best.min(c.norm() / gp);
        k = end;
    }
    Ok(best)
}

/// Two resonators sit in the near-degenerate window when `|ω₂ − ω₁| ≤ Γ`,
/// with `Γ` the larger effective linewidth.
pub fn in_shadow_area(spec: &SystemSpec) -> Result<bool, ModesError> {
    let eff = limits::effective_model(spec)?;
    let width = eff.gamma_eff[0].max(eff.gamma_eff[1]);
    Ok((spec.omega[1] - spec.omega[0]).abs() <= width)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaSystem {
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega_b: f64,
    pub theta: f64,
}

impl LambdaSystem {
    /// Symmetric resonant case `Ω₁ = Ω₂ = 1`, `Δ = 0`, `Ω_b = η`.
    pub fn symmetric(eta: f64, theta: f64) -> Self {
        Self {
            delta: 0.0,
            omega1: 1.0,
            omega2: 1.0,
            omega_b: eta,
            theta,
        }
    }

    pub fn is_symmetric_resonant(&self) -> bool {
        self.delta == 0.0 && self.omega1 == self.omega2 && self.omega1 > 0.0
    }

    /// `η = Ω_b/Ω` (relative to `Ω₁`).
    pub fn eta_ratio(&self) -> f64 {
        self.omega_b / self.omega1
    }

    /// Interaction matrix over `(e, f, g)` divided by `Ω₁`.
    pub fn matrix(&self) -> CMatrix {
        let s = 1.0 / self.omega1;
        let c = |x: f64| C64::new(x * s, 0.0);
        let hop = C64::from_polar(self.omega_b * s, self.theta);
        CMatrix::from_rows(&[
            vec![c(self.delta), c(self.omega2), c(self.omega1)],
            vec![c(self.omega2), c(0.0), hop],
            vec![c(self.omega1), hop.conj(), c(0.0)],
        ])
        .expect("3x3 literal")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cardano {
    pub q: f64,
    pub r: f64,
    pub s1: C64,
    pub s2: C64,
    /// Largest imaginary part discarded when forming the real roots.
    pub imag_residue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEigen {
    /// In units of `Ω₁`.
    pub lambdas: [f64; 3],
    /// Amplitudes on `(e, f, g)`.
    pub vectors: [[C64; 3]; 3],
    pub p_e: [f64; 3],
    pub dark_index: Option<usize>,
    pub cardano: Option<Cardano>,
    /// Which eigenvectors came from the numeric fallback.
    pub numeric_vectors: [bool; 3],
}

/// Threshold on `P_e` below which an eigenstate counts as dark.
pub const DARK_PE_TOL: f64 = 1e-10;
// Closed-form eigenvectors are used only when |λ² − 1| exceeds this.
const POLE_GUARD: f64 = 1e-6;

/// Real roots of `λ³ − (2+η²)λ − 2η cos θ = 0` by Cardano's formula.
pub fn cardano_roots(eta: f64, theta: f64) -> ([f64; 3], Cardano) {
    let q = -(2.0 + eta * eta) / 3.0;
    let r = eta * theta.cos();
    // q³ + r² ≤ 0 for every real η, θ (three real roots).
    let disc = (q * q * q + r * r).min(0.0);
    let s1 = C64::new(r, (-disc).sqrt()).cbrt();
    let s2 = s1.conj();
    let w = C64::new(0.0, 3f64.sqrt() / 2.0);
    let l = [
        s1 + s2,
        -(s1 + s2) * 0.5 + w * (s1 - s2),
        -(s1 + s2) * 0.5 - w * (s1 - s2),
    ];
    let imag_residue = l.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (
        [l[0].re, l[1].re, l[2].re],
        Cardano {
            q,
            r,
            s1,
            s2,
            imag_residue,
        },
    )
}

/// Eigenvalues at `θ = nπ` in closed form: `((−1)^{n+1}η, ½[(−1)^nη ∓ √(8+η²)])`.
pub fn closed_form_theta_npi(eta: f64, n: i64) -> [f64; 3] {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let root = (8.0 + eta * eta).sqrt();
    [-sign * eta, 0.5 * (sign * eta - root), 0.5 * (sign * eta + root)]
}

fn normalize(v: [C64; 3]) -> [C64; 3] {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub fn lambda_eigensystem(sys: &LambdaSystem) -> Result<LambdaEigen, ModesError> {
    if !(sys.omega1 > 0.0) || sys.omega2 < 0.0 || sys.omega_b < 0.0 {
        return domain("Lambda amplitudes must be nonnegative with omega1 > 0");
    }
    let m = sys.matrix();
    let numeric = numkit::hermitian_eigen(&m)?;
    let numeric_vec = |k: usize| -> [C64; 3] {
        [
            numeric.vectors[(0, k)],
            numeric.vectors[(1, k)],
            numeric.vectors[(2, k)],
        ]
    };

    let (lambdas, cardano) = if sys.is_symmetric_resonant() {
        let (l, c) = cardano_roots(sys.eta_ratio(), sys.theta);
        (l, Some(c))
    } else {
        (
            [numeric.values[0], numeric.values[1], numeric.values[2]],
            None,
        )
    };

    let eta = sys.eta_ratio();
    let hop = C64::from_polar(eta, sys.theta);
    let scale = lambdas.iter().map(|l| l.abs()).fold(1.0, f64::max);
    let mut vectors = [[C64::new(0.0, 0.0); 3]; 3];
    let mut numeric_vectors = [false; 3];
    let mut assigned = [false; 3];

    for s in 0..3 {
        let l = lambdas[s];
        let degenerate = (0..3).any(|t| t != s && (lambdas[t] - l).abs() <= 1e-8 * scale);
        if cardano.is_some() && (l * l - 1.0).abs() > POLE_GUARD && !degenerate {
            let d = l * l - 1.0;
            vectors[s] = normalize([(hop + l) / d, (hop * l + 1.0) / d, C64::new(1.0, 0.0)]);
            assigned[s] = true;
        }
    }
    // Fallback: take eigenvectors from the Hermitian solver, matching by value.
    let mut used = [false; 3];
    for s in 0..3 {
        if assigned[s] {
            let k = nearest(&numeric.values, lambdas[s], &used);
            used[k] = true;
        }
    }
    for s in 0..3 {
        if !assigned[s] {
            let k = nearest(&numeric.values, lambdas[s], &used);
            used[k] = true;
            vectors[s] = numeric_vec(k);
            numeric_vectors[s] = true;
        }
    }
    // Inside a degenerate pair, rotate so that one member has no |e⟩ weight.
    for s in 0..3 {
        for t in (s + 1)..3 {
            if numeric_vectors[s]
                && numeric_vectors[t]
                && (lambdas[s] - lambdas[t]).abs() <= 1e-8 * scale
            {
                let (u, v) = (vectors[s], vectors[t]);
                let (a, b) = (u[0], v[0]);
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                if norm > 0.0 {
                    let w1 = [0, 1, 2].map(|i| (b * u[i] - a * v[i]) / norm);
                    let w2 = [0, 1, 2].map(|i| (a.conj() * u[i] + b.conj() * v[i]) / norm);
                    vectors[s] = w1;
                    vectors[t] = w2;
                }
            }
        }
    }

    let p_e = [0, 1, 2].map(|s| vectors[s][0].norm_sqr());
    let (imin, pmin) = p_e
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    Ok(LambdaEigen {
        lambdas,
        vectors,
        p_e,
        dark_index: (pmin <= DARK_PE_TOL).then_some(imin),
        cardano,
        numeric_vectors,
    })
}

fn nearest(values: &[f64], target: f64, used: &[bool; 3]) -> usize {
    (0..values.len())
        .filter(|&k| !used[k])
        .min_by(|&a, &b| {
            (values[a] - target)
                .abs()
                .total_cmp(&(values[b] - target).abs())
        })
        .expect("three eigenvalues")
}
