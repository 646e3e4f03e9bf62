//! Input-output scattering: transformation matrix, transmittances and
//! relative phonon-scattering rates.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{DriftModel, ModelError, SystemSpec};
use crate::numkit::{self, CMatrix, NumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("scattering matrix shape {found:?} does not match {n_mech} mechanical modes")]
    ShapeMismatch {
        found: (usize, usize),
        n_mech: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Two-resonator cooperativities and their ratio `Π = C₃/(C₁C₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cooperativities {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub pi_ratio: f64,
}

impl Cooperativities {
    pub fn new(g1: f64, g2: f64, kappa: f64, gamma1: f64, gamma2: f64, eta: f64) -> Self {
        let c1 = g1 * g1 / (gamma1 * kappa);
        let c2 = g2 * g2 / (gamma2 * kappa);
        let c3 = eta * eta / (gamma1 * gamma2);
        Self {
            c1,
            c2,
            c3,
            pi_ratio: c3 / (c1 * c2),
        }
    }

    /// Cooperativities of a linearized two-resonator spec.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self, SpectraError> {
        if spec.n_mech != 2 {
            return Err(SpectraError::DomainError(format!(
                "cooperativities need two resonators, got {}",
                spec.n_mech
            )));
        }
        let (_, g) = spec.linearized()?;
        Ok(Self::new(
            g[0],
            g[1],
            spec.kappa,
            spec.gamma[0],
            spec.gamma[1],
            spec.eta[0],
        ))
    }

    /// Resonant maximum transmittance `4(√(C₁C₂)+√C₃)²/(C₁+C₂+C₃+1)²`.
    pub fn t_max(&self) -> f64 {
        let num = (self.c1 * self.c2).sqrt() + self.c3.sqrt();
        let den = self.c1 + self.c2 + self.c3 + 1.0;
        4.0 * num * num / (den * den)
    }
}

/// `U(ω) = Γ(−iωI − A)⁻¹Γ − I` with `Γ = diag(√2κ, √2γ_j …, √2κ, √2γ_j …)`.
pub fn scattering_matrix(drift: &DriftModel, omega: f64) -> Result<CMatrix, SpectraError> {
    let dim = drift.dim();
    let h = drift.n_mech + 1;
    let gamma: Vec<C64> = (0..dim)
        .map(|k| C64::new((2.0 * drift.decay[k % h]).sqrt(), 0.0))
        .collect();
    let lhs = &CMatrix::identity(dim).scale(C64::new(0.0, -omega)) - &drift.a;
    let rhs = CMatrix::from_diag(&gamma);
    let x = numkit::solve_linear(&lhs, &rhs)?;
    let gx = &rhs * &x;
    Ok(&gx - &CMatrix::identity(dim))
}

/// `T_vw = |U_vw|² + |U_{v,w+N+1}|²` over the labels `a, b₁ … b_N`.
pub fn transmittances(u: &CMatrix, n_mech: usize) -> Result<Vec<Vec<f64>>, SpectraError> {
    let h = n_mech + 1;
    if u.dim() != (2 * h, 2 * h) {
        return Err(SpectraError::ShapeMismatch {
            found: u.dim(),
            n_mech,
        });
    }
    Ok((0..h)
        .map(|v| {
            (0..h)
                .map(|w| u[(v, w)].norm_sqr() + u[(v, w + h)].norm_sqr())
                .collect()
        })
        .collect())
}

/// Closed-form resonant `Λ_{b₂b₁}`; `Λ_{b₁b₂}` is its negative.
pub fn lambda_analytic(coop: &Cooperativities, theta: f64) -> Result<f64, SpectraError> {
    let prod = coop.c1 * coop.c2;
    if !(prod > 0.0) || !prod.is_finite() {
        return Err(SpectraError::DomainError(
            "C1*C2 must be positive and finite".into(),
        ));
    }
    let pi = coop.pi_ratio;
    let sp = pi.sqrt();
    let lead = 4.0 * sp * theta.sin() / ((1.0 + sp) * (1.0 + sp));
    let d = (coop.c1 + coop.c2 + 1.0) / prod + pi;
    let cos = theta.cos();
    Ok(lead / (1.0 + 4.0 * pi * cos * cos / (d * d)))
}

/// `Λ_vw = (T_vw − T_wv)/T_max` over the mechanical labels (`N×N`, index `j` is `b_{j+1}`).
pub fn lambda_from_t(t: &[Vec<f64>], t_max: f64) -> Vec<Vec<f64>> {
    let n = t.len() - 1;
    (0..n)
        .map(|v| {
            (0..n)
                .map(|w| (t[v + 1][w + 1] - t[w + 1][v + 1]) / t_max)
                .collect()
        })
        .collect()
}

/// Numeric relative scattering rates at one probe frequency.
pub fn lambda_numeric(
    drift: &DriftModel,
    omega: f64,
    coop: &Cooperativities,
) -> Result<Vec<Vec<f64>>, SpectraError> {
    let u = scattering_matrix(drift, omega)?;
    let t = transmittances(&u, drift.n_mech)?;
    Ok(lambda_from_t(&t, coop.t_max()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringPoint {
    pub omega: f64,
    pub u: CMatrix,
    /// Rows and columns labelled `a, b₁ … b_N`.
    pub t: Vec<Vec<f64>>,
    /// Mechanical block only; empty when no normalizer is supplied.
    pub lambda_rel: Vec<Vec<f64>>,
}

pub fn scattering_point(
    drift: &DriftModel,
    omega: f64,
    coop: Option<&Cooperativities>,
) -> Result<ScatteringPoint, SpectraError> {
    let u = scattering_matrix(drift, omega)?;
    let t = transmittances(&u, drift.n_mech)?;
    let lambda_rel = coop.map_or_else(Vec::new, |c| lambda_from_t(&t, c.t_max()));
    Ok(ScatteringPoint {
        omega,
        u,
        t,
        lambda_rel,
    })
}

/// Evaluates a probe grid in parallel; output order follows `omegas`.
pub fn scan(
    drift: &DriftModel,
    omegas: &[f64],
    coop: Option<&Cooperativities>,
) -> Result<Vec<ScatteringPoint>, SpectraError> {
    omegas
        .par_iter()
        .map(|&w| scattering_point(drift, w, coop))
        .collect()
}

/// `n` evenly spaced points on `[start, stop]`, endpoints included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
