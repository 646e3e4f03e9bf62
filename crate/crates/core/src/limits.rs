//! Adiabatic elimination of the cavity for two resonators: effective
//! couplings, eigenvalues of the reduced dynamics and analytic cooling limits.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Drive, ModelError, SystemSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitsError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which expressions produced the effective couplings and optical rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiForm {
    /// Full Lorentzian sideband expressions.
    Exact,
    /// Resonant, resolved-sideband approximations.
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveTwoMode {
    pub form: XiForm,
    pub xi1: C64,
    pub xi2: C64,
    pub gamma_eff: [f64; 2],
    pub omega_eff: [f64; 2],
    pub gamma_opt: [f64; 2],
    pub omega_opt: [f64; 2],
    pub chi1: f64,
    pub chi2: f64,
    pub chi_plus: f64,
    pub chi_minus: f64,
    pub n_opt: f64,
    pub n_chi1: f64,
    pub n_chi2: f64,
    pub lambda1: C64,
    pub lambda2: C64,
    pub u_disc: C64,
}

impl EffectiveTwoMode {
    /// Reduced dynamical matrix `M` as row-major 2×2.
    pub fn m_matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.gamma_eff[0], self.omega_eff[0]), -self.xi1],
            [-self.xi2, C64::new(self.gamma_eff[1], self.omega_eff[1])],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitResult {
    pub n1: f64,
    pub n2: f64,
    pub form: XiForm,
    pub warnings: Vec<String>,
}

struct TwoModeParams {
    omega: [f64; 2],
    gamma: [f64; 2],
    nbar: [f64; 2],
    g: [f64; 2],
    kappa: f64,
    delta: f64,
    eta: f64,
    theta: f64,
}

fn params(spec: &SystemSpec) -> Result<TwoModeParams, LimitsError> {
    if spec.n_mech != 2 {
        return Err(LimitsError::DomainError(format!(
            "effective two-mode model needs N = 2, got {}",
            spec.n_mech
        )));
    }
    let (delta, g) = spec.linearized()?;
    Ok(TwoModeParams {
        omega: [spec.omega[0], spec.omega[1]],
        gamma: [spec.gamma[0], spec.gamma[1]],
        nbar: [spec.nbar[0], spec.nbar[1]],
        g: [g[0].abs(), g[1].abs()],
        kappa: spec.kappa,
        delta,
        eta: spec.eta[0],
        theta: spec.theta[0],
    })
}

/// Effective model from the exact Lorentzian expressions.
pub fn effective_model(spec: &SystemSpec) -> Result<EffectiveTwoMode, LimitsError> {
    effective_model_with(spec, XiForm::Exact)
}

pub fn effective_model_with(
    spec: &SystemSpec,
    form: XiForm,
) -> Result<EffectiveTwoMode, LimitsError> {
    let p = params(spec)?;
    let i = C64::i();
    let k = p.kappa;
    let d = p.delta;
    let gg = p.g[0] * p.g[1];
    let hop = |sign: f64| C64::from_polar(p.eta, sign * p.theta);

    let (gamma_opt, omega_opt, xi1, xi2) = match form {
        XiForm::Exact => {
            let lor = |x: f64| k * k + x * x;
            let gopt = |l: usize| {
                let (g2, w) = (p.g[l] * p.g[l], p.omega[l]);
                g2 * k / lor(d - w) - g2 * k / lor(d + w)
            };
            let wopt = |l: usize| {
                let (g2, w) = (p.g[l] * p.g[l], p.omega[l]);
                g2 * (d + w) / lor(d + w) + g2 * (d - w) / lor(d - w)
            };
            let xi = |w: f64, sign: f64| {
                gg * C64::new(k, d + w) / lor(d + w) - gg * C64::new(k, -(d - w)) / lor(d - w)
                    - i * hop(sign)
            };
            (
                [gopt(0), gopt(1)],
                [wopt(0), wopt(1)],
                xi(p.omega[1], 1.0),
                xi(p.omega[0], -1.0),
            )
        }
        XiForm::Resonant => {
            let gopt = |l: usize| p.g[l] * p.g[l] / k;
            let wopt = |l: usize| p.g[l] * p.g[l] / (2.0 * p.omega[l]);
            let xi = |w: f64, sign: f64| -(gg / k + i * (hop(sign) - gg / (2.0 * w)));
            (
                [gopt(0), gopt(1)],
                [wopt(0), wopt(1)],
                xi(p.omega[1], 1.0),
                xi(p.omega[0], -1.0),
            )
        }
    };

    let gamma_eff = [p.gamma[0] + gamma_opt[0], p.gamma[1] + gamma_opt[1]];
    let omega_eff = [p.omega[0] - omega_opt[0], p.omega[1] - omega_opt[1]];
    let gsum = gamma_eff[0] + gamma_eff[1];
    let chi1 = xi1.norm_sqr() / gsum;
    let chi2 = xi2.norm_sqr() / gsum;
    let cross = (xi1 * xi2 / gsum).re;
    let root = (chi1 * chi2).sqrt();
    let chi_plus = -root - cross;
    let chi_minus = root - cross;
    let wsum = p.omega[0] + p.omega[1] + 2.0 * d;
    let n_opt = 4.0 * k * k / (wsum * wsum);
    let denom = gsum + 2.0 * chi_plus;
    let n_chi1 = 2.0 * (p.gamma[1] * p.nbar[1] + gamma_opt[1] * n_opt) / denom;
    let n_chi2 = 2.0 * (p.gamma[0] * p.nbar[0] + gamma_opt[0] * n_opt) / denom;

    let split = C64::new(gamma_eff[0] - gamma_eff[1], omega_eff[0] - omega_eff[1]);
    let u_disc = (xi1 * xi2 * 4.0 + split * split).sqrt();
    let centre = C64::new(gsum, omega_eff[0] + omega_eff[1]);
    let lambda1 = (centre - u_disc) * 0.5;
    let lambda2 = (centre + u_disc) * 0.5;

    Ok(EffectiveTwoMode {
        form,
        xi1,
        xi2,
        gamma_eff,
        omega_eff,
        gamma_opt,
        omega_opt,
        chi1,
        chi2,
        chi_plus,
        chi_minus,
        n_opt,
        n_chi1,
        n_chi2,
        lambda1,
        lambda2,
        u_disc,
    })
}

fn regime_warnings(p: &TwoModeParams) -> Vec<String> {
    let mut w = Vec::new();
    let wmin = p.omega[0].min(p.omega[1]);
    let gmax = p.g[0].max(p.g[1]);
    let gmin = p.g[0].min(p.g[1]);
    if p.kappa > 0.4 * wmin {
        w.push(format!(
            "kappa/omega = {:.3} exceeds 0.4; resolved-sideband regime violated",
            p.kappa / wmin
        ));
    }
    if gmax > 0.5 * p.kappa {
        w.push(format!("G/kappa = {:.3}; weak-coupling regime violated", gmax / p.kappa));
    }
    if gmin > 0.0 && p.gamma[0].max(p.gamma[1]) > 0.1 * gmin {
        w.push("gamma is not small compared with G".into());
    }
    w
}

/// Closed-form occupations `n_l = (γ_l n̄_l + γ_{l,opt} n_opt)/(Γ_l+χ₊)
/// + (−1)^{l−1}√χ_l(√χ₁ n_χ₁ − √χ₂ n_χ₂)/(Γ_l+χ₋)`.
pub fn cooling_limit_simplified(
    eff: &EffectiveTwoMode,
    spec: &SystemSpec,
) -> Result<LimitResult, LimitsError> {
    let p = params(spec)?;
    let mut warnings = regime_warnings(&p);
    let transfer = eff.chi1.sqrt() * eff.n_chi1 - eff.chi2.sqrt() * eff.n_chi2;
    let chi = [eff.chi1, eff.chi2];
    let mut n = [0.0; 2];
    for l in 0..2 {
        let pole = eff.gamma_eff[l] + eff.chi_minus;
        if pole.abs() < 0.1 * eff.gamma_eff[l] {
            warnings.push(format!(
                "Gamma_{} + chi_minus = {pole:e} is close to zero; transfer term unreliable",
                l + 1
            ));
        }
        let sign = if l == 0 { 1.0 } else { -1.0 };
        n[l] = (p.gamma[l] * p.nbar[l] + eff.gamma_opt[l] * eff.n_opt)
            / (eff.gamma_eff[l] + eff.chi_plus)
            + sign * chi[l].sqrt() * transfer / pole;
    }
    Ok(LimitResult {
        n1: n[0],
        n2: n[1],
        form: eff.form,
        warnings,
    })
}

/// Eigenvalue-resolved occupations in the `Γ₁ ≈ Γ₂` reduction.
pub fn cooling_limit_full(
    eff: &EffectiveTwoMode,
    spec: &SystemSpec,
) -> Result<LimitResult, LimitsError> {
    let p = params(spec)?;
    let mut warnings = regime_warnings(&p);
    let (g1, g2) = (eff.gamma_eff[0], eff.gamma_eff[1]);
    if (g1 - g2).abs() > 0.2 * g1.max(g2) {
        warnings.push(format!(
            "Gamma_1 = {g1:e} and Gamma_2 = {g2:e} differ by more than 20%"
        ));
    }
    let (l1, l2) = (eff.lambda1, eff.lambda2);
    let one = C64::new(1.0, 0.0);
    let l11 = one / (l1.conj() + l1);
    let l12 = one / (l1.conj() + l2);
    let l22 = one / (l2.conj() + l2);
    let kd = |x: C64, y: C64| {
        one / (C64::new(p.kappa, p.delta) + x) + one / (C64::new(p.kappa, -p.delta) + y)
    };
    let k11 = kd(l1, l1.conj());
    let k21 = kd(l2, l1.conj());
    let k22 = kd(l2, l2.conj());

    let even = (l11 + 2.0 * l12.re + l22).re;
    let odd = (l11 - 2.0 * l12.re + l22).re;
    let opt_even = (l11 * k11).re + 2.0 * (l12 * k21).re + (l22 * k22).re;
    let opt_odd = (l11 * k11).re - 2.0 * (l12 * k21).re + (l22 * k22).re;

    let xi = [eff.xi1.norm(), eff.xi2.norm()];
    let mut n = [0.0; 2];
    for l in 0..2 {
        let o = 1 - l;
        let own = p.gamma[l] * p.nbar[l] / 2.0 * even + p.g[l] * p.g[l] / 4.0 * opt_even;
        let other = xi[l] / (4.0 * xi[o])
            * (p.g[o] * p.g[o] * opt_odd + 2.0 * p.gamma[o] * p.nbar[o] * odd);
        n[l] = own + other;
    }
    Ok(LimitResult {
        n1: n[0],
        n2: n[1],
        form: eff.form,
        warnings,
    })
}

/// Both analytic limits at the system's own detuning: the closed form from the
/// resonant approximations, the eigenvalue-resolved form from exact Lorentzians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsReport {
    pub simplified: LimitResult,
    pub full: LimitResult,
    pub effective_exact: EffectiveTwoMode,
    pub effective_resonant: EffectiveTwoMode,
}

pub fn limits_report(spec: &SystemSpec) -> Result<LimitsReport, LimitsError> {
    let exact = effective_model_with(spec, XiForm::Exact)?;
    let resonant = effective_model_with(spec, XiForm::Resonant)?;
    Ok(LimitsReport {
        simplified: cooling_limit_simplified(&resonant, spec)?,
        full: cooling_limit_full(&exact, spec)?,
        effective_exact: exact,
        effective_resonant: resonant,
    })
}

/// Copy of `spec` with the detuning set to `ω_l` (0-based `l`), where the
/// cooling limit of resonator `l` is defined.
pub fn at_optimal_detuning(spec: &SystemSpec, l: usize) -> Result<SystemSpec, LimitsError> {
    let omega = *spec
        .omega
        .get(l)
        .ok_or_else(|| LimitsError::DomainError(format!("no resonator with index {l}")))?;
    let mut out = spec.clone();
    match &mut out.drive {
        Drive::Linearized { delta, .. } => *delta = omega,
        Drive::Physical { .. } => {
            return Err(LimitsError::DomainError(
                "optimal detuning needs a linearized drive".into(),
            ))
        }
    }
    Ok(out)
}
