//! Steady-state covariance from the Lyapunov equation, phonon occupations and
//! stability certification.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::model::DriftModel;
use crate::numkit::{self, CMatrix, NumError};

/// `stable` requires the spectral abscissa to sit below this margin.
pub const STABILITY_MARGIN: f64 = -1e-12;
/// Lyapunov solves refuse abscissas at or above this value.
pub const SOLVE_MARGIN: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyError {
    #[error("drift is not Hurwitz (spectral abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },
    #[error("covariance shape {found:?} does not match {n_mech} mechanical modes")]
    ShapeMismatch {
        found: (usize, usize),
        n_mech: usize,
    },
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingReport {
    pub n_f: Vec<f64>,
    pub n_cav: f64,
    pub stable: bool,
    pub spectral_abscissa: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupations {
    pub n_f: Vec<f64>,
    pub n_cav: f64,
}

/// Stability verdict and spectral abscissa of the drift matrix.
pub fn stability_check(drift: &DriftModel) -> Result<(bool, f64), SteadyError> {
    let eig = numkit::eigenvalues(&drift.a)?;
    if !eig.converged {
        return Err(NumError::NoConvergence {
            iterations: eig.iterations,
        }
        .into());
    }
    let abscissa = eig.spectral_abscissa();
    Ok((abscissa < STABILITY_MARGIN, abscissa))
}

/// Solves `AV + VAᵀ = −Q` for a Hurwitz drift.
pub fn lyapunov_solve(drift: &DriftModel) -> Result<CMatrix, SteadyError> {
    let (_, abscissa) = stability_check(drift)?;
    if abscissa >= SOLVE_MARGIN {
        return Err(SteadyError::Unstable { abscissa });
    }
    Ok(lyapunov_solve_matrices(&drift.a, &drift.q)?)
}

/// Dense Kronecker solve of `aV + Vaᵀ = −q` without any stability screening.
pub fn lyapunov_solve_matrices(a: &CMatrix, q: &CMatrix) -> Result<CMatrix, NumError> {
    if !a.is_square() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if q.dim() != a.dim() {
        return Err(NumError::DimensionMismatch {
            expected: a.dim(),
            found: q.dim(),
        });
    }
    let n = a.rows();
    let eye = CMatrix::identity(n);
    let lifted = &numkit::kron(&eye, a)? + &numkit::kron(a, &eye)?;
    let rhs = (-q).vectorize();
    let v = numkit::solve_linear(&lifted, &rhs)?;
    CMatrix::unvectorize(&v, n, n)
}

/// `‖AV + VAᵀ + Q‖_∞`.
pub fn lyapunov_residual(a: &CMatrix, v: &CMatrix, q: &CMatrix) -> f64 {
    let lhs = &(&(a * v) + &(v * &a.transpose())) + q;
    lhs.norm_inf()
}

/// Occupations `⟨δb_j†δb_j⟩ = V[N+1+j][j] − ½` and likewise for the cavity.
pub fn phonon_numbers(v: &CMatrix, n_mech: usize) -> Result<Occupations, SteadyError> {
    let dim = 2 * n_mech + 2;
    if v.dim() != (dim, dim) {
        return Err(SteadyError::ShapeMismatch {
            found: v.dim(),
            n_mech,
        });
    }
    let h = n_mech + 1;
    Ok(Occupations {
        n_f: (1..=n_mech).map(|j| v[(h + j, j)].re - 0.5).collect(),
        n_cav: v[(h, 0)].re - 0.5,
    })
}

/// Stability check, Lyapunov solve and occupation extraction in one pass.
///
/// Unstable drifts produce a report with `stable = false` and NaN occupations.
pub fn solve_cooling(drift: &DriftModel) -> Result<CoolingReport, SteadyError> {
    let (stable, abscissa) = stability_check(drift)?;
    if !stable || abscissa >= SOLVE_MARGIN {
        return Ok(CoolingReport {
            n_f: vec![f64::NAN; drift.n_mech],
            n_cav: f64::NAN,
            stable: false,
            spectral_abscissa: abscissa,
            residual: f64::NAN,
        });
    }
    let v = lyapunov_solve_matrices(&drift.a, &drift.q)?;
    let occ = phonon_numbers(&v, drift.n_mech)?;
    Ok(CoolingReport {
        n_f: occ.n_f,
        n_cav: occ.n_cav,
        stable: true,
        spectral_abscissa: abscissa,
        residual: lyapunov_residual(&drift.a, &v, &drift.q),
    })
}

/// Determinant of the symmetrized quadrature covariance of every mode
/// (cavity first); physical states satisfy `det ≥ 1/4`.
pub fn quadrature_determinants(v: &CMatrix, n_mech: usize) -> Result<Vec<f64>, SteadyError> {
    let dim = 2 * n_mech + 2;
    if v.dim() != (dim, dim) {
        return Err(SteadyError::ShapeMismatch {
            found: v.dim(),
            n_mech,
        });
    }
    let h = n_mech + 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // x = (b + b†)/√2, p = −i(b − b†)/√2.
    let t = CMatrix::from_rows(&[
        vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        vec![C64::new(0.0, -s), C64::new(0.0, s)],
    ])?;
    (0..h)
        .map(|k| {
            let idx = [k, h + k];
            let sub = CMatrix::from_fn(2, 2, |i, j| v[(idx[i], idx[j])]);
            let sigma = &(&t * &sub) * &t.transpose();
            let det = sigma[(0, 0)] * sigma[(1, 1)] - sigma[(0, 1)] * sigma[(1, 0)];
            Ok(det.re)
        })
        .collect()
}
