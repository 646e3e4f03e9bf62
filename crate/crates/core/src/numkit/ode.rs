use num_complex::Complex64 as C64;

use super::{CMatrix, NumError};

const BLOWUP: f64 = 1e12;
// Above this many steps the one-step affine map is composed by repeated squaring.
const DIRECT_STEP_LIMIT: u64 = 4096;
// Largest vec(X) length for which the one-step propagator is materialized.
const PROPAGATOR_DIM_CAP: usize = 1024;

/// Right-hand side of the differential Lyapunov flow, `aX + Xaᵀ + r`.
pub fn lyapunov_flow_rhs(a: &CMatrix, x: &CMatrix, r: &CMatrix) -> CMatrix {
    let ax = a * x;
    let xat = x * &a.transpose();
    &(&ax + &xat) + r
}

/// Default RK4 step `0.01 / max(|Re λ|, ‖a‖)`.
///
/// `‖a‖_∞` bounds every |λ|, so it is the value that wins in practice; the
/// diagonal real parts guard against an all-zero norm row structure.
pub fn default_dt(a: &CMatrix) -> f64 {
    let re_max = (0..a.rows().min(a.cols()))
        .map(|i| a[(i, i)].re.abs())
        .fold(0.0, f64::max);
    let scale = a.norm_inf().max(re_max);
    if scale > 0.0 {
        0.01 / scale
    } else {
        0.01
    }
}

fn rk4_step(a: &CMatrix, r: &CMatrix, x: &CMatrix, dt: f64) -> CMatrix {
    let h = C64::new(dt, 0.0);
    let half = C64::new(0.5 * dt, 0.0);
    let k1 = lyapunov_flow_rhs(a, x, r);
    let k2 = lyapunov_flow_rhs(a, &(x + &k1.scale(half)), r);
    let k3 = lyapunov_flow_rhs(a, &(x + &k2.scale(half)), r);
    let k4 = lyapunov_flow_rhs(a, &(x + &k3.scale(h)), r);
    let sum = &(&k1 + &k2.scale(C64::new(2.0, 0.0))) + &(&k3.scale(C64::new(2.0, 0.0)) + &k4);
    x + &sum.scale(C64::new(dt / 6.0, 0.0))
}

fn check(x: &CMatrix, time: f64) -> Result<(), NumError> {
    if !x.is_finite() || x.max_abs() > BLOWUP {
        Err(NumError::BlowUp { time })
    } else {
        Ok(())
    }
}

/// Integrates `dX/dt = aX + Xaᵀ + rhs_const` from `x0` to `t_end` with fixed-step RK4.
///
/// The step count is `ceil(t_end / dt)` and the step is shrunk to land exactly on
/// `t_end`. Long runs compose the exact one-step affine map by binary powering,
/// which yields the same iterate as stepping one by one up to rounding.
pub fn integrate_linear_ode(
    a: &CMatrix,
    rhs_const: &CMatrix,
    x0: &CMatrix,
    t_end: f64,
    dt: f64,
) -> Result<CMatrix, NumError> {
    if !a.is_square() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if rhs_const.dim() != a.dim() || x0.dim() != a.dim() {
        return Err(NumError::DimensionMismatch {
            expected: a.dim(),
            found: if x0.dim() != a.dim() {
                x0.dim()
            } else {
                rhs_const.dim()
            },
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NumError::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(NumError::InvalidArgument(format!(
            "t_end must be nonnegative, got {t_end}"
        )));
    }
    if t_end == 0.0 {
        return Ok(x0.clone());
    }
    let steps = (t_end / dt).ceil().max(1.0) as u64;
    let h = t_end / steps as f64;
    let n = a.rows();

    if steps <= DIRECT_STEP_LIMIT || n * n > PROPAGATOR_DIM_CAP {
        let mut x = x0.clone();
        for s in 0..steps {
            x = rk4_step(a, rhs_const, &x, h);
            check(&x, (s + 1) as f64 * h)?;
        }
        return Ok(x);
    }

    // One step is X -> L(X) + c. Materialize L on vec(X) from basis responses.
    let m = n * n;
    let zero = CMatrix::zeros(n, n);
    let c = rk4_step(a, rhs_const, &zero, h).vectorize();
    let mut lin = CMatrix::zeros(m, m);
    for col in 0..m {
        let mut e = CMatrix::zeros(n, n);
        e[(col % n, col / n)] = C64::new(1.0, 0.0);
        let img = rk4_step(a, &zero, &e, h).vectorize();
        for row in 0..m {
            lin[(row, col)] = img[(row, 0)];
        }
    }

    // Binary powering of the affine map (L, c).
    let mut x = x0.vectorize();
    let mut pow_l = lin;
    let mut pow_c = c;
    let mut remaining = steps;
    let mut pow_steps = 1u64;
    let mut done = 0u64;
    while remaining > 0 {
        if remaining & 1 == 1 {
            x = &(&pow_l * &x) + &pow_c;
            done += pow_steps;
            check(&x, done as f64 * h)?;
        }
        remaining >>= 1;
        if remaining > 0 {
            pow_c = &(&pow_l * &pow_c) + &pow_c;
            pow_l = &pow_l * &pow_l;
            pow_steps *= 2;
            check(&pow_c, (pow_steps as f64) * h)?;
        }
    }
    CMatrix::unvectorize(&x, n, n)
}
