use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{CMatrix, NumError};

/// Eigenvalues of a general complex matrix plus convergence bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub values: Vec<C64>,
    pub converged: bool,
    pub iterations: usize,
}

impl EigenResult {
    /// Largest real part among the eigenvalues.
    pub fn spectral_abscissa(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 100;

/// Eigenvalues by Householder reduction to Hessenberg form followed by
/// explicitly shifted QR sweeps (Wilkinson shift, Givens rotations).
///
/// A run that exhausts the iteration budget still returns the current diagonal
/// as its best estimate, with `converged == false`.
pub fn eigenvalues(a: &CMatrix) -> Result<EigenResult, NumError> {
    if !a.is_square() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut h = a.clone();
    hessenberg_in_place(&mut h);

    let mut values = vec![C64::new(0.0, 0.0); n];
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n.max(1);
    let mut hi = n - 1;
    let mut its = 0usize;

    loop {
        if hi == 0 {
            values[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the trailing unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let sub = h[(lo, lo - 1)].norm();
            if sub <= f64::EPSILON * s || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= budget {
            for (i, v) in values.iter_mut().enumerate().take(hi + 1) {
                *v = h[(i, i)];
            }
            return Ok(EigenResult {
                values,
                converged: false,
                iterations: total,
            });
        }
        let shift = if its > 0 && its.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_sweep(&mut h, lo, hi, shift);
        its += 1;
        total += 1;
    }

    Ok(EigenResult {
        values,
        converged: true,
        iterations: total,
    })
}

fn wilkinson_shift(h: &CMatrix, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens pair `(c, s)` with `[c s; -s̄ c]·[a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = C64::new(0.0, 0.0);
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + s.conj() * y;
            h[(i, k + 1)] = -s * x + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Unitary similarity reduction to upper Hessenberg form.
pub fn hessenberg_in_place(h: &mut CMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let norm: f64 = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // Left: rows k+1..n, H <- (I - 2 v v^H) H
        for j in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)])
                .sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vt * dot * 2.0;
            }
        }
        // Right: columns k+1..n, H <- H (I - 2 v v^H)
        for i in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| h[(i, k + 1 + t)] * vt)
                .sum();
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * vt.conj() * 2.0;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

/// Cyclic complex Jacobi rotations; only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen, NumError> {
    if !a.is_square() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = (a + &a.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = D R with D = diag(1, conj(phase)).
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let x = m[(k, p)];
                    let y = m[(k, q)];
                    m[(k, p)] = x * jpp + y * jqp;
                    m[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let x = m[(p, k)];
                    let y = m[(q, k)];
                    m[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    m[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * jpp + y * jqp;
                    v[(k, q)] = x * jpq + y * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(NumError::NoConvergence { iterations: 100 });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}
