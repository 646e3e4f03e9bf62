use num_complex::Complex64 as C64;

use super::{CMatrix, NumError};

/// Relative pivot floor: a pivot below `PIVOT_RTOL * ‖a‖_∞` marks the matrix singular.
pub const PIVOT_RTOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P·a = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    // L (unit diagonal, strictly lower) and U packed together.
    lu: Vec<C64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self, NumError> {
        if !a.is_square() {
            return Err(NumError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let threshold = PIVOT_RTOL * a.norm_inf();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == 0.0 {
                return Err(NumError::SingularMatrix {
                    pivot: pmag,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu[k * n + j];
                    lu[i * n + j] -= factor * ukj;
                }
            }
        }
        Ok(Self { n, lu, perm, swaps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `a·x = b` column by column.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix, NumError> {
        let n = self.n;
        if b.rows() != n {
            return Err(NumError::DimensionMismatch {
                expected: (n, b.cols()),
                found: b.dim(),
            });
        }
        let mut x = CMatrix::zeros(n, b.cols());
        let mut col = vec![C64::new(0.0, 0.0); n];
        for c in 0..b.cols() {
            for i in 0..n {
                col[i] = b[(self.perm[i], c)];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                x[(i, c)] = col[i];
            }
        }
        Ok(x)
    }

    fn solve_in_place(&self, y: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
    }

    pub fn determinant(&self) -> C64 {
        let n = self.n;
        let mut det = (0..n).map(|i| self.lu[i * n + i]).product::<C64>();
        if self.swaps % 2 == 1 {
            det = -det;
        }
        det
    }
}

/// Solves `a·x = b` by pivoted LU followed by one step of iterative refinement.
pub fn solve_linear(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, NumError> {
    let lu = Lu::factor(a)?;
    let mut x = lu.solve(b)?;
    let r = b - &a.matmul(&x)?;
    let dx = lu.solve(&r)?;
    x = &x + &dx;
    Ok(x)
}

/// Determinant through pivoted LU; zero when the factorization hits an exact zero pivot.
pub fn determinant(a: &CMatrix) -> Result<C64, NumError> {
    if !a.is_square() {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    // Plain elimination without the relative singularity cutoff.
    let n = a.rows();
    let mut m = a.data().to_vec();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].norm().total_cmp(&m[j * n + k].norm()))
            .unwrap_or(k);
        let pivot = m[p * n + k];
        if pivot.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        det *= pivot;
        for i in (k + 1)..n {
            let f = m[i * n + k] / pivot;
            for j in (k + 1)..n {
                let mkj = m[k * n + j];
                m[i * n + j] -= f * mkj;
            }
        }
    }
    Ok(det)
}
