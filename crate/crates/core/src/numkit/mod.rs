//! Dense complex linear algebra sized for drift matrices and their Kronecker lifts.

mod eigen;
mod lu;
mod matrix;
mod ode;

pub use eigen::{eigenvalues, hermitian_eigen, hessenberg_in_place, EigenResult, HermitianEigen};
pub use lu::{determinant, solve_linear, Lu, PIVOT_RTOL};
pub use matrix::CMatrix;
pub use ode::{default_dt, integrate_linear_ode, lyapunov_flow_rhs};

use thiserror::Error;

/// Largest dimension (rows or cols) a Kronecker product may produce by default.
pub const KRON_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix has zero rows or columns")]
    EmptyMatrix,
    #[error("matrix entry is NaN or infinite")]
    NonFinite,
    #[error("rows have differing lengths")]
    RaggedRows,
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("product dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("integration blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Kronecker product `a ⊗ b` with the default dimension cap.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, NumError> {
    kron_with_cap(a, b, KRON_CAP)
}

pub fn kron_with_cap(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix, NumError> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let dim = rows.max(cols);
    if dim > cap {
        return Err(NumError::DimensionOverflow { dim, cap });
    }
    let (br, bc) = b.dim();
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    }))
}
