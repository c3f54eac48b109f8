//! Structured dense linear algebra used by the solver and sampler:
//! Cholesky and QR factorizations with rank-one updates, triangular solves,
//! and extreme / top-k eigenvalue computation.
//!
//! All matrices are dense `f64`. Operations are pure functions of their
//! inputs; factors are immutable values.

mod cholesky;
mod eigen;
mod qr;

pub use cholesky::{
    cholesky_factor, cholesky_psd, cholesky_rank_one, cholesky_rank_one_inplace, triangular_solve,
    LowerTriangularFactor, UpdateSign,
};
pub(crate) use cholesky::forward_substitute;
pub use eigen::{
    jacobi_eigen, lanczos_extreme, lanczos_top_k, materialize, min_eigenvalue,
    min_eigenvalue_with, top_k_eigen, top_k_eigen_with, Extreme, DENSE_EIGEN_THRESHOLD,
};
pub use qr::{qr_decompose, qr_rank_one, solve_upper, QRFactors};

use ndarray::{Array1, ArrayView1, ArrayView2};
use thiserror::Error;

/// Errors from the linear-algebra kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} non-positive during Cholesky)")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is not positive semidefinite (pivot {pivot} = {value:e})")]
    NotPositiveSemidefinite { pivot: usize, value: f64 },

    #[error("Cholesky downdate failure at pivot {pivot}: result would lose positive definiteness")]
    DowndateFailure { pivot: usize },

    #[error("singular update: |R[{index},{index}]| fell below {tol:e} after QR rank-one update")]
    SingularUpdate { index: usize, tol: f64 },

    #[error(
        "eigensolver not converged after {iterations} iterations \
         (residual {residual:e} > tolerance {tolerance:e})"
    )]
    EigenNotConverged {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A symmetric matrix exposed through matrix-vector products.
///
/// Lets the eigensolvers and SDP feasibility checks run on dense matrices,
/// factor models, and shifted combinations without materializing anything.
pub trait SymmetricOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64>;
}

/// Dense symmetric matrix as an operator.
pub struct DenseOp<'a>(pub ArrayView2<'a, f64>);

impl SymmetricOp for DenseOp<'_> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64> {
        self.0.dot(&v)
    }
}

/// `alpha·A − diag(t)` for a base operator `A`.
///
/// The knockoff constraint matrix `2Σ − diag(s)` is the main instance.
pub struct ShiftedOp<'a> {
    base: &'a dyn SymmetricOp,
    alpha: f64,
    diag: Array1<f64>,
}

impl<'a> ShiftedOp<'a> {
    pub fn new(base: &'a dyn SymmetricOp, alpha: f64, diag: Array1<f64>) -> Self {
        assert_eq!(base.dim(), diag.len(), "diagonal shift length mismatch");
        Self { base, alpha, diag }
    }

    /// The constraint operator `2Σ − diag(s)`.
    pub fn knockoff_constraint(sigma: &'a dyn SymmetricOp, s: ArrayView1<f64>) -> Self {
        Self::new(sigma, 2.0, s.to_owned())
    }
}

impl SymmetricOp for ShiftedOp<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let mut out = self.base.apply(v);
        out *= self.alpha;
        out -= &(&self.diag * &v);
        out
    }
}

pub(crate) fn check_square(a: &ArrayView2<f64>, what: &str) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Frobenius norm of a dense matrix.
pub fn frobenius_norm(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative Frobenius distance `‖a − b‖_F / max(1, ‖b‖_F)`.
pub fn rel_frobenius_distance(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let mut num = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        num += d * d;
    }
    num.sqrt() / frobenius_norm(b).max(1.0)
}
