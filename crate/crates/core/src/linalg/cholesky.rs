//! Cholesky factorization with stable rank-one updates and downdates.
//!
//! The updates use the hyperbolic-rotation scheme (the classic `chud`/`chdd`
//! pair): given `L` with `LLᵀ = A`, they produce `L′` with
//! `L′L′ᵀ = A ± vvᵀ` in `O(p²)` without ever forming `A`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{check_square, LinalgError};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Invariant: strictly positive diagonal, so triangular solves never divide
/// by zero.
#[derive(Debug, Clone)]
pub struct LowerTriangularFactor {
    l: Array2<f64>,
}

impl LowerTriangularFactor {
    /// Wrap an already lower-triangular matrix. Debug builds verify the
    /// diagonal is positive.
    pub(crate) fn from_lower(l: Array2<f64>) -> Self {
        debug_assert!(l.diag().iter().all(|&d| d > 0.0), "non-positive pivot");
        Self { l }
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.l
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.l
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.l.dot(&self.l.t())
    }

    /// `log det(LLᵀ) = 2 Σᵢ log Lᵢᵢ`.
    pub fn logdet(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solve `Lᵀ x = y` by backward substitution.
    pub fn solve_transpose(&self, y: ArrayView1<f64>) -> Array1<f64> {
        let p = self.dim();
        let mut x = y.to_owned();
        for i in (0..p).rev() {
            let mut sum = x[i];
            for j in i + 1..p {
                sum -= self.l[[j, i]] * x[j];
            }
            x[i] = sum / self.l[[i, i]];
        }
        x
    }

    /// Solve `L Lᵀ x = y`.
    pub fn solve_spd(&self, y: ArrayView1<f64>) -> Array1<f64> {
        let z = triangular_solve(self, y);
        self.solve_transpose(z.view())
    }
}

/// Factor a symmetric positive definite matrix as `LLᵀ`.
pub fn cholesky_factor(a: ArrayView2<f64>) -> Result<LowerTriangularFactor, LinalgError> {
    check_square(&a, "Cholesky input")?;
    let p = a.nrows();
    let mut l = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let mut pivot = a[[j, j]];
        for m in 0..j {
            pivot -= l[[j, m]] * l[[j, m]];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let djj = pivot.sqrt();
        l[[j, j]] = djj;
        for i in j + 1..p {
            let mut sum = a[[i, j]];
            for m in 0..j {
                sum -= l[[i, m]] * l[[j, m]];
            }
            l[[i, j]] = sum / djj;
        }
    }
    Ok(LowerTriangularFactor { l })
}

/// Pivot-tolerant Cholesky for positive *semi*definite matrices.
///
/// Pivots below `zero_tol` (relative to the largest diagonal entry) emit a
/// zero column, so singular inputs like an all-zero matrix factor cleanly.
/// Pivots below `−neg_tol` report the matrix as not PSD. The returned factor
/// may have zeros on its diagonal, hence the plain matrix return type.
pub fn cholesky_psd(
    a: ArrayView2<f64>,
    zero_tol: f64,
    neg_tol: f64,
) -> Result<Array2<f64>, LinalgError> {
    check_square(&a, "Cholesky input")?;
    let p = a.nrows();
    let scale = a.diag().iter().cloned().fold(0.0_f64, f64::max).max(1.0);
    let mut l = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let mut pivot = a[[j, j]];
        for m in 0..j {
            pivot -= l[[j, m]] * l[[j, m]];
        }
        if pivot < -neg_tol * scale {
            return Err(LinalgError::NotPositiveSemidefinite {
                pivot: j,
                value: pivot,
            });
        }
        if pivot <= zero_tol * scale {
            continue; // column stays zero
        }
        let djj = pivot.sqrt();
        l[[j, j]] = djj;
        for i in j + 1..p {
            let mut sum = a[[i, j]];
            for m in 0..j {
                sum -= l[[i, m]] * l[[j, m]];
            }
            l[[i, j]] = sum / djj;
        }
    }
    Ok(l)
}

/// Solve `L x = y` by forward substitution in `O(p²)`.
pub fn triangular_solve(l: &LowerTriangularFactor, y: ArrayView1<f64>) -> Array1<f64> {
    forward_substitute(l.l.view(), y)
}

/// Forward substitution on a raw lower-triangular view.
pub(crate) fn forward_substitute(l: ArrayView2<f64>, y: ArrayView1<f64>) -> Array1<f64> {
    assert_eq!(l.nrows(), y.len(), "triangular solve dimension mismatch");
    let p = l.nrows();
    let mut x = Array1::<f64>::zeros(p);
    for i in 0..p {
        let row = l.row(i);
        let mut sum = y[i];
        for j in 0..i {
            sum -= row[j] * x[j];
        }
        x[i] = sum / row[i];
    }
    x
}

/// Direction of a rank-one Cholesky modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSign {
    /// `L′L′ᵀ = LLᵀ + vvᵀ`
    Update,
    /// `L′L′ᵀ = LLᵀ − vvᵀ`
    Downdate,
}

/// Rank-one update or downdate of a Cholesky factor, `O(p²)`.
pub fn cholesky_rank_one(
    l: &LowerTriangularFactor,
    v: ArrayView1<f64>,
    sign: UpdateSign,
) -> Result<LowerTriangularFactor, LinalgError> {
    let mut out = l.l.clone();
    let mut w = v.to_owned();
    cholesky_rank_one_inplace(&mut out, &mut w, sign)?;
    Ok(LowerTriangularFactor { l: out })
}

/// In-place rank-one modification; `w` is consumed as workspace.
///
/// On a downdate failure `l` is left partially modified — callers that need
/// rollback should retain a copy (the SDP solver updates with sparse vectors
/// and snapshots nothing; it retries from the failing state instead).
pub fn cholesky_rank_one_inplace(
    l: &mut Array2<f64>,
    w: &mut Array1<f64>,
    sign: UpdateSign,
) -> Result<(), LinalgError> {
    let p = l.nrows();
    assert_eq!(w.len(), p, "update vector length mismatch");
    // Sparse heads are common (the SDP updates with multiples of eⱼ):
    // rotations before the first nonzero are the identity.
    let start = w.iter().position(|&x| x != 0.0);
    let Some(start) = start else { return Ok(()) };
    match sign {
        UpdateSign::Update => {
            for k in start..p {
                let d = l[[k, k]];
                let wk = w[k];
                if wk == 0.0 {
                    continue;
                }
                let r = d.hypot(wk);
                let c = r / d;
                let s = wk / d;
                l[[k, k]] = r;
                for i in k + 1..p {
                    let lik = (l[[i, k]] + s * w[i]) / c;
                    w[i] = c * w[i] - s * lik;
                    l[[i, k]] = lik;
                }
            }
        }
        UpdateSign::Downdate => {
            for k in start..p {
                let d = l[[k, k]];
                let wk = w[k];
                if wk == 0.0 {
                    continue;
                }
                let r2 = (d - wk) * (d + wk);
                if r2 <= 0.0 || !r2.is_finite() {
                    return Err(LinalgError::DowndateFailure { pivot: k });
                }
                let r = r2.sqrt();
                let c = r / d;
                let s = wk / d;
                l[[k, k]] = r;
                for i in k + 1..p {
                    let lik = (l[[i, k]] - s * w[i]) / c;
                    w[i] = c * w[i] - s * lik;
                    l[[i, k]] = lik;
                }
            }
        }
    }
    Ok(())
}
