//! Square QR factorization with Givens-based rank-one updates.
//!
//! The factor-model SDP solver keeps `QR = I_k + 2M` and modifies it twice
//! per coordinate with `QR + c·zzᵀ`, each in `O(k²)`. `M` is symmetric but
//! indefinite in general, which is why QR is maintained instead of Cholesky.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{check_square, LinalgError};

/// Diagonal magnitude below which the updated `R` is declared singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// QR factors of a square matrix: `Q` orthogonal, `R` upper triangular.
#[derive(Debug, Clone)]
pub struct QRFactors {
    q: Array2<f64>,
    r: Array2<f64>,
}

impl QRFactors {
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn r(&self) -> &Array2<f64> {
        &self.r
    }

    /// `Q·R`.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.q.dot(&self.r)
    }

    /// `(QR)·z` without forming the product matrix.
    pub fn apply(&self, z: ArrayView1<f64>) -> Array1<f64> {
        self.q.dot(&self.r.dot(&z))
    }

    /// `Qᵀ·y`.
    pub fn q_transpose_apply(&self, y: ArrayView1<f64>) -> Array1<f64> {
        self.q.t().dot(&y)
    }

    /// Solve `R x = y` by backward substitution.
    pub fn solve_r(&self, y: ArrayView1<f64>) -> Array1<f64> {
        solve_upper(self.r.view(), y)
    }
}

/// Householder QR of a square matrix.
pub fn qr_decompose(a: ArrayView2<f64>) -> Result<QRFactors, LinalgError> {
    check_square(&a, "QR input")?;
    let k = a.nrows();
    let mut r = a.to_owned();
    let mut q = Array2::<f64>::eye(k);
    let mut v = Array1::<f64>::zeros(k);
    for j in 0..k.saturating_sub(1) {
        let mut norm2 = 0.0;
        for i in j..k {
            norm2 += r[[i, j]] * r[[i, j]];
        }
        let norm = norm2.sqrt();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        let alpha = if r[[j, j]] >= 0.0 { -norm } else { norm };
        v.fill(0.0);
        v[j] = r[[j, j]] - alpha;
        for i in j + 1..k {
            v[i] = r[[i, j]];
        }
        let vtv = v.slice(ndarray::s![j..]).mapv(|x| x * x).sum();
        if vtv <= f64::MIN_POSITIVE {
            continue;
        }
        // r ← (I − 2vvᵀ/vᵀv) r, q ← q (I − 2vvᵀ/vᵀv)
        for col in j..k {
            let mut dot = 0.0;
            for i in j..k {
                dot += v[i] * r[[i, col]];
            }
            let f = 2.0 * dot / vtv;
            for i in j..k {
                r[[i, col]] -= f * v[i];
            }
        }
        for row in 0..k {
            let mut dot = 0.0;
            for i in j..k {
                dot += q[[row, i]] * v[i];
            }
            let f = 2.0 * dot / vtv;
            for i in j..k {
                q[[row, i]] -= f * v[i];
            }
        }
        for i in j + 1..k {
            r[[i, j]] = 0.0;
        }
    }
    Ok(QRFactors { q, r })
}

/// Rank-one update `Q′R′ = QR + c·zzᵀ` via Givens rotations, `O(k²)`.
pub fn qr_rank_one(
    f: &QRFactors,
    c: f64,
    z: ArrayView1<f64>,
) -> Result<QRFactors, LinalgError> {
    let mut out = f.clone();
    qr_rank_one_inplace(&mut out, c, z)?;
    Ok(out)
}

pub(crate) fn qr_rank_one_inplace(
    f: &mut QRFactors,
    c: f64,
    z: ArrayView1<f64>,
) -> Result<(), LinalgError> {
    let k = f.dim();
    assert_eq!(z.len(), k, "update vector length mismatch");
    if k == 0 {
        return Ok(());
    }
    // QR + (cz)zᵀ = Q(R + wzᵀ) with w = c·Qᵀz.
    let mut w = f.q.t().dot(&z);
    w *= c;

    // Rotate w to ‖w‖·e₁ from the bottom up; R turns upper Hessenberg.
    for i in (1..k).rev() {
        if w[i] == 0.0 {
            continue;
        }
        let (cg, sg, r) = givens(w[i - 1], w[i]);
        w[i - 1] = r;
        w[i] = 0.0;
        rotate_rows(&mut f.r, i - 1, i, cg, sg, i - 1);
        rotate_cols(&mut f.q, i - 1, i, cg, sg);
    }

    // Hessenberg R plus the rank-one row correction.
    for col in 0..k {
        f.r[[0, col]] += w[0] * z[col];
    }

    // Re-triangularize, chasing the subdiagonal down.
    for i in 0..k - 1 {
        if f.r[[i + 1, i]] == 0.0 {
            continue;
        }
        let (cg, sg, r) = givens(f.r[[i, i]], f.r[[i + 1, i]]);
        f.r[[i, i]] = r;
        f.r[[i + 1, i]] = 0.0;
        rotate_rows(&mut f.r, i, i + 1, cg, sg, i + 1);
        rotate_cols(&mut f.q, i, i + 1, cg, sg);
    }

    for i in 0..k {
        if f.r[[i, i]].abs() < SINGULAR_TOL {
            return Err(LinalgError::SingularUpdate {
                index: i,
                tol: SINGULAR_TOL,
            });
        }
    }
    Ok(())
}

/// Backward substitution for an upper triangular system `U x = y`.
pub fn solve_upper(u: ArrayView2<f64>, y: ArrayView1<f64>) -> Array1<f64> {
    let k = u.nrows();
    assert_eq!(y.len(), k, "upper solve dimension mismatch");
    let mut x = y.to_owned();
    for i in (0..k).rev() {
        let mut sum = x[i];
        for j in i + 1..k {
            sum -= u[[i, j]] * x[j];
        }
        debug_assert!(u[[i, i]] != 0.0, "singular upper triangular solve");
        x[i] = sum / u[[i, i]];
    }
    x
}

/// Rotation (c, s) with `[c s; −s c]·[a; b] = [r; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    let r = a.hypot(b);
    if r <= f64::MIN_POSITIVE {
        (1.0, 0.0, 0.0)
    } else {
        (a / r, b / r, r)
    }
}

/// Rows `i`, `j` of `m` ← G·rows, touching columns `from..`.
fn rotate_rows(m: &mut Array2<f64>, i: usize, j: usize, c: f64, s: f64, from: usize) {
    let k = m.ncols();
    for col in from..k {
        let a = m[[i, col]];
        let b = m[[j, col]];
        m[[i, col]] = c * a + s * b;
        m[[j, col]] = -s * a + c * b;
    }
}

/// Columns `i`, `j` of `m` ← cols·Gᵀ.
fn rotate_cols(m: &mut Array2<f64>, i: usize, j: usize, c: f64, s: f64) {
    let k = m.nrows();
    for row in 0..k {
        let a = m[[row, i]];
        let b = m[[row, j]];
        m[[row, i]] = c * a + s * b;
        m[[row, j]] = -s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    use crate::linalg::rel_frobenius_distance;
    use crate::rng::{stream, Domain};

    fn orthogonality_error(q: &Array2<f64>) -> f64 {
        let k = q.nrows();
        let qtq = q.t().dot(q);
        let mut err = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                let d: f64 = qtq[[i, j]] - target;
                err += d * d;
            }
        }
        err.sqrt()
    }

    #[test]
    fn decompose_reconstructs() {
        let mut rng = stream(42, Domain::Test, 200);
        for k in [1usize, 2, 5, 12] {
            let a = Array2::from_shape_fn((k, k), |_| rng.random::<f64>() - 0.5);
            let f = qr_decompose(a.view()).unwrap();
            assert!(orthogonality_error(f.q()) <= 1e-12);
            assert!(rel_frobenius_distance(f.reconstruct().view(), a.view()) <= 1e-12);
            for i in 1..k {
                for j in 0..i {
                    assert_eq!(f.r()[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn rank_one_identity_update() {
        let f = qr_decompose(Array2::eye(2).view()).unwrap();
        let up = qr_rank_one(&f, 1.0, array![1.0, 0.0].view()).unwrap();
        let expected = array![[2.0, 0.0], [0.0, 1.0]];
        assert!(rel_frobenius_distance(up.reconstruct().view(), expected.view()) <= 1e-12);
        assert!(orthogonality_error(up.q()) <= 1e-10);
    }

    #[test]
    fn update_then_inverse_update_restores_product() {
        let mut rng = stream(42, Domain::Test, 201);
        let k = 8;
        let a = Array2::from_shape_fn((k, k), |_| rng.random::<f64>() - 0.5)
            + Array2::<f64>::eye(k) * 2.0;
        let f = qr_decompose(a.view()).unwrap();
        let z = Array1::from_shape_fn(k, |_| rng.random::<f64>() - 0.5);
        let c = 0.7;
        let up = qr_rank_one(&f, c, z.view()).unwrap();
        let back = qr_rank_one(&up, -c, z.view()).unwrap();
        assert!(
            rel_frobenius_distance(back.reconstruct().view(), a.view()) <= 1e-8,
            "product drift after inverse pair"
        );
    }

    #[test]
    fn update_matches_dense_sum() {
        let mut rng = stream(42, Domain::Test, 202);
        for trial in 0..8 {
            let k = 2 + (trial % 5);
            let a = Array2::from_shape_fn((k, k), |_| rng.random::<f64>() - 0.5)
                + Array2::<f64>::eye(k);
            let z = Array1::from_shape_fn(k, |_| rng.random::<f64>() - 0.5);
            let c = rng.random::<f64>() * 4.0 - 2.0;
            let f = qr_decompose(a.view()).unwrap();
            let up = qr_rank_one(&f, c, z.view()).unwrap();
            let mut expected = a.clone();
            for i in 0..k {
                for j in 0..k {
                    expected[[i, j]] += c * z[i] * z[j];
                }
            }
            assert!(
                rel_frobenius_distance(up.reconstruct().view(), expected.view()) <= 1e-8,
                "trial {trial}"
            );
            assert!(orthogonality_error(up.q()) <= 1e-8);
        }
    }

    #[test]
    fn singular_update_is_detected() {
        let f = qr_decompose(Array2::eye(2).view()).unwrap();
        // I − e₁e₁ᵀ has a zero pivot
        let err = qr_rank_one(&f, -1.0, array![1.0, 0.0].view()).unwrap_err();
        assert!(matches!(err, LinalgError::SingularUpdate { .. }));
    }

    #[test]
    fn solve_upper_recovers() {
        let u = array![[2.0, 1.0], [0.0, 4.0]];
        let x = solve_upper(u.view(), array![4.0, 8.0].view());
        assert_eq!(x, array![1.0, 2.0]);
    }
}
