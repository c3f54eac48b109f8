//! Covariance models: empirical correlation, Ledoit-Wolf shrinkage, and
//! diagonal-plus-low-rank factor models `Σ = diag(d) + UUᵀ` fitted by
//! alternating minimization of `‖Σ̂ − D − UUᵀ‖_F²`.
//!
//! Data is held features-by-samples (`p×n`). Estimation always runs on
//! standardized features, so the estimated matrix is a correlation matrix —
//! the scale the knockoff SDP expects. When `p` is large the fit never
//! materializes `Σ̂`: eigenpairs come from Gram matvecs `v ↦ (1/n)X̃(X̃ᵀv)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use thiserror::Error;

use crate::linalg::{self, LinalgError, SymmetricOp};

#[derive(Debug, Error)]
pub enum CovarianceError {
    #[error("degenerate feature {index}: zero sample variance")]
    DegenerateFeature { index: usize },

    #[error("need at least 2 samples, got {n}")]
    TooFewSamples { n: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },

    #[error("invalid rank k={k} for p={p} features (need 1 ≤ k ≤ p)")]
    InvalidRank { k: usize, p: usize },

    #[error("factor model requires d ≥ 0, got d[{index}] = {value}")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error(transparent)]
    Eigen(#[from] LinalgError),
}

/// A `p×n` data matrix (rows = features, columns = samples), standardized to
/// zero feature means and unit feature variances with the `1/n` convention,
/// so `(1/n)·X̃X̃ᵀ` is the empirical correlation matrix.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    standardized: Array2<f64>,
    means: Array1<f64>,
    scales: Array1<f64>,
}

impl DataMatrix {
    /// Standardize raw data. Fails on fewer than two samples, non-finite
    /// entries, or a feature with zero variance.
    pub fn standardize(raw: ArrayView2<f64>) -> Result<Self, CovarianceError> {
        let (p, n) = raw.dim();
        if n < 2 {
            return Err(CovarianceError::TooFewSamples { n });
        }
        for ((row, col), v) in raw.indexed_iter() {
            if !v.is_finite() {
                return Err(CovarianceError::NonFiniteData { row, col });
            }
        }
        let means = raw.mean_axis(Axis(1)).expect("n >= 2");
        let mut standardized = raw.to_owned();
        for (mut row, &m) in standardized.rows_mut().into_iter().zip(means.iter()) {
            row -= m;
        }
        let nf = n as f64;
        let mut scales = Array1::<f64>::zeros(p);
        for (i, row) in standardized.rows().into_iter().enumerate() {
            let var = row.dot(&row) / nf;
            if var <= 1e-24 {
                return Err(CovarianceError::DegenerateFeature { index: i });
            }
            scales[i] = var.sqrt();
        }
        for (mut row, &s) in standardized.rows_mut().into_iter().zip(scales.iter()) {
            row /= s;
        }
        Ok(Self {
            standardized,
            means,
            scales,
        })
    }

    pub fn p(&self) -> usize {
        self.standardized.nrows()
    }

    pub fn n(&self) -> usize {
        self.standardized.ncols()
    }

    pub fn standardized(&self) -> &Array2<f64> {
        &self.standardized
    }

    pub fn means(&self) -> &Array1<f64> {
        &self.means
    }

    pub fn scales(&self) -> &Array1<f64> {
        &self.scales
    }

    /// `tr(Σ̂) = ‖X̃‖_F²/n` (exactly `p` for standardized data, up to rounding).
    fn trace_cov(&self) -> f64 {
        self.standardized.iter().map(|x| x * x).sum::<f64>() / self.n() as f64
    }

    /// `tr(Σ̂²) = ‖X̃ᵀX̃‖_F²/n²`, via whichever Gram matrix is smaller.
    fn trace_cov_sq(&self) -> f64 {
        let (p, n) = (self.p(), self.n());
        let x = &self.standardized;
        let gram = if p <= n { x.dot(&x.t()) } else { x.t().dot(x) };
        let nf = n as f64;
        gram.iter().map(|g| g * g).sum::<f64>() / (nf * nf)
    }
}

/// Empirical correlation matrix `(1/n)·X̃X̃ᵀ` with exact symmetry and unit
/// diagonal.
pub fn empirical_correlation(x: &DataMatrix) -> Array2<f64> {
    let n = x.n() as f64;
    let mut s = x.standardized.dot(&x.standardized.t());
    s /= n;
    let p = x.p();
    for i in 0..p {
        s[[i, i]] = 1.0;
        for j in 0..i {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}

/// Ledoit-Wolf shrinkage toward `μI`: `Σ̃ = (1−δ)Σ̂ + δμI`.
#[derive(Debug, Clone, Copy)]
pub struct ShrinkageEstimate {
    /// Optimal shrinkage intensity, clamped to `[0, 1]`.
    pub delta: f64,
    /// Average variance `tr(Σ̂)/p` (1 for standardized data).
    pub mu: f64,
    /// Set when `Σ̂` is already a multiple of the identity and the shrinkage
    /// direction is undefined; `delta` is forced to 0.
    pub no_shrinkage_needed: bool,
}

/// Optimal shrinkage intensity, with all traces computed through Gram
/// identities so `Σ̂` is never materialized.
pub fn ledoit_wolf(x: &DataMatrix) -> ShrinkageEstimate {
    let n = x.n() as f64;
    let p = x.p() as f64;
    let trace = x.trace_cov();
    let trace_sq = x.trace_cov_sq();
    let mu = trace / p;

    let denom = trace_sq - trace * trace / p;
    if denom <= 1e-12 {
        return ShrinkageEstimate {
            delta: 0.0,
            mu,
            no_shrinkage_needed: true,
        };
    }

    // (1/n²)·(Σᵢ ‖x̃ᵢ‖⁴ − n·tr(Σ̂²)) over sample columns x̃ᵢ
    let mut fourth = 0.0;
    for col in x.standardized.columns() {
        let sq = col.dot(&col);
        fourth += sq * sq;
    }
    let numer = (fourth - n * trace_sq) / (n * n);

    ShrinkageEstimate {
        delta: (numer / denom).clamp(0.0, 1.0),
        mu,
        no_shrinkage_needed: false,
    }
}

/// Diagonal-plus-low-rank covariance `Σ = diag(d) + UUᵀ`.
#[derive(Debug, Clone)]
pub struct FactorModel {
    d: Array1<f64>,
    u: Array2<f64>,
}

impl FactorModel {
    pub fn new(d: Array1<f64>, u: Array2<f64>) -> Result<Self, CovarianceError> {
        let p = d.len();
        let k = u.ncols();
        if u.nrows() != p || k < 1 || k > p {
            return Err(CovarianceError::InvalidRank { k, p });
        }
        if let Some((index, &value)) = d.indexed_iter().find(|(_, &v)| v < 0.0) {
            return Err(CovarianceError::NegativeDiagonal { index, value });
        }
        Ok(Self { d, u })
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    pub fn d(&self) -> &Array1<f64> {
        &self.d
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    /// Diagonal of the implied matrix: `d_i + ‖U_{i,:}‖²`.
    pub fn implied_diag(&self) -> Array1<f64> {
        let mut out = self.d.clone();
        for (o, row) in out.iter_mut().zip(self.u.rows()) {
            *o += row.dot(&row);
        }
        out
    }

    /// Materialize `diag(d) + UUᵀ`.
    pub fn implied_sigma(&self) -> Array2<f64> {
        let mut s = self.u.dot(&self.u.t());
        for (i, &di) in self.d.iter().enumerate() {
            s[[i, i]] += di;
        }
        s
    }

    /// Rescale to unit implied diagonal: `d_i ← d_i/σ_i²`, `U_i ← U_i/σ_i`.
    pub fn normalize_to_correlation(&self) -> FactorModel {
        let sigma2 = self.implied_diag();
        let mut d = self.d.clone();
        let mut u = self.u.clone();
        for i in 0..self.p() {
            let s2 = sigma2[i];
            d[i] /= s2;
            let inv = 1.0 / s2.sqrt();
            u.row_mut(i).mapv_inplace(|v| v * inv);
        }
        FactorModel { d, u }
    }

    /// Largest deviation of `diag(Σ)` from 1.
    pub fn unit_diagonal_error(&self) -> f64 {
        self.implied_diag()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl SymmetricOp for FactorModel {
    fn dim(&self) -> usize {
        self.p()
    }

    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let mut out = &self.d * &v;
        let t = self.u.t().dot(&v);
        out += &self.u.dot(&t);
        out
    }
}

/// Options for the alternating-minimization fit.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Iteration cap.
    pub max_iters: usize,
    /// Stop when the relative objective decrease falls below this.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 50,
            rel_tol: 1e-8,
        }
    }
}

/// A fitted factor model plus the objective trace `‖Σ̂ − D − UUᵀ‖_F²`
/// recorded after every iteration.
#[derive(Debug, Clone)]
pub struct FactorFit {
    pub model: FactorModel,
    pub objectives: Vec<f64>,
    pub converged: bool,
    pub shrinkage: Option<ShrinkageEstimate>,
}

impl FactorFit {
    /// Frobenius-norm residual `‖Σ̂ − D − UUᵀ‖_F` at the final iterate.
    pub fn residual(&self) -> f64 {
        self.objectives
            .last()
            .map(|o| o.max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    }
}

/// Fit `Σ̂ ≈ diag(d) + UUᵀ` from a dense symmetric matrix.
pub fn fit_factor_model(
    sigma: ArrayView2<f64>,
    k: usize,
    opts: FitOptions,
) -> Result<FactorFit, CovarianceError> {
    let source = FitSource::Dense { sigma };
    fit_core(&source, k, opts)
}

/// Fit the factor model of the empirical correlation matrix without forming
/// it: eigenpairs come from matvecs `v ↦ (1/n)X̃(X̃ᵀv) − Dv`.
pub fn fit_factor_model_from_data(
    x: &DataMatrix,
    k: usize,
    opts: FitOptions,
) -> Result<FactorFit, CovarianceError> {
    let source = FitSource::Gram {
        x,
        delta: 0.0,
        mu: 1.0,
    };
    fit_core(&source, k, opts)
}

/// Ledoit-Wolf shrinkage followed by a factor-model fit of the shrunk matrix
/// `(1−δ)Σ̂ + δμI`, operator style: the shift only adds `δμ` to matvec
/// diagonals.
pub fn shrunk_factor_model(
    x: &DataMatrix,
    k: usize,
    opts: FitOptions,
) -> Result<FactorFit, CovarianceError> {
    let shrink = ledoit_wolf(x);
    let source = FitSource::Gram {
        x,
        delta: shrink.delta,
        mu: shrink.mu,
    };
    let mut fit = fit_core(&source, k, opts)?;
    fit.shrinkage = Some(shrink);
    Ok(fit)
}

enum FitSource<'a> {
    Dense {
        sigma: ArrayView2<'a, f64>,
    },
    /// `(1−δ)·(1/n)X̃X̃ᵀ + δμI`
    Gram {
        x: &'a DataMatrix,
        delta: f64,
        mu: f64,
    },
}

impl FitSource<'_> {
    fn dim(&self) -> usize {
        match self {
            FitSource::Dense { sigma } => sigma.nrows(),
            FitSource::Gram { x, .. } => x.p(),
        }
    }

    fn diag(&self) -> Array1<f64> {
        match self {
            FitSource::Dense { sigma } => sigma.diag().to_owned(),
            FitSource::Gram { x, delta, mu } => {
                let n = x.n() as f64;
                let mut d = Array1::zeros(x.p());
                for (i, row) in x.standardized.rows().into_iter().enumerate() {
                    d[i] = (1.0 - delta) * row.dot(&row) / n + delta * mu;
                }
                d
            }
        }
    }

    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64> {
        match self {
            FitSource::Dense { sigma } => sigma.dot(&v),
            FitSource::Gram { x, delta, mu } => {
                let n = x.n() as f64;
                let t = x.standardized.t().dot(&v);
                let mut out = x.standardized.dot(&t);
                out *= (1.0 - delta) / n;
                out.scaled_add(delta * mu, &v.to_owned());
                out
            }
        }
    }

    /// `‖Σ̂ − diag(d) − UUᵀ‖_F²`. The dense path computes it entrywise (no
    /// cancellation growth); the Gram path expands the square using exact
    /// trace identities.
    fn objective(&self, d: &Array1<f64>, u: &Array2<f64>) -> f64 {
        match self {
            FitSource::Dense { sigma } => {
                let p = sigma.nrows();
                let uut = u.dot(&u.t());
                let mut acc = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        let mut r = sigma[[i, j]] - uut[[i, j]];
                        if i == j {
                            r -= d[i];
                        }
                        acc += r * r;
                    }
                }
                acc
            }
            FitSource::Gram { x, delta, mu } => {
                let diag = self.diag();
                // ‖Σ̃‖²: expand (1−δ)²tr Σ̂² + 2δμ(1−δ)tr Σ̂ + δ²μ²p
                let tr = x.trace_cov();
                let tr2 = x.trace_cov_sq();
                let p = x.p() as f64;
                let norm_sigma2 =
                    (1.0 - delta).powi(2) * tr2 + 2.0 * delta * mu * (1.0 - delta) * tr
                        + delta * delta * mu * mu * p;

                let cross_d: f64 = d.iter().zip(diag.iter()).map(|(a, b)| a * b).sum();
                let mut cross_u = 0.0;
                for col in u.columns() {
                    cross_u += col.dot(&self.apply(col));
                }
                let d2: f64 = d.iter().map(|v| v * v).sum();
                let mut du = 0.0;
                for (i, row) in u.rows().into_iter().enumerate() {
                    du += d[i] * row.dot(&row);
                }
                let utu = u.t().dot(u);
                let norm_uut2: f64 = utu.iter().map(|v| v * v).sum();

                norm_sigma2 - 2.0 * (cross_d + cross_u) + d2 + 2.0 * du + norm_uut2
            }
        }
    }
}

/// `Σ̂ − diag(d)` as an operator for the eigensolver.
struct ResidualOp<'s, 'd, 'x> {
    source: &'s FitSource<'x>,
    d: &'d Array1<f64>,
}

impl SymmetricOp for ResidualOp<'_, '_, '_> {
    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn apply(&self, v: ArrayView1<f64>) -> Array1<f64> {
        let mut out = self.source.apply(v);
        out -= &(self.d * &v);
        out
    }
}

/// One alternating-minimization pass: the exact D-step
/// `d_i = max(0, Σ̂_ii − ‖U_{i,:}‖²)` for the current `U`, then the exact
/// U-step (top-k eigenpairs of `Σ̂ − D`, negative eigenvalues clipped).
/// Both half-steps are exact block minimizers, so the objective never
/// increases.
fn fit_iteration(
    source: &FitSource,
    diag: &Array1<f64>,
    d: &mut Array1<f64>,
    u: &mut Array2<f64>,
) -> Result<f64, CovarianceError> {
    let p = source.dim();
    let k = u.ncols();
    for i in 0..p {
        let row = u.row(i);
        d[i] = (diag[i] - row.dot(&row)).max(0.0);
    }
    let op = ResidualOp { source, d };
    let (vecs, vals) = linalg::top_k_eigen_with(&op, k, 1e-9, p.min(600))?;
    *u = vecs;
    for (j, mut col) in u.columns_mut().into_iter().enumerate() {
        let s = vals[j].max(0.0).sqrt();
        col.mapv_inplace(|v| v * s);
    }
    Ok(source.objective(d, u))
}

/// Alternating minimization with two warm starts.
///
/// Candidate A starts from `U = 0`, so its first pass sets `D = diag(Σ̂)`
/// and fits the hollow residual — uncorrelated inputs come out with `U = 0`
/// exactly. Candidate B starts from the best rank-k approximation of `Σ̂`,
/// which makes `k = p` exact in a single pass. One iteration of each is run
/// and the better start wins (ties go to A); the loop continues from there.
fn fit_core(source: &FitSource, k: usize, opts: FitOptions) -> Result<FactorFit, CovarianceError> {
    let p = source.dim();
    if k < 1 || k > p {
        return Err(CovarianceError::InvalidRank { k, p });
    }
    let diag = source.diag();

    let mut d_a = Array1::<f64>::zeros(p);
    let mut u_a = Array2::<f64>::zeros((p, k));
    let obj_a = fit_iteration(source, &diag, &mut d_a, &mut u_a)?;

    let zero_d = Array1::<f64>::zeros(p);
    let op = ResidualOp {
        source,
        d: &zero_d,
    };
    let (vecs, vals) = linalg::top_k_eigen_with(&op, k, 1e-9, p.min(600))?;
    let mut u_b = vecs;
    for (j, mut col) in u_b.columns_mut().into_iter().enumerate() {
        let s = vals[j].max(0.0).sqrt();
        col.mapv_inplace(|v| v * s);
    }
    let mut d_b = Array1::<f64>::zeros(p);
    let obj_b = fit_iteration(source, &diag, &mut d_b, &mut u_b)?;

    let (mut d, mut u, first_obj) = if obj_b < obj_a {
        (d_b, u_b, obj_b)
    } else {
        (d_a, u_a, obj_a)
    };

    let mut objectives = Vec::with_capacity(opts.max_iters);
    objectives.push(first_obj);
    let mut converged = first_obj <= 1e-300;

    for iter in 1..opts.max_iters.max(1) {
        if converged {
            break;
        }
        let obj = fit_iteration(source, &diag, &mut d, &mut u)?;
        objectives.push(obj);
        let prev = objectives[iter - 1];
        if prev - obj <= opts.rel_tol * prev.max(1e-300) || obj <= 1e-300 {
            converged = true;
            break;
        }
    }

    let model = FactorModel::new(d, u).expect("fit produces a valid model");
    Ok(FactorFit {
        model,
        objectives,
        converged,
        shrinkage: None,
    })
}
