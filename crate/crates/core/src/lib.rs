//! Gaussian model-X knockoffs at scale.
//!
//! Knockoff variables are synthetic covariates that mimic the joint
//! distribution of the originals while being conditionally independent of the
//! response; comparing how strongly a feature and its knockoff are selected
//! yields finite-sample false discovery rate control. For Gaussian covariates
//! the construction needs three computational pieces, all provided here:
//!
//! * [`covariance`] — correlation estimation, Ledoit-Wolf shrinkage, and
//!   diagonal-plus-low-rank factor models `Σ = D + UUᵀ` fitted by
//!   alternating minimization.
//! * [`sdp`] — the knockoff semidefinite program `max 1ᵀs` subject to
//!   `diag(s) ⪯ 2Σ`, `0 ≤ s ≤ 1`, solved by log-barrier coordinate ascent.
//!   Dense solvers cost `O(p³)` per cycle; the factor-model solver runs in
//!   `O(pk²)` per cycle.
//! * [`sampler`] — sampling `x̃ | x` from the conditional Gaussian. The
//!   factor path streams an `LΔLᵀ` factorization of the conditional
//!   covariance and draws each column in `O(pk²)` time and `O(p + k²)`
//!   memory.
//!
//! [`filter`] computes antisymmetric feature statistics and the knockoff/
//! knockoff+ threshold, [`synth`] generates the synthetic benchmark data, and
//! [`bench`] houses the scaling and FDR/power experiment harness behind the
//! `knockoffs bench` subcommand.

pub mod bench;
pub mod cli;
pub mod covariance;
pub mod filter;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod sdp;
pub mod synth;



