//! Sparse low-rank approximation toolkit.
//!
//! * [`linalg`] and [`oracle`]: exact dense kernels and brute-force ground truth.
//! * [`sketch`]: CountSketch, implicit Gaussian sketches and the measurement ledger.
//! * [`nets`]: constructive ε-nets over spheres and sparse low-rank matrices.
//! * [`krylov`]: spectral-norm LRA for matrices with sparse top singular vectors.
//! * [`streaming`]: one-pass Frobenius-norm sparse LRA over turnstile streams.
//! * [`gaussian`]: planted sparse signals in Gaussian noise, detection and estimation.

pub mod budget;
pub mod error;
pub mod gaussian;
pub mod instances;
pub mod io;
pub mod krylov;
pub mod linalg;
pub mod matrix;
pub mod nets;
pub mod oracle;
pub mod rng;
pub mod sketch;
pub mod streaming;

pub use error::{Result, SlraError};
pub use linalg::{spectral_norm, svd, svd_truncated, RestrictMode, SvdResult};
pub use matrix::{materialize, Component, DenseMatrix, SparseRankKFactor, SparseVec, SupportPair};
