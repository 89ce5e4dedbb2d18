//! Spectral-norm low-rank approximation for matrices whose top singular
//! vectors are sparse: Krylov support discovery, certified estimation of
//! `σ_{k+1}`, a Chebyshev sweep around it, and an SVD on the found block.

mod bounds;
mod chebyshev;
mod dd;
mod iterates;
mod lra;
mod ops;

pub use bounds::{find_sigma_k1, sv_bounds, SigmaInterval, SvBounds};
pub use chebyshev::{chebyshev_ratio, ChebyshevPoly, MAX_COEFF_DEGREE};
pub use dd::Dd;
pub use iterates::{krylov_build, power_degree, power_support, support_from, KrylovIterates};
pub use lra::{bucket_sweep, sparse_spectral_lra, sweep_alphas, SpectralLraOutput, SpectralParams, DEFAULT_POWER_CONSTANT};
pub use ops::{norm_estimate, norm_steps, CountedMatrix, Deflated, EmbeddedLowRank, LinOp};
