//! Robust estimation under τ-divergence model uncertainty.
//!
//! The actual law of `z = [x; y]` is only known to lie in a ball
//! `{f̃ : D_τ(f̃‖f) ≤ c}` around a nominal Gaussian `f` (or, for stationary
//! processes, `S_τ(f̃‖f) ≤ c` around a nominal spectral density). The nominal
//! Bayes estimator (resp. the noncausal Wiener filter) stays minimax optimal
//! over every such ball; this crate computes the least-favorable statistics,
//! the multiplier that puts them on the ball boundary, and the resulting MSE
//! degradation.
//!
//! - [`divergence`]: the τ divergence family for vectors and processes.
//! - [`static_robust`]: Bayes estimator, least-favorable `P̃`, multiplier solve.
//! - [`entropy`]: τ entropy and the relaxed (soft-constraint) problem.
//! - [`dynamic`]: Wiener filter and least-favorable error spectra on a grid.
//! - [`cli`]: the `taurob` command-line front end.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bisect;
pub mod cli;
pub mod divergence;
pub mod dynamic;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod report;
mod sampling;
pub mod static_robust;

pub use divergence::{ell_tau, spectral_tau_divergence, tau_divergence, DivergenceValue};
pub use dynamic::{wiener_filter, worst_case_spectral, WorstCaseSpectral};
pub use entropy::{error_moments, tau_entropy, EntropyValue, ErrorMoments};
pub use error::{Error, Result};
pub use models::{GaussianPair, JointGaussian, SpectralModel, TauBall};
pub use static_robust::{bayes_estimator, worst_case_static, AffineEstimator, WorstCaseStatic};
