//! Causal direction discovery between two scalar variables by comparing
//! variational Bayesian codelengths of the two candidate factorizations.
//!
//! For a hypothesized direction `X -> Y` the indicator score is the
//! codelength of the cause under a standard Gaussian plus the variational
//! codelength of the effect given the cause under a small Bayesian neural
//! network with a heteroscedastic Gaussian likelihood. The direction with
//! the shorter total description wins.
//!
//! Modules, bottom-up:
//!
//! - [`numeric`]: matrices, keyed RNG streams, Adam, cosine schedule,
//!   finite-difference gradients.
//! - [`bnn`]: mean-field Gaussian layers with local reparametrization,
//!   closed-form KL, MAP and ELBO objectives with hand-derived gradients.
//! - [`codelength`]: the training schedule and the scoring pipeline.
//! - [`data`]: standardization, synthetic generators, pair-file and
//!   cause-effect-pairs loaders.
//! - [`eval`]: accuracy, weighted AUROC, benchmark aggregation.

pub mod bnn;
pub mod codelength;
pub mod data;
mod error;
pub mod eval;
pub mod numeric;

pub use error::{Error, Result};
