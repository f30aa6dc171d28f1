//! Mean-field variational Bayesian network for a scalar conditional
//! distribution `p(y | x) = N(y | mu(x), sigma(x)^2)`.
//!
//! Every weight has a Gaussian posterior `N(mu, sigma_q^2)` and a zero-mean
//! Gaussian prior with its own learnable scale `z`; biases have standard
//! normal priors. Layers are sampled with the local reparametrization
//! trick and all gradients are derived by hand for the fixed
//! input -> tanh hidden layer -> (mean, log-scale) architecture.

mod layer;
mod model;
mod objective;

pub use layer::{LayerGradients, LayerTrace, VariationalLinearLayer};
pub use model::{ConditionalModel, ForwardMode, Gradients, SIGMA_PRELINK_CLAMP};
pub(crate) use objective::HALF_LOG_2PI;
pub use objective::{gaussian_nll, VariationalModel};
