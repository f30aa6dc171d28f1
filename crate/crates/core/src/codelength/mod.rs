//! Codelength-based scoring of the two candidate causal directions.
//!
//! For a hypothesized direction `cause -> effect` on standardized data the
//! indicator score is
//!
//! ```text
//! delta = L_marginal(cause) + L_var(effect | cause)
//! ```
//!
//! where the marginal code is a standard Gaussian and the conditional code
//! is the negative ELBO of a trained [`crate::bnn::ConditionalModel`]. The
//! final score is `delta(Y -> X) - delta(X -> Y)`; positive means `X -> Y`.

mod config;
mod score;
mod train;

pub use config::TrainConfig;
pub use score::{score_pair, Decision, DirectionReport, PairReport};
pub use train::{
    conditional_variational_codelength, estimate_conditional_codelength,
    marginal_gaussian_codelength, train_conditional, train_variational, CodelengthEstimate,
};
