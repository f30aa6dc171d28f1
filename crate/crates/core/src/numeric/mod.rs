//! Deterministic numerical substrate shared by the training and scoring code.

mod adam;
mod finite_diff;
mod matrix;
mod rng;
mod schedule;

pub use adam::{Adam, AdamConfig};
pub use finite_diff::finite_diff_grad;
pub use matrix::Matrix;
pub use rng::RngStream;
pub use schedule::CosineSchedule;
