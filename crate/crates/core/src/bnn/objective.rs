use crate::numeric::RngStream;
use crate::{Error, Result};

pub(crate) const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

/// Negative log-likelihood in nats of `y` under independent
/// `N(mu_i, sigma_i²)`.
pub fn gaussian_nll(y: &[f64], mu: &[f64], sigma: &[f64]) -> Result<f64> {
    if y.len() != mu.len() || y.len() != sigma.len() {
        return Err(Error::argument(format!(
            "gaussian_nll: lengths {}, {}, {}",
            y.len(),
            mu.len(),
            sigma.len()
        )));
    }
    if let Some(s) = sigma.iter().find(|s| s.is_nan() || **s <= 0.0) {
        return Err(Error::argument(format!("gaussian_nll: sigma {s} is not positive")));
    }
    Ok(y.iter()
        .zip(mu)
        .zip(sigma)
        .map(|((&y, &m), &s)| {
            let r = (y - m) / s;
            HALF_LOG_2PI + s.ln() + 0.5 * r * r
        })
        .sum())
}

/// A conditional model trained by MAP pretraining followed by variational
/// inference, seen through a flat parameter vector.
///
/// [`crate::bnn::ConditionalModel`] is the production implementation; the
/// trait keeps the training loop and the codelength estimator independent
/// of the architecture.
pub trait VariationalModel: Clone {
    /// Named consecutive blocks of the flat parameter vector.
    fn parameter_layout(&self) -> Vec<(String, usize)>;

    fn parameters(&self) -> Vec<f64>;

    fn set_parameters(&mut self, values: &[f64]) -> Result<()>;

    /// Negative joint log-likelihood of data and posterior means (constants
    /// dropped) and its gradient.
    fn map_objective_flat(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Single-draw negative ELBO `NLL + beta·KL` and its gradient under the
    /// noise drawn from `stream`.
    fn elbo_objective_flat(
        &self,
        x: &[f64],
        y: &[f64],
        beta: f64,
        stream: &RngStream,
    ) -> Result<(f64, Vec<f64>)>;

    /// Gaussian NLL of `y` under one sampled forward pass.
    fn sampled_nll(&self, x: &[f64], y: &[f64], stream: &RngStream) -> Result<f64>;

    /// Closed-form `KL(q || p)` over all parameters.
    fn kl(&self) -> f64;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert!((gaussian_nll(&[0.0], &[0.0], &[1.0]).unwrap() - 0.918939).abs() < 1e-6);
        assert!((gaussian_nll(&[2.0], &[0.0], &[1.0]).unwrap() - 2.918939).abs() < 1e-6);
        assert!((gaussian_nll(&[0.0], &[0.0], &[2.0]).unwrap() - 1.612086).abs() < 1e-6);
        assert!((HALF_LOG_2PI - 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_sigma() {
        assert!(gaussian_nll(&[0.0], &[0.0], &[0.0]).is_err());
        assert!(gaussian_nll(&[0.0], &[0.0], &[-1.0]).is_err());
        assert!(gaussian_nll(&[0.0], &[0.0], &[f64::NAN]).is_err());
        assert!(gaussian_nll(&[0.0, 1.0], &[0.0], &[1.0]).is_err());
    }
}
