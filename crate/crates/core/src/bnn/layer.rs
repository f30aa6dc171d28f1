use rand::Rng;

use crate::numeric::{Matrix, RngStream};
use crate::{Error, Result};

/// Initial log-variance of every weight and bias posterior.
pub(crate) const INIT_LOGVAR: f64 = -9.0;

/// Fully-connected layer with factorized Gaussian posteriors over its
/// weights (`A × B`) and biases (`B`).
///
/// Variances and prior scales are stored in log space so they stay
/// positive under unconstrained optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalLinearLayer {
    /// Posterior means of the weights.
    pub mean_w: Matrix,
    /// Log posterior variances of the weights.
    pub logvar_w: Matrix,
    /// Posterior means of the biases.
    pub mean_b: Vec<f64>,
    /// Log posterior variances of the biases.
    pub logvar_b: Vec<f64>,
    /// Log of the per-weight prior standard deviation `z`.
    pub log_prior_scale_w: Matrix,
}

/// Gradient blocks mirroring [`VariationalLinearLayer`].
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradients {
    pub mean_w: Matrix,
    pub logvar_w: Matrix,
    pub mean_b: Vec<f64>,
    pub logvar_b: Vec<f64>,
    pub log_prior_scale_w: Matrix,
}

/// Intermediates of a sampled forward pass kept for backpropagation.
#[derive(Clone, Debug)]
pub struct LayerTrace {
    pub input: Matrix,
    pub noise: Matrix,
    /// Element-wise square root of the output variance.
    pub std_out: Matrix,
    pub output: Matrix,
}

pub(crate) const LAYER_BLOCKS: [&str; 5] =
    ["mean_w", "logvar_w", "mean_b", "logvar_b", "log_prior_scale_w"];

impl VariationalLinearLayer {
    /// Means uniform in `±1/sqrt(inputs)`, zero bias means, posterior
    /// log-variances at [`INIT_LOGVAR`] and unit prior scales.
    pub fn init(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        Self {
            mean_w: Matrix::from_fn(inputs, outputs, |_, _| rng.random_range(-bound..bound)),
            logvar_w: Matrix::filled(inputs, outputs, INIT_LOGVAR),
            mean_b: vec![0.0; outputs],
            logvar_b: vec![INIT_LOGVAR; outputs],
            log_prior_scale_w: Matrix::zeros(inputs, outputs),
        }
    }

    /// Layer with the given means, a shared posterior log-variance and unit
    /// prior scales.
    pub fn from_means(mean_w: Matrix, mean_b: Vec<f64>, logvar: f64) -> Result<Self> {
        if mean_b.len() != mean_w.cols() {
            return Err(Error::argument(format!(
                "bias of length {} for {} outputs",
                mean_b.len(),
                mean_w.cols()
            )));
        }
        let (a, b) = mean_w.shape();
        Ok(Self {
            logvar_w: Matrix::filled(a, b, logvar),
            logvar_b: vec![logvar; b],
            log_prior_scale_w: Matrix::zeros(a, b),
            mean_w,
            mean_b,
        })
    }

    pub fn inputs(&self) -> usize {
        self.mean_w.rows()
    }

    pub fn outputs(&self) -> usize {
        self.mean_w.cols()
    }

    pub fn parameter_count(&self) -> usize {
        3 * self.inputs() * self.outputs() + 2 * self.outputs()
    }

    /// Checks block shapes and that every stored value is finite.
    pub fn validate(&self) -> Result<()> {
        let shape = self.mean_w.shape();
        if self.logvar_w.shape() != shape
            || self.log_prior_scale_w.shape() != shape
            || self.mean_b.len() != shape.1
            || self.logvar_b.len() != shape.1
        {
            return Err(Error::argument("inconsistent layer block shapes"));
        }
        let finite = self.blocks().iter().all(|(_, b)| b.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::numeric("layer parameters"));
        }
        Ok(())
    }

    pub(crate) fn blocks(&self) -> [(&'static str, &[f64]); 5] {
        [
            (LAYER_BLOCKS[0], self.mean_w.data()),
            (LAYER_BLOCKS[1], self.logvar_w.data()),
            (LAYER_BLOCKS[2], &self.mean_b),
            (LAYER_BLOCKS[3], &self.logvar_b),
            (LAYER_BLOCKS[4], self.log_prior_scale_w.data()),
        ]
    }

    pub(crate) fn blocks_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.mean_w.data_mut(),
            self.logvar_w.data_mut(),
            &mut self.mean_b,
            &mut self.logvar_b,
            self.log_prior_scale_w.data_mut(),
        ]
    }

    fn check_input(&self, h_in: &Matrix) -> Result<()> {
        if h_in.cols() != self.inputs() {
            return Err(Error::argument(format!(
                "layer expects {} input columns, got {}",
                self.inputs(),
                h_in.cols()
            )));
        }
        Ok(())
    }

    /// Deterministic pass through the posterior means: `h_in · M_W + mu_b`.
    pub fn forward_mean(&self, h_in: &Matrix) -> Result<Matrix> {
        self.check_input(h_in)?;
        h_in.matmul(&self.mean_w)?.add_row_vector(&self.mean_b)
    }

    /// Mean and variance of the pre-activations induced by the posterior:
    /// `M_out = h_in · M_W + mu_b` and `V_out = h_in² · V_W + sigma_b²`.
    pub fn output_moments(&self, h_in: &Matrix) -> Result<(Matrix, Matrix)> {
        let m_out = self.forward_mean(h_in)?;
        let var_w = self.logvar_w.map(f64::exp);
        let var_b: Vec<f64> = self.logvar_b.iter().map(|v| v.exp()).collect();
        let v_out = h_in.map(|h| h * h).matmul(&var_w)?.add_row_vector(&var_b)?;
        Ok((m_out, v_out))
    }

    /// Local reparametrization with caller-supplied standard normal noise
    /// `E` of shape `N × B`: returns `M_out + sqrt(V_out) ⊙ E` and the
    /// intermediates needed by [`Self::backward_sampled`].
    pub fn forward_with_noise(&self, h_in: &Matrix, noise: &Matrix) -> Result<LayerTrace> {
        let (m_out, v_out) = self.output_moments(h_in)?;
        if noise.shape() != m_out.shape() {
            return Err(Error::argument(format!(
                "noise of shape {:?} for output {:?}",
                noise.shape(),
                m_out.shape()
            )));
        }
        let std_out = v_out.map(f64::sqrt);
        let output = m_out.add(&std_out.hadamard(noise)?)?;
        Ok(LayerTrace {
            input: h_in.clone(),
            noise: noise.clone(),
            std_out,
            output,
        })
    }

    /// Local reparametrization forward pass with noise drawn from `stream`.
    pub fn forward_local_reparam(&self, h_in: &Matrix, stream: &RngStream) -> Result<LayerTrace> {
        self.check_input(h_in)?;
        let noise = stream.standard_normal(h_in.rows(), self.outputs());
        self.forward_with_noise(h_in, &noise)
    }

    pub fn zero_gradients(&self) -> LayerGradients {
        let (a, b) = self.mean_w.shape();
        LayerGradients {
            mean_w: Matrix::zeros(a, b),
            logvar_w: Matrix::zeros(a, b),
            mean_b: vec![0.0; b],
            logvar_b: vec![0.0; b],
            log_prior_scale_w: Matrix::zeros(a, b),
        }
    }

    /// Backpropagates `grad_out = dL/dH_out` through a sampled pass.
    /// Returns the parameter gradients and `dL/dH_in`.
    pub fn backward_sampled(
        &self,
        trace: &LayerTrace,
        grad_out: &Matrix,
    ) -> Result<(LayerGradients, Matrix)> {
        // H_out = M_out + S ⊙ E, S = sqrt(V_out)  =>  dL/dV_out = G ⊙ E / (2 S)
        let grad_var = grad_out.zip_with(&trace.noise, "grad_var", |g, e| g * e)?;
        let grad_var = grad_var.zip_with(&trace.std_out, "grad_var", |ge, s| 0.5 * ge / s)?;

        let input = &trace.input;
        let input_sq = input.map(|h| h * h);
        let var_w = self.logvar_w.map(f64::exp);

        let mut grads = self.zero_gradients();
        grads.mean_w = input.t_matmul(grad_out)?;
        grads.mean_b = grad_out.col_sums();
        grads.logvar_w = input_sq.t_matmul(&grad_var)?.hadamard(&var_w)?;
        grads.logvar_b = grad_var
            .col_sums()
            .iter()
            .zip(&self.logvar_b)
            .map(|(g, lv)| g * lv.exp())
            .collect();

        // dL/dH_in = G · M_Wᵀ + 2 H_in ⊙ (dL/dV_out · V_Wᵀ)
        let through_mean = grad_out.matmul_t(&self.mean_w)?;
        let through_var = grad_var.matmul_t(&var_w)?;
        let mut grad_in = through_mean;
        for ((g, &tv), &h) in grad_in
            .data_mut()
            .iter_mut()
            .zip(through_var.data())
            .zip(input.data())
        {
            *g += 2.0 * h * tv;
        }
        Ok((grads, grad_in))
    }

    /// Backpropagates through [`Self::forward_mean`].
    pub fn backward_mean(&self, input: &Matrix, grad_out: &Matrix) -> Result<(LayerGradients, Matrix)> {
        let mut grads = self.zero_gradients();
        grads.mean_w = input.t_matmul(grad_out)?;
        grads.mean_b = grad_out.col_sums();
        let grad_in = grad_out.matmul_t(&self.mean_w)?;
        Ok((grads, grad_in))
    }

    /// Closed-form `KL(q || p)` summed over weights (prior `N(0, z²)`) and
    /// biases (prior `N(0, 1)`).
    pub fn kl(&self) -> f64 {
        let weights: f64 = self
            .mean_w
            .data()
            .iter()
            .zip(self.logvar_w.data())
            .zip(self.log_prior_scale_w.data())
            .map(|((&mu, &lv), &lz)| kl_term(mu, lv, lz))
            .sum();
        let biases: f64 = self
            .mean_b
            .iter()
            .zip(&self.logvar_b)
            .map(|(&mu, &lv)| kl_term(mu, lv, 0.0))
            .sum();
        weights + biases
    }

    /// Adds `scale · dKL/dθ` into `grads`.
    pub fn accumulate_kl_grad(&self, grads: &mut LayerGradients, scale: f64) {
        let n = self.mean_w.data().len();
        for k in 0..n {
            let mu = self.mean_w.data()[k];
            let lv = self.logvar_w.data()[k];
            let lz = self.log_prior_scale_w.data()[k];
            let (g_mu, g_lv, g_lz) = kl_term_grad(mu, lv, lz);
            grads.mean_w.data_mut()[k] += scale * g_mu;
            grads.logvar_w.data_mut()[k] += scale * g_lv;
            grads.log_prior_scale_w.data_mut()[k] += scale * g_lz;
        }
        for j in 0..self.outputs() {
            let (g_mu, g_lv, _) = kl_term_grad(self.mean_b[j], self.logvar_b[j], 0.0);
            grads.mean_b[j] += scale * g_mu;
            grads.logvar_b[j] += scale * g_lv;
        }
    }

    /// Negative log prior density of the posterior means with additive
    /// constants dropped: `Σ_w [log z + mu²/(2z²)] + Σ_b mu²/2`.
    pub fn neg_log_prior_of_means(&self) -> f64 {
        let weights: f64 = self
            .mean_w
            .data()
            .iter()
            .zip(self.log_prior_scale_w.data())
            .map(|(&mu, &lz)| lz + 0.5 * mu * mu * (-2.0 * lz).exp())
            .sum();
        let biases: f64 = self.mean_b.iter().map(|mu| 0.5 * mu * mu).sum();
        weights + biases
    }

    pub fn accumulate_prior_grad(&self, grads: &mut LayerGradients) {
        for k in 0..self.mean_w.data().len() {
            let mu = self.mean_w.data()[k];
            let lz = self.log_prior_scale_w.data()[k];
            let inv_z2 = (-2.0 * lz).exp();
            grads.mean_w.data_mut()[k] += mu * inv_z2;
            grads.log_prior_scale_w.data_mut()[k] += 1.0 - mu * mu * inv_z2;
        }
        for (g, mu) in grads.mean_b.iter_mut().zip(&self.mean_b) {
            *g += mu;
        }
    }
}

impl LayerGradients {
    pub(crate) fn blocks(&self) -> [&[f64]; 5] {
        [
            self.mean_w.data(),
            self.logvar_w.data(),
            &self.mean_b,
            &self.logvar_b,
            self.log_prior_scale_w.data(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// `KL(N(mu, e^lv) || N(0, e^{2 lz}))`.
fn kl_term(mu: f64, lv: f64, lz: f64) -> f64 {
    lz - 0.5 * lv + 0.5 * (lv.exp() + mu * mu) * (-2.0 * lz).exp() - 0.5
}

/// Partial derivatives of [`kl_term`] with respect to `(mu, lv, lz)`.
fn kl_term_grad(mu: f64, lv: f64, lz: f64) -> (f64, f64, f64) {
    let inv_z2 = (-2.0 * lz).exp();
    let var = lv.exp();
    (mu * inv_z2, -0.5 + 0.5 * var * inv_z2, 1.0 - (var + mu * mu) * inv_z2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_weight(mu: f64, var: f64) -> VariationalLinearLayer {
        // Bias posterior equal to its N(0, 1) prior so it contributes nothing.
        let mut layer = VariationalLinearLayer::from_means(Matrix::from_rows(&[&[mu]]), vec![0.0], 0.0).unwrap();
        layer.logvar_w.set(0, 0, var.ln());
        layer
    }

    #[test]
    fn kl_worked_values() {
        assert_eq!(single_weight(0.0, 1.0).kl(), 0.0);
        assert_eq!(single_weight(1.0, 1.0).kl(), 0.5);
        assert!((single_weight(0.0, 0.25).kl() - 0.318147).abs() < 1e-6);
    }

    #[test]
    fn kl_zero_when_posterior_matches_scaled_prior() {
        let mut layer = single_weight(0.0, 4.0);
        layer.log_prior_scale_w.set(0, 0, 2.0f64.ln());
        assert!(layer.kl().abs() < 1e-15);
    }

    #[test]
    fn degenerate_affine_pass() {
        let layer = VariationalLinearLayer::from_means(
            Matrix::from_rows(&[&[1.0], &[1.0]]),
            vec![0.5],
            -60.0,
        )
        .unwrap();
        let h = Matrix::from_rows(&[&[1.0, 2.0]]);
        for seed in 0..5 {
            let out = layer.forward_local_reparam(&h, &RngStream::new(seed)).unwrap();
            assert!((out.output.get(0, 0) - 3.5).abs() < 1e-10);
        }
        assert_eq!(layer.forward_mean(&h).unwrap().data(), &[3.5]);
    }

    #[test]
    fn mean_pass_worked_value() {
        let layer = VariationalLinearLayer::from_means(Matrix::from_rows(&[&[3.0]]), vec![1.0], -9.0).unwrap();
        let out = layer.forward_mean(&Matrix::from_rows(&[&[2.0]])).unwrap();
        assert_eq!(out.data(), &[7.0]);
    }

    #[test]
    fn identity_means_pass_through() {
        let eye = Matrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        let layer = VariationalLinearLayer::from_means(eye, vec![0.0; 3], -9.0).unwrap();
        let h = Matrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 * 0.1);
        assert_eq!(layer.forward_mean(&h).unwrap(), h);
    }

    #[test]
    fn zero_input_samples_bias_posterior() {
        let mut layer = VariationalLinearLayer::from_means(Matrix::zeros(2, 2), vec![1.0, -2.0], 0.0).unwrap();
        layer.logvar_b = vec![0.25f64.ln(), 4.0f64.ln()];
        let h = Matrix::zeros(20_000, 2);
        let out = layer.forward_local_reparam(&h, &RngStream::new(9)).unwrap().output;
        for (j, (mu, var)) in [(1.0, 0.25), (-2.0, 4.0)].into_iter().enumerate() {
            let col = out.col(j);
            let n = col.len() as f64;
            let m = col.iter().sum::<f64>() / n;
            let v = col.iter().map(|c| (c - m).powi(2)).sum::<f64>() / n;
            assert!((m - mu).abs() < 4.0 * (var / n).sqrt(), "mean {m}");
            assert!((v / var - 1.0).abs() < 0.05, "var {v}");
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let layer = VariationalLinearLayer::init(2, 3, &mut RngStream::new(0).rng());
        assert!(layer.forward_mean(&Matrix::zeros(4, 3)).is_err());
        assert!(layer.forward_local_reparam(&Matrix::zeros(4, 1), &RngStream::new(0)).is_err());
        assert!(layer
            .forward_with_noise(&Matrix::zeros(4, 2), &Matrix::zeros(4, 2))
            .is_err());
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let layer = VariationalLinearLayer::init(4, 10, &mut RngStream::new(1).rng());
        assert!(layer.mean_w.data().iter().all(|w| w.abs() < 0.5));
        assert!(layer.logvar_w.data().iter().all(|&v| v == INIT_LOGVAR));
        assert!(layer.log_prior_scale_w.data().iter().all(|&v| v == 0.0));
        assert_eq!(layer.mean_b, vec![0.0; 10]);
        layer.validate().unwrap();
    }
}
