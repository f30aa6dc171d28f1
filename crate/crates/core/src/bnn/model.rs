use crate::numeric::{Matrix, RngStream};
use crate::{Error, Result};

use super::layer::{LayerGradients, LayerTrace, VariationalLinearLayer, LAYER_BLOCKS};
use super::objective::{VariationalModel, HALF_LOG_2PI};

/// The pre-link scale output is clamped to `[-15, 15]` before `exp`.
pub const SIGMA_PRELINK_CLAMP: f64 = 15.0;

/// One-hidden-layer Bayesian network mapping a scalar input to the mean
/// and standard deviation of a Gaussian likelihood.
///
/// `mu(x)` is output node 0; `sigma(x) = exp(clamp(node 1))`. The hidden
/// activation is `tanh`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalModel {
    pub hidden: VariationalLinearLayer,
    pub output: VariationalLinearLayer,
}

#[derive(Clone, Copy, Debug)]
pub enum ForwardMode<'a> {
    /// Deterministic pass through the posterior means.
    Mean,
    /// Local-reparametrized pass with noise from the given stream.
    Sampled(&'a RngStream),
}

/// Gradients of a [`ConditionalModel`] objective, one block per parameter
/// block.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub hidden: LayerGradients,
    pub output: LayerGradients,
}

impl Gradients {
    pub fn to_flat(&self) -> Vec<f64> {
        self.hidden
            .blocks()
            .into_iter()
            .chain(self.output.blocks())
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.hidden.is_finite() && self.output.is_finite()
    }
}

struct SampledPass {
    hidden: LayerTrace,
    activation: Matrix,
    output: LayerTrace,
}

impl ConditionalModel {
    /// Freshly initialized network with `hidden_width` tanh units.
    pub fn new(hidden_width: usize, stream: &RngStream) -> Result<Self> {
        if hidden_width == 0 {
            return Err(Error::argument("hidden width must be at least 1"));
        }
        let mut rng = stream.rng();
        let hidden = VariationalLinearLayer::init(1, hidden_width, &mut rng);
        let output = VariationalLinearLayer::init(hidden_width, 2, &mut rng);
        Ok(Self { hidden, output })
    }

    /// Builds a model from explicit layers, checking the architecture.
    pub fn from_layers(hidden: VariationalLinearLayer, output: VariationalLinearLayer) -> Result<Self> {
        hidden.validate()?;
        output.validate()?;
        if hidden.inputs() != 1 || output.inputs() != hidden.outputs() || output.outputs() != 2 {
            return Err(Error::argument(format!(
                "architecture {}x{} -> {}x{} is not 1 -> D -> 2",
                hidden.inputs(),
                hidden.outputs(),
                output.inputs(),
                output.outputs()
            )));
        }
        Ok(Self { hidden, output })
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden.outputs()
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden.parameter_count() + self.output.parameter_count()
    }

    fn input_column(x: &[f64]) -> Result<Matrix> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("model input contains non-finite values"));
        }
        Ok(Matrix::column(x))
    }

    fn sampled_pass(&self, x: &[f64], stream: &RngStream) -> Result<SampledPass> {
        let input = Self::input_column(x)?;
        let hidden = self.hidden.forward_local_reparam(&input, &stream.tag("hidden"))?;
        if !hidden.output.is_finite() {
            return Err(Error::numeric("hidden layer output"));
        }
        let activation = hidden.output.map(f64::tanh);
        let output = self.output.forward_local_reparam(&activation, &stream.tag("output"))?;
        if !output.output.is_finite() {
            return Err(Error::numeric("output layer output"));
        }
        Ok(SampledPass {
            hidden,
            activation,
            output,
        })
    }

    fn mean_pass(&self, x: &[f64]) -> Result<(Matrix, Matrix, Matrix)> {
        let input = Self::input_column(x)?;
        let pre = self.hidden.forward_mean(&input)?;
        if !pre.is_finite() {
            return Err(Error::numeric("hidden layer output"));
        }
        let activation = pre.map(f64::tanh);
        let out = self.output.forward_mean(&activation)?;
        if !out.is_finite() {
            return Err(Error::numeric("output layer output"));
        }
        Ok((input, activation, out))
    }

    /// `(mu, sigma)` for every input.
    pub fn forward(&self, x: &[f64], mode: ForwardMode<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
        let out = match mode {
            ForwardMode::Mean => self.mean_pass(x)?.2,
            ForwardMode::Sampled(stream) => self.sampled_pass(x, stream)?.output.output,
        };
        let mu = out.col(0);
        let sigma = out.col(1).into_iter().map(|s| clamp_prelink(s).exp()).collect();
        Ok((mu, sigma))
    }

    /// Closed-form KL divergence of the posterior from the prior over every
    /// weight and bias.
    pub fn kl(&self) -> f64 {
        self.hidden.kl() + self.output.kl()
    }

    /// Single-draw negative ELBO, `NLL(y | sampled pass) + beta · KL`, and
    /// its exact gradient under that draw.
    pub fn elbo_objective(
        &self,
        x: &[f64],
        y: &[f64],
        beta: f64,
        stream: &RngStream,
    ) -> Result<(f64, Gradients)> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::argument(format!("beta {beta} outside [0, 1]")));
        }
        check_lengths(x, y)?;
        let pass = self.sampled_pass(x, stream)?;
        let (nll, grad_out) = nll_and_output_grad(&pass.output.output, y);

        let (mut output_grads, grad_act) = self.output.backward_sampled(&pass.output, &grad_out)?;
        let grad_pre = tanh_backward(&grad_act, &pass.activation)?;
        let (mut hidden_grads, _) = self.hidden.backward_sampled(&pass.hidden, &grad_pre)?;

        let loss = if beta > 0.0 {
            self.hidden.accumulate_kl_grad(&mut hidden_grads, beta);
            self.output.accumulate_kl_grad(&mut output_grads, beta);
            nll + beta * self.kl()
        } else {
            nll
        };
        finish(loss, hidden_grads, output_grads)
    }

    /// Negative joint log-likelihood of the data and the posterior means:
    /// `NLL(y | mean pass) + Σ_w [log z + mu²/(2z²)] + Σ_b mu²/2`.
    /// Posterior variances get zero gradient.
    pub fn map_objective(&self, x: &[f64], y: &[f64]) -> Result<(f64, Gradients)> {
        check_lengths(x, y)?;
        let (input, activation, out) = self.mean_pass(x)?;
        let (nll, grad_out) = nll_and_output_grad(&out, y);

        let (mut output_grads, grad_act) = self.output.backward_mean(&activation, &grad_out)?;
        let grad_pre = tanh_backward(&grad_act, &activation)?;
        let (mut hidden_grads, _) = self.hidden.backward_mean(&input, &grad_pre)?;

        self.hidden.accumulate_prior_grad(&mut hidden_grads);
        self.output.accumulate_prior_grad(&mut output_grads);
        let loss = nll + self.hidden.neg_log_prior_of_means() + self.output.neg_log_prior_of_means();
        finish(loss, hidden_grads, output_grads)
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("x has {} values, y has {}", x.len(), y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("target contains non-finite values"));
    }
    Ok(())
}

fn finish(loss: f64, hidden: LayerGradients, output: LayerGradients) -> Result<(f64, Gradients)> {
    let grads = Gradients { hidden, output };
    if !loss.is_finite() {
        return Err(Error::numeric("objective value"));
    }
    if !grads.is_finite() {
        return Err(Error::numeric("objective gradient"));
    }
    Ok((loss, grads))
}

fn clamp_prelink(s: f64) -> f64 {
    s.clamp(-SIGMA_PRELINK_CLAMP, SIGMA_PRELINK_CLAMP)
}

/// Gaussian NLL of `y` given the raw network output (column 0 the mean,
/// column 1 the pre-link log-scale) and the gradient with respect to that
/// output.
fn nll_and_output_grad(out: &Matrix, y: &[f64]) -> (f64, Matrix) {
    let mut grad = Matrix::zeros(out.rows(), 2);
    let mut nll = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let mu = out.get(i, 0);
        let pre = out.get(i, 1);
        let log_sigma = clamp_prelink(pre);
        let inv_sigma = (-log_sigma).exp();
        let r = (yi - mu) * inv_sigma;
        nll += HALF_LOG_2PI + log_sigma + 0.5 * r * r;
        grad.set(i, 0, -r * inv_sigma);
        if pre.abs() <= SIGMA_PRELINK_CLAMP {
            grad.set(i, 1, 1.0 - r * r);
        }
    }
    (nll, grad)
}

fn tanh_backward(grad_act: &Matrix, activation: &Matrix) -> Result<Matrix> {
    grad_act.zip_with(activation, "tanh_backward", |g, a| g * (1.0 - a * a))
}

impl VariationalModel for ConditionalModel {
    fn parameter_layout(&self) -> Vec<(String, usize)> {
        let mut layout = Vec::with_capacity(10);
        for (prefix, layer) in [("hidden", &self.hidden), ("output", &self.output)] {
            for (name, block) in layer.blocks() {
                layout.push((format!("{prefix}.{name}"), block.len()));
            }
        }
        debug_assert_eq!(layout.len(), 2 * LAYER_BLOCKS.len());
        layout
    }

    fn parameters(&self) -> Vec<f64> {
        self.hidden
            .blocks()
            .into_iter()
            .chain(self.output.blocks())
            .flat_map(|(_, b)| b.iter().copied())
            .collect()
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::argument(format!(
                "{} values for {} parameters",
                values.len(),
                self.parameter_count()
            )));
        }
        let mut rest = values;
        for block in self
            .hidden
            .blocks_mut()
            .into_iter()
            .chain(self.output.blocks_mut())
        {
            let (head, tail) = rest.split_at(block.len());
            block.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    fn map_objective_flat(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (loss, grads) = self.map_objective(x, y)?;
        Ok((loss, grads.to_flat()))
    }

    fn elbo_objective_flat(
        &self,
        x: &[f64],
        y: &[f64],
        beta: f64,
        stream: &RngStream,
    ) -> Result<(f64, Vec<f64>)> {
        let (loss, grads) = self.elbo_objective(x, y, beta, stream)?;
        Ok((loss, grads.to_flat()))
    }

    fn sampled_nll(&self, x: &[f64], y: &[f64], stream: &RngStream) -> Result<f64> {
        check_lengths(x, y)?;
        let pass = self.sampled_pass(x, stream)?;
        Ok(nll_and_output_grad(&pass.output.output, y).0)
    }

    fn kl(&self) -> f64 {
        ConditionalModel::kl(self)
    }
}
