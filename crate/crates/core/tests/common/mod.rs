//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use comic::bnn::{ConditionalModel, VariationalLinearLayer, VariationalModel};
use comic::codelength::TrainConfig;
use comic::numeric::{finite_diff_grad, Matrix, RngStream};
use comic::Result;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_RTOL: f64 = 1e-4;
/// Denominator floor for the relative gradient error; central differences
/// at `FD_STEP` resolve gradients to roughly 1e-9 absolute.
pub const GRAD_FLOOR: f64 = 1e-3;

pub fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Layer with random means, log-variances in `[-4, -0.5]` and log prior
/// scales in `[-0.5, 0.5]`.
pub fn random_layer(rng: &mut impl Rng, inputs: usize, outputs: usize) -> VariationalLinearLayer {
    let mean_w = Matrix::from_fn(inputs, outputs, |_, _| 0.8 * rng.sample::<f64, _>(StandardNormal));
    let mean_b = (0..outputs).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut layer = VariationalLinearLayer::from_means(mean_w, mean_b, -1.0).expect("valid layer");
    layer.logvar_w = Matrix::from_fn(inputs, outputs, |_, _| rng.random_range(-4.0..-0.5));
    layer.logvar_b = (0..outputs).map(|_| rng.random_range(-4.0..-0.5)).collect();
    layer.log_prior_scale_w = Matrix::from_fn(inputs, outputs, |_, _| rng.random_range(-0.5..0.5));
    layer
}

pub fn random_model(rng: &mut impl Rng, width: usize) -> ConditionalModel {
    let hidden = random_layer(rng, 1, width);
    let output = random_layer(rng, width, 2);
    ConditionalModel::from_layers(hidden, output).expect("1 -> D -> 2")
}

/// Largest elementwise relative error between two gradients.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(GRAD_FLOOR))
        .fold(0.0, f64::max)
}

/// Relative errors of the MAP and ELBO (fixed noise) gradients.
pub fn gradient_errors(model: &ConditionalModel, x: &[f64], y: &[f64], beta: f64, stream: &RngStream) -> (f64, f64) {
    let params = model.parameters();
    let with = |p: &[f64]| {
        let mut m = model.clone();
        m.set_parameters(p).unwrap();
        m
    };
    let (_, map_grad) = model.map_objective_flat(x, y).unwrap();
    let map_fd = finite_diff_grad(|p| with(p).map_objective_flat(x, y).unwrap().0, &params, FD_STEP).unwrap();
    let (_, elbo_grad) = model.elbo_objective_flat(x, y, beta, stream).unwrap();
    let elbo_fd =
        finite_diff_grad(|p| with(p).elbo_objective_flat(x, y, beta, stream).unwrap().0, &params, FD_STEP).unwrap();
    (max_rel_error(&map_grad, &map_fd), max_rel_error(&elbo_grad, &elbo_fd))
}

/// Closed-form KL of a layer, written out independently of the library.
pub fn kl_oracle(layer: &VariationalLinearLayer) -> f64 {
    let gauss = |m: f64, logvar: f64, prior_std: f64| {
        let var = logvar.exp();
        (prior_std.ln() - 0.5 * logvar) + (var + m * m) / (2.0 * prior_std * prior_std) - 0.5
    };
    let mut total = 0.0;
    for i in 0..layer.mean_w.data().len() {
        total += gauss(
            layer.mean_w.data()[i],
            layer.logvar_w.data()[i],
            layer.log_prior_scale_w.data()[i].exp(),
        );
    }
    for (m, lv) in layer.mean_b.iter().zip(&layer.logvar_b) {
        total += gauss(*m, *lv, 1.0);
    }
    total
}

pub fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        hidden_width: 8,
        map_epochs: 60,
        vi_epochs: 60,
        warmup_epochs: 6,
        mc_eval_samples: 8,
        seed,
        ..TrainConfig::default()
    }
}

/// One-weight model `y ~ N(w² x, NOISE_STD²)` with `w ~ N(0, 1)` and a
/// Gaussian posterior `q(w) = N(m, exp(logvar))`. The true posterior is
/// symmetric in `w`, so a single Gaussian leaves a visible gap.
#[derive(Clone, Debug)]
pub struct SquareWeightModel {
    pub mean: f64,
    pub logvar: f64,
}

impl SquareWeightModel {
    pub const NOISE_STD: f64 = 0.5;

    pub fn nll_at(w: f64, x: &[f64], y: &[f64]) -> (f64, f64) {
        let s2 = Self::NOISE_STD * Self::NOISE_STD;
        let c = 0.5 * (2.0 * std::f64::consts::PI * s2).ln();
        let mut nll = 0.0;
        let mut d_w = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            let r = yi - w * w * xi;
            nll += c + r * r / (2.0 * s2);
            d_w += -r / s2 * 2.0 * w * xi;
        }
        (nll, d_w)
    }

    fn draw(&self, stream: &RngStream) -> (f64, f64) {
        let eps = stream.standard_normal(1, 1).data()[0];
        (self.mean + (0.5 * self.logvar).exp() * eps, eps)
    }

    /// `-log ∫ p(y | w) p(w) dw` by the trapezoid rule on a wide grid.
    pub fn evidence_codelength(x: &[f64], y: &[f64]) -> f64 {
        let (lo, hi, n) = (-6.0, 6.0, 600_001);
        let dw = (hi - lo) / (n - 1) as f64;
        let log_terms: Vec<f64> = (0..n)
            .map(|i| {
                let w = lo + i as f64 * dw;
                let log_prior = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * w * w;
                let edge = if i == 0 || i == n - 1 { 0.5f64.ln() } else { 0.0 };
                log_prior - Self::nll_at(w, x, y).0 + edge
            })
            .collect();
        let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_terms.iter().map(|t| (t - max).exp()).sum();
        -(max + (sum * dw).ln())
    }
}

impl VariationalModel for SquareWeightModel {
    fn parameter_layout(&self) -> Vec<(String, usize)> {
        vec![("w.mean".into(), 1), ("w.logvar".into(), 1)]
    }

    fn parameters(&self) -> Vec<f64> {
        vec![self.mean, self.logvar]
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        assert_eq!(values.len(), 2);
        self.mean = values[0];
        self.logvar = values[1];
        Ok(())
    }

    fn map_objective_flat(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (nll, d_w) = Self::nll_at(self.mean, x, y);
        Ok((nll + 0.5 * self.mean * self.mean, vec![d_w + self.mean, 0.0]))
    }

    fn elbo_objective_flat(&self, x: &[f64], y: &[f64], beta: f64, stream: &RngStream) -> Result<(f64, Vec<f64>)> {
        let (w, eps) = self.draw(stream);
        let (nll, d_w) = Self::nll_at(w, x, y);
        let std = (0.5 * self.logvar).exp();
        let grad_mean = d_w + beta * self.mean;
        let grad_logvar = d_w * eps * 0.5 * std + beta * 0.5 * (self.logvar.exp() - 1.0);
        Ok((nll + beta * self.kl(), vec![grad_mean, grad_logvar]))
    }

    fn sampled_nll(&self, x: &[f64], y: &[f64], stream: &RngStream) -> Result<f64> {
        Ok(Self::nll_at(self.draw(stream).0, x, y).0)
    }

    fn kl(&self) -> f64 {
        0.5 * (self.logvar.exp() + self.mean * self.mean - 1.0 - self.logvar)
    }
}
