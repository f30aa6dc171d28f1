use crate::bnn::{ConditionalModel, VariationalModel, HALF_LOG_2PI};
use crate::numeric::{Adam, AdamConfig, CosineSchedule, RngStream};
use crate::{Error, Result};

use super::TrainConfig;

/// Codelength of standardized `x` under a standard Gaussian, in nats.
pub fn marginal_gaussian_codelength(x: &[f64]) -> f64 {
    x.iter().map(|v| HALF_LOG_2PI + 0.5 * v * v).sum()
}

fn in_phase(phase: &str, epoch: usize, err: Error) -> Error {
    match err {
        Error::Numeric { context } => Error::numeric(format!("{phase} phase, epoch {epoch}: {context}")),
        other => other,
    }
}

/// Runs MAP pretraining for `map_epochs`, then variational training for
/// `vi_epochs` with a linear KL warm-up, each phase with its own Adam state
/// and cosine schedule. Full-batch throughout.
pub fn train_variational<M: VariationalModel>(
    model: &mut M,
    x: &[f64],
    y: &[f64],
    cfg: &TrainConfig,
    stream: &RngStream,
) -> Result<()> {
    cfg.validate()?;
    let layout = model.parameter_layout();
    let mut params = model.parameters();

    let schedule = CosineSchedule::new(cfg.lr_max, cfg.lr_min, cfg.map_epochs)?;
    let mut adam = Adam::with_blocks(&layout, AdamConfig::default());
    for epoch in 0..cfg.map_epochs {
        let (_, grads) = model
            .map_objective_flat(x, y)
            .map_err(|e| in_phase("map", epoch, e))?;
        adam.step(&mut params, &grads, schedule.lr(epoch)?)
            .map_err(|e| in_phase("map", epoch, e))?;
        model.set_parameters(&params)?;
    }

    let schedule = CosineSchedule::new(cfg.lr_max, cfg.lr_min, cfg.vi_epochs)?;
    let mut adam = Adam::with_blocks(&layout, AdamConfig::default());
    let vi_stream = stream.tag("vi");
    for epoch in 0..cfg.vi_epochs {
        let beta = (epoch as f64 / cfg.warmup_epochs as f64).min(1.0);
        let (_, grads) = model
            .elbo_objective_flat(x, y, beta, &vi_stream.tag(epoch))
            .map_err(|e| in_phase("vi", epoch, e))?;
        adam.step(&mut params, &grads, schedule.lr(epoch)?)
            .map_err(|e| in_phase("vi", epoch, e))?;
        model.set_parameters(&params)?;
    }
    Ok(())
}

/// Trains a fresh [`ConditionalModel`] for `effect | cause` on
/// standardized data.
pub fn train_conditional(
    cause: &[f64],
    effect: &[f64],
    cfg: &TrainConfig,
    stream: &RngStream,
) -> Result<ConditionalModel> {
    if cause.len() != effect.len() {
        return Err(Error::argument(format!(
            "cause has {} samples, effect has {}",
            cause.len(),
            effect.len()
        )));
    }
    if cause.len() < 2 {
        return Err(Error::argument("need at least 2 samples"));
    }
    let mut model = ConditionalModel::new(cfg.hidden_width, &stream.tag("init"))?;
    train_variational(&mut model, cause, effect, cfg, stream)?;
    Ok(model)
}

/// Monte Carlo estimate of the variational codelength with its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodelengthEstimate {
    /// Expected NLL plus KL.
    pub total: f64,
    pub expected_nll: f64,
    pub kl: f64,
    /// Standard error of the expected-NLL average.
    pub std_error: f64,
}

/// Averages the sampled NLL over `samples` forward passes and adds the KL
/// term once, in closed form.
pub fn estimate_conditional_codelength<M: VariationalModel>(
    model: &M,
    x: &[f64],
    y: &[f64],
    samples: usize,
    stream: &RngStream,
) -> Result<CodelengthEstimate> {
    if samples == 0 {
        return Err(Error::argument("need at least one Monte Carlo sample"));
    }
    let draws = (0..samples)
        .map(|k| model.sampled_nll(x, y, &stream.tag(k)))
        .collect::<Result<Vec<f64>>>()?;
    let n = samples as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let std_error = if samples > 1 {
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::INFINITY
    };
    let kl = model.kl();
    let total = mean + kl;
    if !total.is_finite() {
        return Err(Error::numeric("conditional codelength"));
    }
    Ok(CodelengthEstimate {
        total,
        expected_nll: mean,
        kl,
        std_error,
    })
}

/// Variational codelength `E_q[NLL] + KL(q || p)` in nats.
pub fn conditional_variational_codelength<M: VariationalModel>(
    model: &M,
    x: &[f64],
    y: &[f64],
    samples: usize,
    stream: &RngStream,
) -> Result<f64> {
    Ok(estimate_conditional_codelength(model, x, y, samples, stream)?.total)
}
