use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hyperparameters of the MAP -> VI training schedule and of the final
/// codelength estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_width: usize,
    pub vi_epochs: usize,
    /// Epochs over which the KL weight rises linearly from 0 to 1.
    pub warmup_epochs: usize,
    pub map_epochs: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    /// Monte Carlo forward passes averaged for the final codelength.
    pub mc_eval_samples: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_width: 50,
            vi_epochs: 2500,
            warmup_epochs: 250,
            map_epochs: 2500,
            lr_max: 1e-2,
            lr_min: 1e-6,
            mc_eval_samples: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("hidden_width", self.hidden_width),
            ("vi_epochs", self.vi_epochs),
            ("warmup_epochs", self.warmup_epochs),
            ("map_epochs", self.map_epochs),
            ("mc_eval_samples", self.mc_eval_samples),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::argument(format!("{name} must be at least 1")));
        }
        if self.warmup_epochs > self.vi_epochs {
            return Err(Error::argument(format!(
                "warmup_epochs ({}) exceeds vi_epochs ({})",
                self.warmup_epochs, self.vi_epochs
            )));
        }
        if !(self.lr_min > 0.0 && self.lr_min < self.lr_max && self.lr_max.is_finite()) {
            return Err(Error::argument(format!(
                "learning rates need 0 < lr_min < lr_max, got {} and {}",
                self.lr_min, self.lr_max
            )));
        }
        Ok(())
    }
}
