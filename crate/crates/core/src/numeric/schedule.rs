use std::f64::consts::PI;

use crate::{Error, Result};

/// Cosine annealing from `lr_max` at epoch 0 down to `lr_min` at
/// `total_epochs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineSchedule {
    pub lr_max: f64,
    pub lr_min: f64,
    pub total_epochs: usize,
}

impl CosineSchedule {
    pub fn new(lr_max: f64, lr_min: f64, total_epochs: usize) -> Result<Self> {
        if !(lr_min > 0.0 && lr_min <= lr_max && lr_max.is_finite()) {
            return Err(Error::argument(format!(
                "cosine schedule needs 0 < lr_min <= lr_max, got {lr_min}, {lr_max}"
            )));
        }
        if total_epochs == 0 {
            return Err(Error::argument("cosine schedule needs total_epochs >= 1"));
        }
        Ok(Self {
            lr_max,
            lr_min,
            total_epochs,
        })
    }

    /// Learning rate at epoch `t`, `0 <= t <= total_epochs`.
    pub fn lr(&self, t: usize) -> Result<f64> {
        if t > self.total_epochs {
            return Err(Error::argument(format!(
                "epoch {t} outside schedule of {} epochs",
                self.total_epochs
            )));
        }
        // Endpoints are pinned so they hold exactly, not up to rounding.
        if t == 0 {
            return Ok(self.lr_max);
        }
        if t == self.total_epochs {
            return Ok(self.lr_min);
        }
        let phase = PI * t as f64 / self.total_epochs as f64;
        let lr = self.lr_min + 0.5 * (self.lr_max - self.lr_min) * (1.0 + phase.cos());
        Ok(lr.clamp(self.lr_min, self.lr_max))
    }
}
