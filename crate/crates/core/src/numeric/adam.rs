use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam optimizer state over a flat parameter vector.
///
/// The vector may be partitioned into named blocks so that a non-finite
/// gradient can be reported against the block it came from.
#[derive(Clone, Debug)]
pub struct Adam {
    config: AdamConfig,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    blocks: Vec<(String, usize)>,
}

impl Adam {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self::with_blocks(&[("params", len)], config)
    }

    /// State for a parameter vector made of consecutive named blocks.
    pub fn with_blocks<S: AsRef<str>>(blocks: &[(S, usize)], config: AdamConfig) -> Self {
        let len = blocks.iter().map(|(_, n)| n).sum();
        Self {
            config,
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
            blocks: blocks
                .iter()
                .map(|(name, n)| (name.as_ref().to_string(), *n))
                .collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    fn block_of(&self, index: usize) -> (&str, usize) {
        let mut start = 0;
        for (name, n) in &self.blocks {
            if index < start + n {
                return (name, index - start);
            }
            start += n;
        }
        ("params", index)
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::argument(format!(
                "adam: {} params, {} grads, state of {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::argument(format!("adam: learning rate {lr}")));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            let (block, offset) = self.block_of(i);
            return Err(Error::numeric(format!("gradient of {block}[{offset}]")));
        }

        let AdamConfig { beta1, beta2, eps } = self.config;
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}
