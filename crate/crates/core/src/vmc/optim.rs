use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    /// Learning rate reached at `decay_steps` by cosine decay.
    pub lr_final: f64,
    pub decay_steps: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Multiplier on the learning rate of the phase-network parameters.
    pub phase_lr_scale: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            lr_final: 1e-4,
            decay_steps: 10_000,
            beta1: 0.9,
            beta2: 0.99,
            eps: 1e-8,
            phase_lr_scale: 1.0,
        }
    }
}

impl AdamConfig {
    pub fn constant(lr: f64) -> Self {
        Self {
            lr,
            lr_final: lr,
            ..Self::default()
        }
    }

    pub fn lr_at(&self, step: u64) -> f64 {
        if self.decay_steps == 0 {
            return self.lr_final;
        }
        let t = (step.min(self.decay_steps) as f64) / self.decay_steps as f64;
        self.lr_final + 0.5 * (self.lr - self.lr_final) * (1.0 + (std::f64::consts::PI * t).cos())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub config: AdamConfig,
}

impl OptimizerState {
    pub fn new(n_params: usize, config: AdamConfig) -> Self {
        Self {
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            config,
        }
    }

    pub fn current_lr(&self) -> f64 {
        self.config.lr_at(self.step)
    }
}

/// `optimizer_step`: one bias-corrected Adam update of `ansatz` along `-g`.
pub fn optimizer_step(opt: &mut OptimizerState, ansatz: &mut Ansatz, g: &[f64]) -> Result<()> {
    let n = ansatz.n_params();
    if g.len() != n || opt.m.len() != n {
        return Err(Error::Argument(format!(
            "gradient length {} / moments {} / parameters {n}",
            g.len(),
            opt.m.len()
        )));
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        let bad = g.iter().filter(|v| !v.is_finite()).count();
        return Err(Error::Training(format!(
            "non-finite gradient at step {}: {bad} components, first at index {i} ({})",
            opt.step, g[i]
        )));
    }
    let c = opt.config;
    let lr = c.lr_at(opt.step);
    opt.step += 1;
    let b1 = 1.0 - c.beta1.powi(opt.step as i32);
    let b2 = 1.0 - c.beta2.powi(opt.step as i32);
    let amp_len = ansatz.amplitude_param_count();
    let p = ansatz.params_mut();
    for i in 0..n {
        let lr = if i < amp_len { lr } else { lr * c.phase_lr_scale };
        opt.m[i] = c.beta1 * opt.m[i] + (1.0 - c.beta1) * g[i];
        opt.v[i] = c.beta2 * opt.v[i] + (1.0 - c.beta2) * g[i] * g[i];
        let mh = opt.m[i] / b1;
        let vh = opt.v[i] / b2;
        p[i] -= lr * mh / (vh.sqrt() + c.eps);
    }
    Ok(())
}
