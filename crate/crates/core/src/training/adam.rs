use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::encoder::{EncoderWeights, TENSOR_NAMES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one buffer per encoder tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(weights: &EncoderWeights) -> Self {
        let zeros: Vec<Vec<f64>> = weights.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn matches(&self, weights: &EncoderWeights) -> bool {
        let t = weights.tensors();
        self.m.len() == t.len()
            && self.v.len() == t.len()
            && t.iter().zip(&self.m).zip(&self.v).all(|((t, m), v)| t.len() == m.len() && t.len() == v.len())
    }
}

/// One bias-corrected Adam update on a flat buffer at step `t` (1-based).
pub fn adam_update(theta: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// Apply one Adam step to every tensor. Non-finite gradients abort before
/// any parameter is touched.
pub fn adam_step(
    weights: &mut EncoderWeights,
    grads: &EncoderWeights,
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<(), TrainError> {
    for (name, g) in TENSOR_NAMES.iter().zip(grads.tensors()) {
        if !g.iter().all(|x| x.is_finite()) {
            return Err(TrainError::NonFiniteGradient { tensor: name });
        }
    }
    if !state.matches(weights) || weights.dims() != grads.dims() {
        return Err(TrainError::Config("optimizer state does not match encoder shape".into()));
    }
    state.step += 1;
    let t = state.step;
    for (((theta, g), m), v) in weights
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        adam_update(theta, g, m, v, t, cfg);
    }
    Ok(())
}
