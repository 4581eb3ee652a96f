//! Adam update with bias correction (β1 = 0.9, β2 = 0.999, ε = 1e-8).
//! Takes parameters and state by reference and returns fresh values.

use super::{Gradients, ModelParams};
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates, flat over the declared tensor order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }
}

/// One Adam step at 1-based step index `t`.
pub fn adam_step(
    params: &ModelParams,
    grads: &Gradients,
    state: &AdamState,
    lr: f64,
    t: u64,
) -> Result<(ModelParams, AdamState)> {
    if t == 0 {
        return Err(Error::invalid("adam step index starts at 1"));
    }
    let theta = params.flatten();
    let g = grads.flatten();
    if theta.len() != g.len() || theta.len() != state.m.len() {
        return Err(Error::invalid("adam: parameter/gradient shape mismatch"));
    }
    let bias1 = 1.0 - BETA1.powi(t as i32);
    let bias2 = 1.0 - BETA2.powi(t as i32);
    let mut new_theta = vec![0.0; theta.len()];
    let mut new_m = vec![0.0; theta.len()];
    let mut new_v = vec![0.0; theta.len()];
    for k in 0..theta.len() {
        let m = BETA1 * state.m[k] + (1.0 - BETA1) * g[k];
        let v = BETA2 * state.v[k] + (1.0 - BETA2) * g[k] * g[k];
        let m_hat = m / bias1;
        let v_hat = v / bias2;
        new_theta[k] = theta[k] - lr * m_hat / (v_hat.sqrt() + EPSILON);
        new_m[k] = m;
        new_v[k] = v;
    }
    let mut out = params.clone();
    out.unflatten_from(&new_theta);
    Ok((out, AdamState { m: new_m, v: new_v }))
}
