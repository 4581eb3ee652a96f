//! Two-head Bi-LSTM text classifier.
//!
//! A bidirectional LSTM encodes the token sequence; the per-position states
//! are mean-pooled over real (unmasked) positions; two ReLU heads produce
//! task representations; linear + softmax layers emit the theme and
//! moral-framing distributions. The training objective is the sum of both
//! cross-entropies plus an L2 penalty, minimized with Adam. Gradients are
//! exact reverse-mode and checked against central finite differences.
//!
//! All math is `f64`. Everything is deterministic given a seed; batch
//! gradients computed in parallel reduce in example order, so they are
//! bit-identical to the sequential path.

mod adam;
mod checkpoint;
mod gradcheck;
mod net;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use gradcheck::grad_check;
pub use net::{
    argmax, backward, backward_serial, batch_data_loss, batch_total_loss, forward, joint_loss,
    predict, predict_indices, ForwardTrace, LossReport,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Hyperparameters and tensor shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Token sequence length n.
    pub seq_len: usize,
    /// Token embedding dimension.
    pub embed_dim: usize,
    /// Per-direction LSTM hidden dimension.
    pub hidden_dim: usize,
    /// Task representation dimension.
    pub repr_dim: usize,
    pub theme_classes: usize,
    pub mf_classes: usize,
    pub dropout: f64,
    /// L2 coefficient.
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early-stopping patience in epochs.
    pub patience: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            seq_len: 100,
            embed_dim: 768,
            hidden_dim: 256,
            repr_dim: 128,
            theme_classes: 15,
            mf_classes: 7,
            dropout: 0.2,
            gamma: 1e-5,
            lr: 0.001,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("seq_len", self.seq_len),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("repr_dim", self.repr_dim),
            ("theme_classes", self.theme_classes),
            ("mf_classes", self.mf_classes),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must be in [0, 1)"));
        }
        if self.gamma < 0.0 {
            return Err(Error::invalid("gamma must be nonnegative"));
        }
        Ok(())
    }

    /// A small configuration for tests and gradient checking.
    pub fn toy() -> ModelConfig {
        ModelConfig {
            seq_len: 3,
            embed_dim: 4,
            hidden_dim: 3,
            repr_dim: 3,
            theme_classes: 4,
            mf_classes: 3,
            dropout: 0.0,
            gamma: 1e-4,
            lr: 0.01,
            batch_size: 4,
            max_epochs: 20,
            patience: 5,
            seed: 0,
        }
    }
}

/// Gate parameters for one LSTM direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirParams {
    pub w_input: Mat,
    pub w_forget: Mat,
    pub w_cell: Mat,
    pub w_output: Mat,
    pub u_input: Mat,
    pub u_forget: Mat,
    pub u_cell: Mat,
    pub u_output: Mat,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_cell: Vec<f64>,
    pub b_output: Vec<f64>,
}

impl LstmDirParams {
    fn zeros(cfg: &ModelConfig) -> Self {
        let h = cfg.hidden_dim;
        let e = cfg.embed_dim;
        LstmDirParams {
            w_input: Mat::zeros(h, e),
            w_forget: Mat::zeros(h, e),
            w_cell: Mat::zeros(h, e),
            w_output: Mat::zeros(h, e),
            u_input: Mat::zeros(h, h),
            u_forget: Mat::zeros(h, h),
            u_cell: Mat::zeros(h, h),
            u_output: Mat::zeros(h, h),
            b_input: vec![0.0; h],
            b_forget: vec![0.0; h],
            b_cell: vec![0.0; h],
            b_output: vec![0.0; h],
        }
    }
}

/// All trainable tensors. Gradients reuse this type (same shapes).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub lstm_fwd: LstmDirParams,
    pub lstm_bwd: LstmDirParams,
    pub w_r_theme: Mat,
    pub b_r_theme: Vec<f64>,
    pub w_r_mf: Mat,
    pub b_r_mf: Vec<f64>,
    pub w_o_theme: Mat,
    pub b_o_theme: Vec<f64>,
    pub w_o_mf: Mat,
    pub b_o_mf: Vec<f64>,
}

pub type Gradients = ModelParams;

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        ModelParams {
            lstm_fwd: LstmDirParams::zeros(cfg),
            lstm_bwd: LstmDirParams::zeros(cfg),
            w_r_theme: Mat::zeros(cfg.repr_dim, 2 * cfg.hidden_dim),
            b_r_theme: vec![0.0; cfg.repr_dim],
            w_r_mf: Mat::zeros(cfg.repr_dim, 2 * cfg.hidden_dim),
            b_r_mf: vec![0.0; cfg.repr_dim],
            w_o_theme: Mat::zeros(cfg.theme_classes, cfg.repr_dim),
            b_o_theme: vec![0.0; cfg.theme_classes],
            w_o_mf: Mat::zeros(cfg.mf_classes, cfg.repr_dim),
            b_o_mf: vec![0.0; cfg.mf_classes],
        }
    }

    /// Tensors in declared order with stable names.
    pub fn tensors(&self) -> Vec<(String, &Vec<f64>)> {
        let mut out: Vec<(String, &Vec<f64>)> = Vec::with_capacity(32);
        for (dir, prefix) in [(&self.lstm_fwd, "lstm_fwd"), (&self.lstm_bwd, "lstm_bwd")] {
            out.push((format!("{prefix}.w_input"), &dir.w_input.data));
            out.push((format!("{prefix}.w_forget"), &dir.w_forget.data));
            out.push((format!("{prefix}.w_cell"), &dir.w_cell.data));
            out.push((format!("{prefix}.w_output"), &dir.w_output.data));
            out.push((format!("{prefix}.u_input"), &dir.u_input.data));
            out.push((format!("{prefix}.u_forget"), &dir.u_forget.data));
            out.push((format!("{prefix}.u_cell"), &dir.u_cell.data));
            out.push((format!("{prefix}.u_output"), &dir.u_output.data));
            out.push((format!("{prefix}.b_input"), &dir.b_input));
            out.push((format!("{prefix}.b_forget"), &dir.b_forget));
            out.push((format!("{prefix}.b_cell"), &dir.b_cell));
            out.push((format!("{prefix}.b_output"), &dir.b_output));
        }
        out.push(("w_r_theme".into(), &self.w_r_theme.data));
        out.push(("b_r_theme".into(), &self.b_r_theme));
        out.push(("w_r_mf".into(), &self.w_r_mf.data));
        out.push(("b_r_mf".into(), &self.b_r_mf));
        out.push(("w_o_theme".into(), &self.w_o_theme.data));
        out.push(("b_o_theme".into(), &self.b_o_theme));
        out.push(("w_o_mf".into(), &self.w_o_mf.data));
        out.push(("b_o_mf".into(), &self.b_o_mf));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Vec<f64>)> {
        let mut out: Vec<(String, &mut Vec<f64>)> = Vec::with_capacity(32);
        let (fwd, bwd) = (&mut self.lstm_fwd, &mut self.lstm_bwd);
        for (dir, prefix) in [(fwd, "lstm_fwd"), (bwd, "lstm_bwd")] {
            out.push((format!("{prefix}.w_input"), &mut dir.w_input.data));
            out.push((format!("{prefix}.w_forget"), &mut dir.w_forget.data));
            out.push((format!("{prefix}.w_cell"), &mut dir.w_cell.data));
            out.push((format!("{prefix}.w_output"), &mut dir.w_output.data));
            out.push((format!("{prefix}.u_input"), &mut dir.u_input.data));
            out.push((format!("{prefix}.u_forget"), &mut dir.u_forget.data));
            out.push((format!("{prefix}.u_cell"), &mut dir.u_cell.data));
            out.push((format!("{prefix}.u_output"), &mut dir.u_output.data));
            out.push((format!("{prefix}.b_input"), &mut dir.b_input));
            out.push((format!("{prefix}.b_forget"), &mut dir.b_forget));
            out.push((format!("{prefix}.b_cell"), &mut dir.b_cell));
            out.push((format!("{prefix}.b_output"), &mut dir.b_output));
        }
        out.push(("w_r_theme".into(), &mut self.w_r_theme.data));
        out.push(("b_r_theme".into(), &mut self.b_r_theme));
        out.push(("w_r_mf".into(), &mut self.w_r_mf.data));
        out.push(("b_r_mf".into(), &mut self.b_r_mf));
        out.push(("w_o_theme".into(), &mut self.w_o_theme.data));
        out.push(("b_o_theme".into(), &mut self.b_o_theme));
        out.push(("w_o_mf".into(), &mut self.w_o_mf.data));
        out.push(("b_o_mf".into(), &mut self.b_o_mf));
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for (_, t) in self.tensors() {
            flat.extend_from_slice(t);
        }
        flat
    }

    pub fn unflatten_from(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for (_, t) in self.tensors_mut() {
            let len = t.len();
            t.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        debug_assert_eq!(offset, flat.len());
    }

    /// Σ θ², the L2 term of the objective.
    pub fn l2_norm_sq(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|(_, t)| t.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// self += scale * other, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        let mut mine = self.tensors_mut();
        let theirs = other.tensors();
        for ((_, a), (_, b)) in mine.iter_mut().zip(theirs.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y * scale;
            }
        }
    }

    /// Zeroes encoder (both LSTM directions) tensors; used to freeze the
    /// encoder by blanking its gradients in two-stage fine-tuning.
    pub fn zero_encoder(&mut self) {
        for (name, t) in self.tensors_mut() {
            if name.starts_with("lstm_") {
                t.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    /// Flat vector of just the encoder tensors (freeze assertions).
    pub fn encoder_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (name, t) in self.tensors() {
            if name.starts_with("lstm_") {
                out.extend_from_slice(t);
            }
        }
        out
    }
}

fn fill_uniform(rng: &mut ChaCha12Rng, data: &mut [f64], fan_in: usize) {
    let bound = (1.0 / fan_in as f64).sqrt();
    for v in data.iter_mut() {
        *v = rng.random_range(-bound..bound);
    }
}

/// Initializes parameters: weights uniform(−√(1/fan_in), √(1/fan_in)),
/// biases zero except the LSTM forget-gate bias which is 1. Deterministic
/// given the seed.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> Result<ModelParams> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(cfg);
    for dir in [&mut params.lstm_fwd, &mut params.lstm_bwd] {
        for w in [
            &mut dir.w_input,
            &mut dir.w_forget,
            &mut dir.w_cell,
            &mut dir.w_output,
        ] {
            fill_uniform(&mut rng, &mut w.data, cfg.embed_dim);
        }
        for u in [
            &mut dir.u_input,
            &mut dir.u_forget,
            &mut dir.u_cell,
            &mut dir.u_output,
        ] {
            fill_uniform(&mut rng, &mut u.data, cfg.hidden_dim);
        }
        dir.b_forget.iter_mut().for_each(|v| *v = 1.0);
    }
    fill_uniform(&mut rng, &mut params.w_r_theme.data, 2 * cfg.hidden_dim);
    fill_uniform(&mut rng, &mut params.w_r_mf.data, 2 * cfg.hidden_dim);
    fill_uniform(&mut rng, &mut params.w_o_theme.data, cfg.repr_dim);
    fill_uniform(&mut rng, &mut params.w_o_mf.data, cfg.repr_dim);
    Ok(params)
}

/// One training example: a token sequence plus optional per-task class
/// indices. `None` masks the example out of that task's loss.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub id: String,
    pub seq: crate::embed::TokenSequence,
    pub theme: Option<usize>,
    pub mf: Option<usize>,
}

impl TrainExample {
    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        if self.seq.len() != cfg.seq_len {
            return Err(Error::invalid(format!(
                "example '{}' has sequence length {}, config wants {}",
                self.id,
                self.seq.len(),
                cfg.seq_len
            )));
        }
        if let Some(t) = self.theme {
            if t >= cfg.theme_classes {
                return Err(Error::invalid(format!(
                    "example '{}' theme index {t} out of range",
                    self.id
                )));
            }
        }
        if let Some(m) = self.mf {
            if m >= cfg.mf_classes {
                return Err(Error::invalid(format!(
                    "example '{}' mf index {m} out of range",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Splitmix-style mix for deriving per-example dropout streams.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
