//! Finite-difference verification of the analytic gradients.
//!
//! Perturbs every parameter coordinate by ±ε on a random two-example batch
//! and compares the central difference against `backward`. The relative
//! error denominator is floored at 1e-3 so coordinates with near-zero
//! gradients do not drown in finite-difference round-off.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::net::{backward_serial, batch_total_loss};
use super::{init_params, ModelConfig, TrainExample};
use crate::embed::TokenSequence;
use crate::error::{Error, Result};

/// Relative-error denominator floor.
const DENOM_FLOOR: f64 = 1e-3;

fn random_example(cfg: &ModelConfig, rng: &mut ChaCha12Rng, id: usize) -> TrainExample {
    // Random real length in 1..=n keeps mask handling on the checked path.
    let real_len = rng.random_range(1..=cfg.seq_len);
    let mut tokens = Vec::with_capacity(cfg.seq_len);
    let mut mask = Vec::with_capacity(cfg.seq_len);
    for pos in 0..cfg.seq_len {
        if pos < real_len {
            tokens.push((0..cfg.embed_dim).map(|_| rng.random_range(-1.0..1.0)).collect());
            mask.push(true);
        } else {
            tokens.push(vec![0.0; cfg.embed_dim]);
            mask.push(false);
        }
    }
    TrainExample {
        id: format!("gc{id}"),
        seq: TokenSequence { tokens, mask },
        theme: Some(rng.random_range(0..cfg.theme_classes)),
        mf: Some(rng.random_range(0..cfg.mf_classes)),
    }
}

/// Max relative error between analytic and central-difference gradients
/// over every parameter coordinate. Requires dropout 0 (the objective must
/// be deterministic for differencing).
pub fn grad_check(cfg: &ModelConfig, seed: u64, epsilon: f64) -> Result<f64> {
    cfg.validate()?;
    if cfg.dropout != 0.0 {
        return Err(Error::invalid("grad_check requires dropout = 0"));
    }
    if epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = init_params(cfg, seed)?;
    let batch: Vec<TrainExample> = (0..2).map(|i| random_example(cfg, &mut rng, i)).collect();

    let (grads, _) = backward_serial(&params, cfg, &batch, cfg.gamma, None)?;
    let analytic = grads.flatten();
    let theta = params.flatten();

    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for k in 0..theta.len() {
        let mut plus = theta.clone();
        plus[k] += epsilon;
        probe.unflatten_from(&plus);
        let loss_plus = batch_total_loss(&probe, cfg, &batch, cfg.gamma)?;
        let mut minus = theta.clone();
        minus[k] -= epsilon;
        probe.unflatten_from(&minus);
        let loss_minus = batch_total_loss(&probe, cfg, &batch, cfg.gamma)?;
        let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
        let denom = (analytic[k].abs() + numeric.abs()).max(DENOM_FLOOR);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    Ok(worst)
}
