//! Forward pass, losses, exact reverse-mode gradients, and prediction.
//!
//! The recurrence runs over the real (unmasked) token prefix only; pad
//! positions keep zero hidden rows and are excluded from pooling. An all-pad
//! input pools to the zero vector. Dropout (inverted scaling) applies to the
//! pooled vector and both task representations, only in train mode.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{mix_seed, Gradients, LstmDirParams, ModelConfig, ModelParams, TrainExample};
use crate::corpus::{MfLabel, Theme};
use crate::embed::TokenSequence;
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::Mat;

/// Public view of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input token embeddings, length n (pad rows zero).
    pub token_embeddings: Vec<Vec<f64>>,
    /// Contextual states h_i (2·hidden each), pad rows zero.
    pub hidden: Vec<Vec<f64>>,
    /// Masked mean of `hidden` over real positions.
    pub pooled: Vec<f64>,
    pub r_theme: Vec<f64>,
    pub r_mf: Vec<f64>,
    pub p_theme: Vec<f64>,
    pub p_mf: Vec<f64>,
}

/// Loss decomposition: total = l_theme + l_mf + gamma·l2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossReport {
    pub l_theme: f64,
    pub l_mf: f64,
    /// Squared parameter norm Σθ².
    pub l2: f64,
    pub total: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step LSTM activations kept for backprop, in step order.
struct DirCache {
    gate_i: Vec<Vec<f64>>,
    gate_f: Vec<Vec<f64>>,
    gate_g: Vec<Vec<f64>>,
    gate_o: Vec<Vec<f64>>,
    cell: Vec<Vec<f64>>,
    tanh_cell: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
}

impl DirCache {
    fn with_capacity(n: usize) -> Self {
        DirCache {
            gate_i: Vec::with_capacity(n),
            gate_f: Vec::with_capacity(n),
            gate_g: Vec::with_capacity(n),
            gate_o: Vec::with_capacity(n),
            cell: Vec::with_capacity(n),
            tanh_cell: Vec::with_capacity(n),
            hidden: Vec::with_capacity(n),
        }
    }
}

fn lstm_run(
    p: &LstmDirParams,
    inputs: impl Iterator<Item = usize>,
    seq: &TokenSequence,
    hidden_dim: usize,
) -> DirCache {
    let mut cache = DirCache::with_capacity(seq.len());
    let mut h_prev = vec![0.0; hidden_dim];
    let mut c_prev = vec![0.0; hidden_dim];
    for pos in inputs {
        let x = &seq.tokens[pos];
        let mut a_i = p.w_input.matvec(x);
        let mut a_f = p.w_forget.matvec(x);
        let mut a_g = p.w_cell.matvec(x);
        let mut a_o = p.w_output.matvec(x);
        let r_i = p.u_input.matvec(&h_prev);
        let r_f = p.u_forget.matvec(&h_prev);
        let r_g = p.u_cell.matvec(&h_prev);
        let r_o = p.u_output.matvec(&h_prev);
        let mut c = vec![0.0; hidden_dim];
        let mut tanh_c = vec![0.0; hidden_dim];
        let mut h = vec![0.0; hidden_dim];
        for k in 0..hidden_dim {
            a_i[k] = sigmoid(a_i[k] + r_i[k] + p.b_input[k]);
            a_f[k] = sigmoid(a_f[k] + r_f[k] + p.b_forget[k]);
            a_g[k] = (a_g[k] + r_g[k] + p.b_cell[k]).tanh();
            a_o[k] = sigmoid(a_o[k] + r_o[k] + p.b_output[k]);
            c[k] = a_f[k] * c_prev[k] + a_i[k] * a_g[k];
            tanh_c[k] = c[k].tanh();
            h[k] = a_o[k] * tanh_c[k];
        }
        cache.gate_i.push(a_i);
        cache.gate_f.push(a_f);
        cache.gate_g.push(a_g);
        cache.gate_o.push(a_o);
        cache.cell.push(c.clone());
        cache.tanh_cell.push(tanh_c);
        cache.hidden.push(h.clone());
        h_prev = h;
        c_prev = c;
    }
    cache
}

/// Multiplicative inverted-dropout mask: 0 with probability `rate`,
/// 1/(1−rate) otherwise.
fn dropout_mask(len: usize, rate: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let keep_scale = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep_scale
            }
        })
        .collect()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        Err(Error::non_finite(name))
    } else {
        Ok(())
    }
}

/// Everything backward needs beyond the public trace.
struct ForwardCache {
    real_len: usize,
    fwd: DirCache,
    bwd: DirCache,
    /// Pooled vector after dropout (head input).
    pooled_dropped: Vec<f64>,
    pooled_mask: Option<Vec<f64>>,
    r_theme_pre: Vec<f64>,
    r_theme_dropped: Vec<f64>,
    r_theme_mask: Option<Vec<f64>>,
    r_mf_pre: Vec<f64>,
    r_mf_dropped: Vec<f64>,
    r_mf_mask: Option<Vec<f64>>,
}

fn forward_cached(
    params: &ModelParams,
    cfg: &ModelConfig,
    seq: &TokenSequence,
    train_mode: bool,
    rng: &mut ChaCha12Rng,
) -> Result<(ForwardTrace, ForwardCache)> {
    if seq.len() != cfg.seq_len {
        return Err(Error::invalid(format!(
            "sequence length {} does not match config n = {}",
            seq.len(),
            cfg.seq_len
        )));
    }
    let h_dim = cfg.hidden_dim;
    let real_len = seq.real_len();
    debug_assert!(seq.mask[..real_len].iter().all(|&m| m));

    let fwd = lstm_run(&params.lstm_fwd, 0..real_len, seq, h_dim);
    let bwd = lstm_run(&params.lstm_bwd, (0..real_len).rev(), seq, h_dim);

    // H: pad rows stay zero. Backward step s consumed position L−1−s.
    let mut hidden = vec![vec![0.0; 2 * h_dim]; seq.len()];
    for pos in 0..real_len {
        hidden[pos][..h_dim].copy_from_slice(&fwd.hidden[pos]);
        hidden[pos][h_dim..].copy_from_slice(&bwd.hidden[real_len - 1 - pos]);
        check_finite("bilstm", &hidden[pos])?;
    }

    let mut pooled = vec![0.0; 2 * h_dim];
    if real_len > 0 {
        for row in hidden.iter().take(real_len) {
            for (p, v) in pooled.iter_mut().zip(row.iter()) {
                *p += v;
            }
        }
        pooled.iter_mut().for_each(|p| *p /= real_len as f64);
    }
    check_finite("pooling", &pooled)?;

    let use_dropout = train_mode && cfg.dropout > 0.0;
    let (pooled_dropped, pooled_mask) = if use_dropout {
        let mask = dropout_mask(pooled.len(), cfg.dropout, rng);
        let dropped = pooled.iter().zip(mask.iter()).map(|(v, m)| v * m).collect();
        (dropped, Some(mask))
    } else {
        (pooled.clone(), None)
    };

    let head = |w_r: &Mat,
                    b_r: &[f64],
                    name: &str,
                    rng: &mut ChaCha12Rng|
     -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
        let mut pre = w_r.matvec(&pooled_dropped);
        for (p, b) in pre.iter_mut().zip(b_r.iter()) {
            *p += b;
        }
        let r = relu(&pre);
        check_finite(name, &r)?;
        let (dropped, mask) = if use_dropout {
            let mask = dropout_mask(r.len(), cfg.dropout, rng);
            let dropped = r.iter().zip(mask.iter()).map(|(v, m)| v * m).collect();
            (dropped, Some(mask))
        } else {
            (r.clone(), None)
        };
        Ok((pre, r, dropped, mask))
    };

    let (r_theme_pre, r_theme, r_theme_dropped, r_theme_mask) =
        head(&params.w_r_theme, &params.b_r_theme, "theme_head", rng)?;
    let (r_mf_pre, r_mf, r_mf_dropped, r_mf_mask) =
        head(&params.w_r_mf, &params.b_r_mf, "mf_head", rng)?;

    let mut z_theme = params.w_o_theme.matvec(&r_theme_dropped);
    for (z, b) in z_theme.iter_mut().zip(params.b_o_theme.iter()) {
        *z += b;
    }
    let p_theme = softmax(&z_theme);
    check_finite("theme_softmax", &p_theme)?;

    let mut z_mf = params.w_o_mf.matvec(&r_mf_dropped);
    for (z, b) in z_mf.iter_mut().zip(params.b_o_mf.iter()) {
        *z += b;
    }
    let p_mf = softmax(&z_mf);
    check_finite("mf_softmax", &p_mf)?;

    let trace = ForwardTrace {
        token_embeddings: seq.tokens.clone(),
        hidden,
        pooled,
        r_theme: r_theme.clone(),
        r_mf: r_mf.clone(),
        p_theme,
        p_mf,
    };
    let cache = ForwardCache {
        real_len,
        fwd,
        bwd,
        pooled_dropped,
        pooled_mask,
        r_theme_pre,
        r_theme_dropped,
        r_theme_mask,
        r_mf_pre,
        r_mf_dropped,
        r_mf_mask,
    };
    Ok((trace, cache))
}

/// Forward pass. `rng` drives dropout and is only consulted when
/// `train_mode` is set and the configured dropout rate is positive.
pub fn forward(
    params: &ModelParams,
    cfg: &ModelConfig,
    seq: &TokenSequence,
    train_mode: bool,
    rng: &mut ChaCha12Rng,
) -> Result<ForwardTrace> {
    forward_cached(params, cfg, seq, train_mode, rng).map(|(trace, _)| trace)
}

fn is_one_hot(v: &[f64]) -> bool {
    let ones = v.iter().filter(|&&x| x == 1.0).count();
    let zeros = v.iter().filter(|&&x| x == 0.0).count();
    ones == 1 && ones + zeros == v.len()
}

/// Cross-entropy of a distribution against a class index, with the
/// probability floored at 1e-30 and the log floored at −1e9.
fn cross_entropy(p: &[f64], class: usize) -> f64 {
    -(p[class].max(1e-30).ln().max(-1e9))
}

/// Single-example joint loss per the objective decomposition. Gold
/// distributions must be one-hot.
pub fn joint_loss(
    trace: &ForwardTrace,
    theme_onehot: &[f64],
    mf_onehot: &[f64],
    params: &ModelParams,
    gamma: f64,
) -> Result<LossReport> {
    if theme_onehot.len() != trace.p_theme.len() || mf_onehot.len() != trace.p_mf.len() {
        return Err(Error::invalid("gold distribution length mismatch"));
    }
    if !is_one_hot(theme_onehot) || !is_one_hot(mf_onehot) {
        return Err(Error::invalid("gold distributions must be one-hot"));
    }
    let theme_class = theme_onehot.iter().position(|&x| x == 1.0).unwrap();
    let mf_class = mf_onehot.iter().position(|&x| x == 1.0).unwrap();
    let l_theme = cross_entropy(&trace.p_theme, theme_class);
    let l_mf = cross_entropy(&trace.p_mf, mf_class);
    let l2 = params.l2_norm_sq();
    Ok(LossReport {
        l_theme,
        l_mf,
        l2,
        total: l_theme + l_mf + gamma * l2,
    })
}

/// Per-task mean cross-entropy over the examples carrying each task's label
/// (dropout off). Tasks with no labeled example contribute 0.
pub fn batch_data_loss(
    params: &ModelParams,
    cfg: &ModelConfig,
    batch: &[TrainExample],
) -> Result<(f64, f64)> {
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let mut theme_sum = 0.0;
    let mut theme_n = 0usize;
    let mut mf_sum = 0.0;
    let mut mf_n = 0usize;
    for ex in batch {
        let trace = forward(params, cfg, &ex.seq, false, &mut rng)?;
        if let Some(t) = ex.theme {
            theme_sum += cross_entropy(&trace.p_theme, t);
            theme_n += 1;
        }
        if let Some(m) = ex.mf {
            mf_sum += cross_entropy(&trace.p_mf, m);
            mf_n += 1;
        }
    }
    let l_theme = if theme_n > 0 {
        theme_sum / theme_n as f64
    } else {
        0.0
    };
    let l_mf = if mf_n > 0 { mf_sum / mf_n as f64 } else { 0.0 };
    Ok((l_theme, l_mf))
}

/// Batch-mean total objective including the L2 term.
pub fn batch_total_loss(
    params: &ModelParams,
    cfg: &ModelConfig,
    batch: &[TrainExample],
    gamma: f64,
) -> Result<f64> {
    let (l_theme, l_mf) = batch_data_loss(params, cfg, batch)?;
    Ok(l_theme + l_mf + gamma * params.l2_norm_sq())
}

/// BPTT through one direction. `dh_out[s]` is the outside gradient on the
/// step-s hidden state; positions map through `pos_of` back to the sequence.
#[allow(clippy::too_many_arguments)]
fn lstm_backward(
    p: &LstmDirParams,
    g: &mut LstmDirParams,
    cache: &DirCache,
    seq: &TokenSequence,
    pos_of: impl Fn(usize) -> usize,
    dh_out: &[Vec<f64>],
    hidden_dim: usize,
) {
    let steps = cache.hidden.len();
    let mut dh_carry = vec![0.0; hidden_dim];
    let mut dc_carry = vec![0.0; hidden_dim];
    for s in (0..steps).rev() {
        let x = &seq.tokens[pos_of(s)];
        let h_prev = if s > 0 {
            cache.hidden[s - 1].as_slice()
        } else {
            &[]
        };
        let c_prev = if s > 0 {
            cache.cell[s - 1].as_slice()
        } else {
            &[]
        };
        let (gi, gf, gg, go) = (
            &cache.gate_i[s],
            &cache.gate_f[s],
            &cache.gate_g[s],
            &cache.gate_o[s],
        );
        let tanh_c = &cache.tanh_cell[s];
        let mut da_i = vec![0.0; hidden_dim];
        let mut da_f = vec![0.0; hidden_dim];
        let mut da_g = vec![0.0; hidden_dim];
        let mut da_o = vec![0.0; hidden_dim];
        let mut dc_next = vec![0.0; hidden_dim];
        for k in 0..hidden_dim {
            let dh = dh_out[s][k] + dh_carry[k];
            let dc = dc_carry[k] + dh * go[k] * (1.0 - tanh_c[k] * tanh_c[k]);
            da_o[k] = dh * tanh_c[k] * go[k] * (1.0 - go[k]);
            da_i[k] = dc * gg[k] * gi[k] * (1.0 - gi[k]);
            da_g[k] = dc * gi[k] * (1.0 - gg[k] * gg[k]);
            let cp = if s > 0 { c_prev[k] } else { 0.0 };
            da_f[k] = dc * cp * gf[k] * (1.0 - gf[k]);
            dc_next[k] = dc * gf[k];
        }
        g.b_input.iter_mut().zip(&da_i).for_each(|(b, d)| *b += d);
        g.b_forget.iter_mut().zip(&da_f).for_each(|(b, d)| *b += d);
        g.b_cell.iter_mut().zip(&da_g).for_each(|(b, d)| *b += d);
        g.b_output.iter_mut().zip(&da_o).for_each(|(b, d)| *b += d);
        g.w_input.add_outer(&da_i, x, 1.0);
        g.w_forget.add_outer(&da_f, x, 1.0);
        g.w_cell.add_outer(&da_g, x, 1.0);
        g.w_output.add_outer(&da_o, x, 1.0);
        if s > 0 {
            g.u_input.add_outer(&da_i, h_prev, 1.0);
            g.u_forget.add_outer(&da_f, h_prev, 1.0);
            g.u_cell.add_outer(&da_g, h_prev, 1.0);
            g.u_output.add_outer(&da_o, h_prev, 1.0);
        }
        let mut dh_prev = p.u_input.matvec_t(&da_i);
        for (dst, v) in dh_prev.iter_mut().zip(p.u_forget.matvec_t(&da_f)) {
            *dst += v;
        }
        for (dst, v) in dh_prev.iter_mut().zip(p.u_cell.matvec_t(&da_g)) {
            *dst += v;
        }
        for (dst, v) in dh_prev.iter_mut().zip(p.u_output.matvec_t(&da_o)) {
            *dst += v;
        }
        dh_carry = dh_prev;
        dc_carry = dc_next;
    }
}

/// Per-example gradients of the (already per-task-scaled) cross-entropies.
/// `theme_scale`/`mf_scale` fold in the 1/|B_task| batch-mean factors.
fn example_backward(
    params: &ModelParams,
    cfg: &ModelConfig,
    ex: &TrainExample,
    theme_scale: f64,
    mf_scale: f64,
    dropout_rng: &mut ChaCha12Rng,
    train_mode: bool,
) -> Result<(Gradients, f64, f64)> {
    let (trace, cache) = forward_cached(params, cfg, &ex.seq, train_mode, dropout_rng)?;
    let mut grads = ModelParams::zeros(cfg);
    let h_dim = cfg.hidden_dim;

    let mut d_pooled_dropped = vec![0.0; 2 * h_dim];
    let mut ce_theme = 0.0;
    let mut ce_mf = 0.0;

    // One head's backward: dz → output layer grads → representation grads →
    // pooled gradient contribution.
    let head_backward = |class: usize,
                             scale: f64,
                             p: &[f64],
                             w_o: &Mat,
                             g_w_o: &mut Mat,
                             g_b_o: &mut Vec<f64>,
                             r_dropped: &[f64],
                             r_pre: &[f64],
                             r_mask: &Option<Vec<f64>>,
                             w_r: &Mat,
                             g_w_r: &mut Mat,
                             g_b_r: &mut Vec<f64>,
                             d_pooled: &mut [f64]| {
        let mut dz: Vec<f64> = p.to_vec();
        dz[class] -= 1.0;
        dz.iter_mut().for_each(|v| *v *= scale);
        g_w_o.add_outer(&dz, r_dropped, 1.0);
        g_b_o.iter_mut().zip(&dz).for_each(|(b, d)| *b += d);
        let mut dr = w_o.matvec_t(&dz);
        if let Some(mask) = r_mask {
            dr.iter_mut().zip(mask.iter()).for_each(|(d, m)| *d *= m);
        }
        for (k, d) in dr.iter_mut().enumerate() {
            if r_pre[k] <= 0.0 {
                *d = 0.0;
            }
        }
        g_w_r.add_outer(&dr, &cache.pooled_dropped, 1.0);
        g_b_r.iter_mut().zip(&dr).for_each(|(b, d)| *b += d);
        for (dst, v) in d_pooled.iter_mut().zip(w_r.matvec_t(&dr)) {
            *dst += v;
        }
    };

    if let Some(class) = ex.theme {
        ce_theme = cross_entropy(&trace.p_theme, class);
        head_backward(
            class,
            theme_scale,
            &trace.p_theme,
            &params.w_o_theme,
            &mut grads.w_o_theme,
            &mut grads.b_o_theme,
            &cache.r_theme_dropped,
            &cache.r_theme_pre,
            &cache.r_theme_mask,
            &params.w_r_theme,
            &mut grads.w_r_theme,
            &mut grads.b_r_theme,
            &mut d_pooled_dropped,
        );
    }
    if let Some(class) = ex.mf {
        ce_mf = cross_entropy(&trace.p_mf, class);
        head_backward(
            class,
            mf_scale,
            &trace.p_mf,
            &params.w_o_mf,
            &mut grads.w_o_mf,
            &mut grads.b_o_mf,
            &cache.r_mf_dropped,
            &cache.r_mf_pre,
            &cache.r_mf_mask,
            &params.w_r_mf,
            &mut grads.w_r_mf,
            &mut grads.b_r_mf,
            &mut d_pooled_dropped,
        );
    }

    let real_len = cache.real_len;
    if real_len > 0 {
        let mut d_pooled = d_pooled_dropped;
        if let Some(mask) = &cache.pooled_mask {
            d_pooled.iter_mut().zip(mask.iter()).for_each(|(d, m)| *d *= m);
        }
        let inv_len = 1.0 / real_len as f64;
        // Mean pooling spreads the gradient evenly over real positions;
        // split the 2h vector into per-direction step-space gradients.
        let dh_fwd: Vec<Vec<f64>> = (0..real_len)
            .map(|_| d_pooled[..h_dim].iter().map(|v| v * inv_len).collect())
            .collect();
        let dh_bwd: Vec<Vec<f64>> = (0..real_len)
            .map(|_| d_pooled[h_dim..].iter().map(|v| v * inv_len).collect())
            .collect();
        lstm_backward(
            &params.lstm_fwd,
            &mut grads.lstm_fwd,
            &cache.fwd,
            &ex.seq,
            |s| s,
            &dh_fwd,
            h_dim,
        );
        lstm_backward(
            &params.lstm_bwd,
            &mut grads.lstm_bwd,
            &cache.bwd,
            &ex.seq,
            |s| real_len - 1 - s,
            &dh_bwd,
            h_dim,
        );
    }
    Ok((grads, ce_theme, ce_mf))
}

fn backward_impl(
    params: &ModelParams,
    cfg: &ModelConfig,
    batch: &[TrainExample],
    gamma: f64,
    dropout_seed: Option<u64>,
    serial: bool,
) -> Result<(Gradients, LossReport)> {
    if batch.is_empty() {
        return Err(Error::invalid("backward on an empty batch"));
    }
    for ex in batch {
        ex.validate(cfg)?;
    }
    let theme_n = batch.iter().filter(|e| e.theme.is_some()).count();
    let mf_n = batch.iter().filter(|e| e.mf.is_some()).count();
    let theme_scale = if theme_n > 0 { 1.0 / theme_n as f64 } else { 0.0 };
    let mf_scale = if mf_n > 0 { 1.0 / mf_n as f64 } else { 0.0 };
    let train_mode = dropout_seed.is_some() && cfg.dropout > 0.0;
    let base_seed = dropout_seed.unwrap_or(0);

    let per_example = |idx: usize, ex: &TrainExample| -> Result<(Gradients, f64, f64)> {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(base_seed, idx as u64));
        example_backward(params, cfg, ex, theme_scale, mf_scale, &mut rng, train_mode)
    };
    let results: Vec<Result<(Gradients, f64, f64)>> = if serial {
        exec::map_indexed_serial(batch, per_example)
    } else {
        exec::map_indexed(batch, per_example)
    };

    // Deterministic reduction in example order.
    let mut grads = ModelParams::zeros(cfg);
    let mut theme_sum = 0.0;
    let mut mf_sum = 0.0;
    for res in results {
        let (g, ce_t, ce_m) = res?;
        grads.add_scaled(&g, 1.0);
        theme_sum += ce_t;
        mf_sum += ce_m;
    }
    grads.add_scaled(params, 2.0 * gamma);
    if !grads.all_finite() {
        return Err(Error::non_finite("gradients"));
    }
    let l_theme = if theme_n > 0 {
        theme_sum / theme_n as f64
    } else {
        0.0
    };
    let l_mf = if mf_n > 0 { mf_sum / mf_n as f64 } else { 0.0 };
    let l2 = params.l2_norm_sq();
    Ok((
        grads,
        LossReport {
            l_theme,
            l_mf,
            l2,
            total: l_theme + l_mf + gamma * l2,
        },
    ))
}

/// Exact gradients of the batch-mean objective (per-task means over the
/// examples labeled for each task, plus 2γθ from the L2 term). Dropout masks
/// are derived per example from `dropout_seed`; pass `None` to train without
/// dropout. Runs example-parallel under the `parallel` feature.
pub fn backward(
    params: &ModelParams,
    cfg: &ModelConfig,
    batch: &[TrainExample],
    gamma: f64,
    dropout_seed: Option<u64>,
) -> Result<(Gradients, LossReport)> {
    backward_impl(params, cfg, batch, gamma, dropout_seed, false)
}

/// Always-sequential twin of [`backward`]; results are bit-identical.
pub fn backward_serial(
    params: &ModelParams,
    cfg: &ModelConfig,
    batch: &[TrainExample],
    gamma: f64,
    dropout_seed: Option<u64>,
) -> Result<(Gradients, LossReport)> {
    backward_impl(params, cfg, batch, gamma, dropout_seed, true)
}

/// Argmax with ties going to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Class predictions plus both distributions. Requires the full 15/7 class
/// layout so indices map onto the label enums.
pub fn predict(
    params: &ModelParams,
    cfg: &ModelConfig,
    seq: &TokenSequence,
) -> Result<(Theme, MfLabel, Vec<f64>, Vec<f64>)> {
    if cfg.theme_classes != Theme::CLASS_COUNT || cfg.mf_classes != MfLabel::CLASS_COUNT {
        return Err(Error::invalid(
            "predict requires the 15-theme / 7-mf class layout",
        ));
    }
    let (t_idx, m_idx, p_theme, p_mf) = predict_indices(params, cfg, seq)?;
    Ok((
        Theme::from_class_index(t_idx).unwrap(),
        MfLabel::from_class_index(m_idx).unwrap(),
        p_theme,
        p_mf,
    ))
}

/// Index-level prediction for arbitrary class counts.
pub fn predict_indices(
    params: &ModelParams,
    cfg: &ModelConfig,
    seq: &TokenSequence,
) -> Result<(usize, usize, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let trace = forward(params, cfg, seq, false, &mut rng)?;
    Ok((
        argmax(&trace.p_theme),
        argmax(&trace.p_mf),
        trace.p_theme,
        trace.p_mf,
    ))
}
