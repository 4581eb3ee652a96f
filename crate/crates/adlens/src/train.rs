//! Supervision strategies: fully supervised, hybrid (gold mixed with weak),
//! and the two two-stage variants (weak pre-training, frozen-encoder
//! fine-tuning). Plus early stopping, evaluation, and repeated runs with a
//! paired t-test.
//!
//! Test-set isolation is enforced structurally: weak examples sharing an ad
//! id with the current test partition are dropped from every training or
//! validation pool, and each run returns the id sets it used so callers can
//! assert the isolation invariant directly.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_indices, Dataset, MfLabel, Theme};
use crate::embed::{token_sequence, EmbedSource};
use crate::error::{Error, Result};
use crate::exec;
use crate::metrics::{classification_metrics, ClassMetrics};
use crate::mtlnet::{
    adam_step, backward, batch_data_loss, init_params, mix_seed, predict_indices, AdamState,
    ModelConfig, ModelParams, TrainExample,
};
use crate::stats::{paired_t, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    FullySupervised,
    Hybrid,
    TwoStage1,
    TwoStage2,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::FullySupervised => "fully_supervised",
            Strategy::Hybrid => "hybrid",
            Strategy::TwoStage1 => "two_stage1",
            Strategy::TwoStage2 => "two_stage2",
        }
    }

    pub fn from_name(s: &str) -> Option<Strategy> {
        match s {
            "fully_supervised" => Some(Strategy::FullySupervised),
            "hybrid" => Some(Strategy::Hybrid),
            "two_stage1" => Some(Strategy::TwoStage1),
            "two_stage2" => Some(Strategy::TwoStage2),
            _ => None,
        }
    }

    pub fn needs_weak(self) -> bool {
        !matches!(self, Strategy::FullySupervised)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    /// Fraction of gold data pooled into hybrid training (rest is test).
    pub gold_mix_fraction: f64,
    /// Fraction of weak data mixed into two-stage variant 2 fine-tuning.
    pub weak_mix_fraction: f64,
    pub split_seed: u64,
    pub model_seed: u64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            strategy: Strategy::Hybrid,
            gold_mix_fraction: 0.30,
            weak_mix_fraction: 0.30,
            split_seed: 1,
            model_seed: 1,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gold_mix_fraction", self.gold_mix_fraction),
            ("weak_mix_fraction", self.weak_mix_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
}

impl From<&ClassMetrics> for TaskMetrics {
    fn from(m: &ClassMetrics) -> Self {
        TaskMetrics {
            accuracy: m.accuracy,
            macro_f1: m.macro_f1,
        }
    }
}

/// Ad ids seen by each phase of a run, for isolation assertions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IdTrace {
    pub train: BTreeSet<String>,
    pub val: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl IdTrace {
    /// True when no test id leaks into train or validation.
    pub fn test_isolated(&self) -> bool {
        self.test.is_disjoint(&self.train) && self.test.is_disjoint(&self.val)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub strategy: Strategy,
    pub theme: TaskMetrics,
    pub mf: TaskMetrics,
    pub theme_detail: ClassMetrics,
    pub mf_detail: ClassMetrics,
    pub epochs_run: usize,
    pub best_val_loss: f64,
    pub val_loss_curve: Vec<f64>,
    /// Trained parameters at the best validation epoch.
    pub checkpoint: ModelParams,
    /// Encoder tensors before fine-tuning (two-stage only): lets callers
    /// assert the freeze contract bit-exactly.
    pub pretrain_encoder: Option<Vec<f64>>,
    pub id_trace: IdTrace,
}

/// Builds train examples from a labeled dataset. Unassigned themes become
/// task-masked (`theme: None`); the mf `None` class is a real class.
pub fn prepare_examples(
    d: &Dataset,
    cfg: &ModelConfig,
    source: &EmbedSource,
) -> Result<Vec<TrainExample>> {
    if cfg.theme_classes != Theme::CLASS_COUNT || cfg.mf_classes != MfLabel::CLASS_COUNT {
        return Err(Error::invalid(
            "prepare_examples requires the 15-theme / 7-mf class layout",
        ));
    }
    if source.dim() != cfg.embed_dim {
        return Err(Error::invalid(format!(
            "embedding dim {} does not match config embed_dim {}",
            source.dim(),
            cfg.embed_dim
        )));
    }
    let labels = d
        .labels
        .as_ref()
        .ok_or_else(|| Error::MissingInput("dataset has no labels".into()))?;
    let mut examples = Vec::new();
    for r in &d.records {
        let Some(label) = labels.get(&r.id) else {
            continue;
        };
        examples.push(TrainExample {
            id: r.id.clone(),
            seq: token_sequence(&r.id, &r.body, cfg.seq_len, source),
            theme: label.theme.class_index(),
            mf: Some(label.mf.class_index()),
        });
    }
    Ok(examples)
}

fn subset(examples: &[TrainExample], idx: &[usize]) -> Vec<TrainExample> {
    idx.iter().map(|&i| examples[i].clone()).collect()
}

fn ids_of(examples: &[TrainExample]) -> BTreeSet<String> {
    examples.iter().map(|e| e.id.clone()).collect()
}

/// Deterministic fraction sample: (selected, rest) index sets.
fn sample_fraction(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let take = (n as f64 * fraction).floor() as usize;
    (idx[..take].to_vec(), idx[take..].to_vec())
}

fn drop_ids(examples: Vec<TrainExample>, banned: &BTreeSet<String>) -> Vec<TrainExample> {
    examples
        .into_iter()
        .filter(|e| !banned.contains(&e.id))
        .collect()
}

struct TrainedModel {
    params: ModelParams,
    epochs_run: usize,
    best_val_loss: f64,
    val_loss_curve: Vec<f64>,
}

/// Epoch loop with shuffled mini-batches, Adam updates, and early stopping
/// on validation loss (joint data loss, no L2 term). Returns the parameters
/// from the best validation epoch.
fn train_loop(
    cfg: &ModelConfig,
    train: &[TrainExample],
    val: &[TrainExample],
    init: ModelParams,
    model_seed: u64,
    freeze_encoder: bool,
) -> Result<TrainedModel> {
    if train.is_empty() {
        return Err(Error::invalid("empty training split"));
    }
    if val.is_empty() {
        return Err(Error::invalid("empty validation split"));
    }
    let batch_size = if train.len() < cfg.batch_size {
        log::warn!(
            "training split ({}) smaller than batch size ({}); using one batch",
            train.len(),
            cfg.batch_size
        );
        train.len()
    } else {
        cfg.batch_size
    };
    let mut params = init;
    let mut state = AdamState::new(params.param_count());
    let mut step: u64 = 0;
    let mut shuffle_rng = ChaCha12Rng::seed_from_u64(mix_seed(model_seed, 0x5u64));
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut best_val = f64::INFINITY;
    let mut best_params = params.clone();
    let mut epochs_since_improvement = 0usize;
    let mut curve = Vec::new();
    let mut epochs_run = 0usize;

    for epoch in 0..cfg.max_epochs {
        epochs_run = epoch + 1;
        order.shuffle(&mut shuffle_rng);
        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let batch: Vec<TrainExample> =
                chunk.iter().map(|&i| train[i].clone()).collect();
            let dropout_seed = mix_seed(model_seed, ((epoch as u64) << 20) | batch_idx as u64);
            let (mut grads, _) = backward(&params, cfg, &batch, cfg.gamma, Some(dropout_seed))?;
            if freeze_encoder {
                grads.zero_encoder();
            }
            step += 1;
            let (p, s) = adam_step(&params, &grads, &state, cfg.lr, step)?;
            params = p;
            state = s;
        }
        let (vt, vm) = batch_data_loss(&params, cfg, val)?;
        let val_loss = vt + vm;
        curve.push(val_loss);
        if val_loss < best_val {
            best_val = val_loss;
            best_params = params.clone();
            epochs_since_improvement = 0;
        } else {
            epochs_since_improvement += 1;
            if epochs_since_improvement >= cfg.patience {
                break;
            }
        }
    }
    Ok(TrainedModel {
        params: best_params,
        epochs_run,
        best_val_loss: best_val,
        val_loss_curve: curve,
    })
}

/// Accuracy and macro-F1 per task on a labeled test set. Predictions run
/// record-parallel; examples missing a task's label are skipped for that
/// task.
pub fn evaluate(
    params: &ModelParams,
    cfg: &ModelConfig,
    test: &[TrainExample],
) -> Result<(ClassMetrics, ClassMetrics)> {
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let preds: Vec<Result<(usize, usize)>> = exec::map(test, |ex| {
        predict_indices(params, cfg, &ex.seq).map(|(t, m, _, _)| (t, m))
    });
    let theme_name = |i: usize| {
        if cfg.theme_classes == Theme::CLASS_COUNT {
            Theme::CLASSES[i].name().to_string()
        } else {
            format!("c{i}")
        }
    };
    let mf_name = |i: usize| {
        if cfg.mf_classes == MfLabel::CLASS_COUNT {
            MfLabel::CLASSES[i].name().to_string()
        } else {
            format!("c{i}")
        }
    };
    let mut theme_pairs = Vec::new();
    let mut mf_pairs = Vec::new();
    for (ex, pred) in test.iter().zip(preds) {
        let (pt, pm) = pred?;
        if let Some(gt) = ex.theme {
            theme_pairs.push((theme_name(gt), theme_name(pt)));
        }
        if let Some(gm) = ex.mf {
            mf_pairs.push((mf_name(gm), mf_name(pm)));
        }
    }
    if theme_pairs.is_empty() || mf_pairs.is_empty() {
        return Err(Error::invalid("test set has no labeled examples"));
    }
    Ok((
        classification_metrics(&theme_pairs),
        classification_metrics(&mf_pairs),
    ))
}

fn finish_run(
    strategy: Strategy,
    cfg: &ModelConfig,
    trained: TrainedModel,
    test: &[TrainExample],
    id_trace: IdTrace,
    pretrain_encoder: Option<Vec<f64>>,
) -> Result<RunResult> {
    let (theme_detail, mf_detail) = evaluate(&trained.params, cfg, test)?;
    Ok(RunResult {
        strategy,
        theme: (&theme_detail).into(),
        mf: (&mf_detail).into(),
        theme_detail,
        mf_detail,
        epochs_run: trained.epochs_run,
        best_val_loss: trained.best_val_loss,
        val_loss_curve: trained.val_loss_curve,
        checkpoint: trained.params,
        pretrain_encoder,
        id_trace,
    })
}

/// Fully supervised baseline: gold 60/20/20, early stopping, test metrics.
pub fn run_fully_supervised(
    gold: &[TrainExample],
    cfg: &ModelConfig,
    scfg: &StrategyConfig,
) -> Result<RunResult> {
    scfg.validate()?;
    let (tr, va, te) = split_indices(gold.len(), (0.6, 0.2, 0.2), scfg.split_seed)?;
    let train = subset(gold, &tr);
    let val = subset(gold, &va);
    let test = subset(gold, &te);
    let trained = train_loop(
        cfg,
        &train,
        &val,
        init_params(cfg, scfg.model_seed)?,
        scfg.model_seed,
        false,
    )?;
    let id_trace = IdTrace {
        train: ids_of(&train),
        val: ids_of(&val),
        test: ids_of(&test),
    };
    finish_run(Strategy::FullySupervised, cfg, trained, &test, id_trace, None)
}

/// Hybrid: `gold_mix_fraction` of gold pooled with all weak examples
/// (minus any sharing an id with the held-out gold test set), 80/20
/// train/val over the shuffled pool, tested on the remaining gold.
pub fn run_hybrid(
    gold: &[TrainExample],
    weak: &[TrainExample],
    cfg: &ModelConfig,
    scfg: &StrategyConfig,
) -> Result<RunResult> {
    scfg.validate()?;
    let (mix_idx, test_idx) =
        sample_fraction(gold.len(), scfg.gold_mix_fraction, scfg.split_seed);
    let test = subset(gold, &test_idx);
    let test_ids = ids_of(&test);
    let mut pool = subset(gold, &mix_idx);
    pool.extend(drop_ids(weak.to_vec(), &test_ids));
    if pool.is_empty() {
        return Err(Error::invalid("hybrid pool is empty"));
    }
    let (tr_idx, va_idx) =
        sample_fraction(pool.len(), 0.8, mix_seed(scfg.split_seed, 0x80));
    let train = subset(&pool, &tr_idx);
    let val = subset(&pool, &va_idx);
    let trained = train_loop(
        cfg,
        &train,
        &val,
        init_params(cfg, scfg.model_seed)?,
        scfg.model_seed,
        false,
    )?;
    let id_trace = IdTrace {
        train: ids_of(&train),
        val: ids_of(&val),
        test: test_ids,
    };
    finish_run(Strategy::Hybrid, cfg, trained, &test, id_trace, None)
}

/// Two-stage: pre-train on weak (80/20), then fine-tune only the task heads
/// with the encoder frozen. Variant 1 fine-tunes on gold train (60/20/20);
/// variant 2 mixes `weak_mix_fraction` of weak into the gold train split.
pub fn run_two_stage(
    gold: &[TrainExample],
    weak: &[TrainExample],
    variant: u8,
    cfg: &ModelConfig,
    scfg: &StrategyConfig,
) -> Result<RunResult> {
    scfg.validate()?;
    if !(variant == 1 || variant == 2) {
        return Err(Error::invalid("two-stage variant must be 1 or 2"));
    }
    let (g_tr, g_va, g_te) = split_indices(gold.len(), (0.6, 0.2, 0.2), scfg.split_seed)?;
    let gold_train = subset(gold, &g_tr);
    let gold_val = subset(gold, &g_va);
    let gold_test = subset(gold, &g_te);
    let test_ids = ids_of(&gold_test);

    // Stage 1: pre-train on weak data that shares no id with the test set.
    let weak_clean = drop_ids(weak.to_vec(), &test_ids);
    if weak_clean.is_empty() {
        return Err(Error::invalid("no weak examples left for pre-training"));
    }
    let (w_tr, w_va) =
        sample_fraction(weak_clean.len(), 0.8, mix_seed(scfg.split_seed, 0x51));
    let weak_train = subset(&weak_clean, &w_tr);
    let weak_val = subset(&weak_clean, &w_va);
    let stage1 = train_loop(
        cfg,
        &weak_train,
        &weak_val,
        init_params(cfg, scfg.model_seed)?,
        scfg.model_seed,
        false,
    )?;
    let pretrain_encoder = stage1.params.encoder_flat();

    // Stage 2: frozen-encoder fine-tuning.
    let mut stage2_train = gold_train;
    if variant == 2 {
        let (mix_idx, _) = sample_fraction(
            weak_clean.len(),
            scfg.weak_mix_fraction,
            mix_seed(scfg.split_seed, 0x52),
        );
        stage2_train.extend(subset(&weak_clean, &mix_idx));
    }
    let stage2 = train_loop(
        cfg,
        &stage2_train,
        &gold_val,
        stage1.params,
        mix_seed(scfg.model_seed, 0x52),
        true,
    )?;

    let mut train_ids = ids_of(&stage2_train);
    train_ids.extend(ids_of(&weak_train));
    let mut val_ids = ids_of(&gold_val);
    val_ids.extend(ids_of(&weak_val));
    let id_trace = IdTrace {
        train: train_ids,
        val: val_ids,
        test: test_ids,
    };
    let strategy = if variant == 1 {
        Strategy::TwoStage1
    } else {
        Strategy::TwoStage2
    };
    // epochs_run reports the fine-tuning stage; each stage independently
    // respects max_epochs/patience.
    finish_run(
        strategy,
        cfg,
        stage2,
        &gold_test,
        id_trace,
        Some(pretrain_encoder),
    )
}

/// Runs any strategy; weak examples are required for all but the fully
/// supervised baseline.
pub fn run_strategy(
    gold: &[TrainExample],
    weak: Option<&[TrainExample]>,
    cfg: &ModelConfig,
    scfg: &StrategyConfig,
) -> Result<RunResult> {
    match scfg.strategy {
        Strategy::FullySupervised => run_fully_supervised(gold, cfg, scfg),
        other => {
            let weak = weak.ok_or_else(|| {
                Error::MissingInput(format!(
                    "strategy '{}' requires weak-labeled examples",
                    other.name()
                ))
            })?;
            match other {
                Strategy::Hybrid => run_hybrid(gold, weak, cfg, scfg),
                Strategy::TwoStage1 => run_two_stage(gold, weak, 1, cfg, scfg),
                Strategy::TwoStage2 => run_two_stage(gold, weak, 2, cfg, scfg),
                Strategy::FullySupervised => unreachable!(),
            }
        }
    }
}

/// Paired-test outcome for one metric across repeated runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairedOutcome {
    Test { t: f64, p: f64 },
    /// All per-seed differences identical (zero variance).
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub theme_accuracy: f64,
    pub theme_macro_f1: f64,
    pub mf_accuracy: f64,
    pub mf_macro_f1: f64,
}

fn means_of(runs: &[RunResult]) -> MetricMeans {
    let k = runs.len() as f64;
    MetricMeans {
        theme_accuracy: runs.iter().map(|r| r.theme.accuracy).sum::<f64>() / k,
        theme_macro_f1: runs.iter().map(|r| r.theme.macro_f1).sum::<f64>() / k,
        mf_accuracy: runs.iter().map(|r| r.mf.accuracy).sum::<f64>() / k,
        mf_macro_f1: runs.iter().map(|r| r.mf.macro_f1).sum::<f64>() / k,
    }
}

#[derive(Debug)]
pub struct RepeatReport {
    pub strategy_runs: Vec<RunResult>,
    pub baseline_runs: Vec<RunResult>,
    pub strategy_means: MetricMeans,
    pub baseline_means: MetricMeans,
    /// Paired t per metric name ("theme_accuracy", ...).
    pub paired: std::collections::BTreeMap<String, PairedOutcome>,
}

/// Runs `strategy` and `baseline` k times each with model seeds
/// model_seed, model_seed+1, … and paired-tests the per-seed metrics.
pub fn repeat_runs(
    gold: &[TrainExample],
    weak: Option<&[TrainExample]>,
    cfg: &ModelConfig,
    strategy: &StrategyConfig,
    baseline: &StrategyConfig,
    k: usize,
) -> Result<RepeatReport> {
    if k < 2 {
        return Err(Error::invalid("repeat_runs needs k >= 2"));
    }
    let mut strategy_runs = Vec::with_capacity(k);
    let mut baseline_runs = Vec::with_capacity(k);
    for i in 0..k {
        let mut s = strategy.clone();
        s.model_seed = strategy.model_seed + i as u64;
        strategy_runs.push(run_strategy(gold, weak, cfg, &s)?);
        let mut b = baseline.clone();
        b.model_seed = baseline.model_seed + i as u64;
        baseline_runs.push(run_strategy(gold, weak, cfg, &b)?);
    }
    let metric = |r: &RunResult, name: &str| -> f64 {
        match name {
            "theme_accuracy" => r.theme.accuracy,
            "theme_macro_f1" => r.theme.macro_f1,
            "mf_accuracy" => r.mf.accuracy,
            "mf_macro_f1" => r.mf.macro_f1,
            _ => unreachable!(),
        }
    };
    let mut paired = std::collections::BTreeMap::new();
    for name in ["theme_accuracy", "theme_macro_f1", "mf_accuracy", "mf_macro_f1"] {
        let a: Vec<f64> = strategy_runs.iter().map(|r| metric(r, name)).collect();
        let b: Vec<f64> = baseline_runs.iter().map(|r| metric(r, name)).collect();
        let outcome = match paired_t(&a, &b) {
            Ok(TestResult {
                statistic, p_value, ..
            }) => PairedOutcome::Test {
                t: statistic,
                p: p_value,
            },
            Err(Error::Degenerate(_)) => PairedOutcome::Degenerate,
            Err(e) => return Err(e),
        };
        paired.insert(name.to_string(), outcome);
    }
    Ok(RepeatReport {
        strategy_means: means_of(&strategy_runs),
        baseline_means: means_of(&baseline_runs),
        strategy_runs,
        baseline_runs,
        paired,
    })
}
