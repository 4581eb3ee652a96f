use std::path::{Path, PathBuf};

use clap::Args;

use adlens::corpus::load_labels;
use adlens::error::{Error, Result};
use adlens::mtlnet::save_checkpoint;
use adlens::train::{prepare_examples, repeat_runs, run_strategy, RunResult, Strategy};

use super::{embed_source, load_dataset, print_json, write_json, FormatArg};
use crate::config::load_file_config;
use crate::report::write_meta;

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub ads: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Gold labels JSONL.
    #[arg(long)]
    pub gold: PathBuf,
    /// Weak labels JSONL (required for hybrid / two-stage strategies).
    #[arg(long)]
    pub weak: Option<PathBuf>,
    /// fully_supervised | hybrid | two_stage1 | two_stage2
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 17)]
    pub embed_seed: u64,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub model_seed: Option<u64>,
    /// Repeat with model seeds s, s+1, … and paired-test against --baseline.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Baseline strategy for --repeats.
    #[arg(long, default_value = "fully_supervised")]
    pub baseline: String,
    /// Output directory for checkpoint.json + manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn metrics_json(run: &RunResult) -> serde_json::Value {
    serde_json::json!({
        "strategy": run.strategy.name(),
        "theme": {"accuracy": run.theme.accuracy, "macro_f1": run.theme.macro_f1},
        "mf": {"accuracy": run.mf.accuracy, "macro_f1": run.mf.macro_f1},
        "epochs_run": run.epochs_run,
        "best_val_loss": run.best_val_loss,
    })
}

pub fn run(args: TrainArgs, config: Option<&Path>) -> Result<()> {
    let file_cfg = load_file_config(config)?;
    let model_cfg = file_cfg.model_config();
    model_cfg.validate()?;
    let mut strategy_cfg = file_cfg.strategy_config()?;
    if let Some(name) = &args.strategy {
        strategy_cfg.strategy = Strategy::from_name(name)
            .ok_or_else(|| Error::invalid(format!("unknown strategy '{name}'")))?;
    }
    if let Some(seed) = args.split_seed {
        strategy_cfg.split_seed = seed;
    }
    if let Some(seed) = args.model_seed {
        strategy_cfg.model_seed = seed;
    }
    if strategy_cfg.strategy.needs_weak() && args.weak.is_none() {
        return Err(Error::MissingInput(format!(
            "strategy '{}' needs --weak labels",
            strategy_cfg.strategy.name()
        )));
    }

    let dataset = load_dataset(&args.ads, args.format)?;
    let source = embed_source(
        args.embeddings.as_deref(),
        model_cfg.embed_dim,
        args.embed_seed,
    )?;
    let gold_labels = load_labels(&args.gold)?;
    let (gold_ds, _) = super::attach_labels(dataset.records.clone(), gold_labels)?;
    let gold = prepare_examples(&gold_ds, &model_cfg, &source)?;
    if gold.is_empty() {
        return Err(Error::invalid("no gold-labeled ads matched the corpus"));
    }
    let (weak, weak_digest) = match &args.weak {
        Some(path) => {
            let weak_labels = load_labels(path)?;
            let (weak_ds, _) = super::attach_labels(dataset.records.clone(), weak_labels)?;
            let examples = prepare_examples(&weak_ds, &model_cfg, &source)?;
            (Some(examples), Some(weak_ds.digest()))
        }
        None => (None, None),
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let checkpoint_path = args.out_dir.join("checkpoint.json");
    let manifest_path = args.out_dir.join("manifest.json");

    let repeats_block;
    let main_run;
    match args.repeats {
        Some(k) if k >= 2 => {
            let mut baseline_cfg = strategy_cfg.clone();
            baseline_cfg.strategy = Strategy::from_name(&args.baseline)
                .ok_or_else(|| Error::invalid(format!("unknown baseline '{}'", args.baseline)))?;
            let report = repeat_runs(
                &gold,
                weak.as_deref(),
                &model_cfg,
                &strategy_cfg,
                &baseline_cfg,
                k,
            )?;
            repeats_block = Some(serde_json::json!({
                "k": k,
                "baseline": baseline_cfg.strategy.name(),
                "strategy_means": report.strategy_means,
                "baseline_means": report.baseline_means,
                "strategy_runs": report.strategy_runs.iter().map(metrics_json).collect::<Vec<_>>(),
                "baseline_runs": report.baseline_runs.iter().map(metrics_json).collect::<Vec<_>>(),
                "paired_t": report.paired,
            }));
            main_run = report.strategy_runs.into_iter().next().unwrap();
        }
        _ => {
            repeats_block = None;
            main_run = run_strategy(&gold, weak.as_deref(), &model_cfg, &strategy_cfg)?;
        }
    }

    save_checkpoint(&main_run.checkpoint, &model_cfg, &checkpoint_path)?;
    let manifest = serde_json::json!({
        "schema_version": 1,
        "strategy": strategy_cfg.strategy.name(),
        "split_seed": strategy_cfg.split_seed,
        "model_seed": strategy_cfg.model_seed,
        "gold_digest": gold_ds.digest(),
        "weak_digest": weak_digest,
        "model_config": model_cfg,
        "metrics": metrics_json(&main_run),
        "test_isolated": main_run.id_trace.test_isolated(),
        "checkpoint": "checkpoint.json",
        "repeats": repeats_block,
    });
    write_json(&manifest_path, &manifest)?;
    write_meta(&args.out_dir, "train")?;

    // Table-style metrics row.
    println!(
        "{:<18} mf_acc={:.3} mf_f1={:.3} theme_acc={:.3} theme_f1={:.3} epochs={}",
        strategy_cfg.strategy.name(),
        main_run.mf.accuracy,
        main_run.mf.macro_f1,
        main_run.theme.accuracy,
        main_run.theme.macro_f1,
        main_run.epochs_run
    );
    print_json(&serde_json::json!({
        "manifest": manifest_path,
        "checkpoint": checkpoint_path,
    }))
}
