use std::path::PathBuf;

use clap::Args;

use adlens::corpus::load_labels;
use adlens::error::Result;
use adlens::mtlnet::load_checkpoint;
use adlens::train::{evaluate, prepare_examples};

use super::{embed_source, load_dataset, print_json, write_json, FormatArg};

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub ads: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Labels to score against.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 17)]
    pub embed_seed: u64,
    /// Optional metrics JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let (params, cfg) = load_checkpoint(&args.checkpoint)?;
    let dataset = load_dataset(&args.ads, args.format)?;
    let labels = load_labels(&args.labels)?;
    let (labeled, _) = super::attach_labels(dataset.records, labels)?;
    let source = embed_source(args.embeddings.as_deref(), cfg.embed_dim, args.embed_seed)?;
    let examples = prepare_examples(&labeled, &cfg, &source)?;
    let (theme, mf) = evaluate(&params, &cfg, &examples)?;
    let result = serde_json::json!({
        "examples": examples.len(),
        "theme": {"accuracy": theme.accuracy, "macro_f1": theme.macro_f1, "per_class_f1": theme.per_class_f1},
        "mf": {"accuracy": mf.accuracy, "macro_f1": mf.macro_f1, "per_class_f1": mf.per_class_f1},
    });
    if let Some(out) = &args.out {
        write_json(out, &result)?;
    }
    print_json(&result)
}
