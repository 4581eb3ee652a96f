use std::path::PathBuf;

use clap::Args;

use adlens::corpus::{dedup_by_content, write_ads_jsonl};
use adlens::error::Result;

use super::{load_dataset, print_json, FormatArg};

#[derive(Args)]
pub struct IngestArgs {
    /// Input ads file.
    #[arg(long)]
    pub ads: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Drop records with duplicate normalized bodies (first wins).
    #[arg(long)]
    pub dedup: bool,
    /// Normalized JSONL output path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: IngestArgs) -> Result<()> {
    let dataset = load_dataset(&args.ads, args.format)?;
    let loaded = dataset.len();
    let output = if args.dedup {
        dedup_by_content(&dataset)
    } else {
        dataset
    };
    write_ads_jsonl(&output, &args.out)?;
    print_json(&serde_json::json!({
        "records_loaded": loaded,
        "records_written": output.len(),
        "deduped": args.dedup,
        "digest": output.digest(),
        "out": args.out,
    }))
}
