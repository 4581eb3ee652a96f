use std::path::PathBuf;

use clap::Args;

use adlens::corpus::{load_deaths, load_labels};
use adlens::error::Result;
use adlens::weaklabel::weak_quality;

use super::{load_dataset, print_json, write_json, FormatArg};
use crate::report::{
    build_analysis, corpus_digest, write_csv_tables, write_meta, PipelineReport,
    REPORT_SCHEMA_VERSION,
};

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub ads: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Labels driving the analysis tables (weak or gold).
    #[arg(long)]
    pub labels: PathBuf,
    /// Gold labels for a weak-label quality block.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Daily deaths CSV; enables the causality section.
    #[arg(long)]
    pub deaths: Option<PathBuf>,
    /// Training manifests to embed under strategy_metrics.
    #[arg(long)]
    pub manifest: Vec<PathBuf>,
    #[arg(long, default_value_t = 14)]
    pub granger_max_lag: usize,
    #[arg(long, default_value_t = 20)]
    pub top_terms: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let dataset = load_dataset(&args.ads, args.format)?;
    let labels = load_labels(&args.labels)?;
    let (labeled, _) = super::attach_labels(dataset.records, labels.clone())?;

    let weak_label_quality = match &args.gold {
        Some(path) => {
            let gold = load_labels(path)?;
            Some(weak_quality(&labels, &gold)?)
        }
        None => None,
    };

    let deaths = args.deaths.as_deref().map(load_deaths).transpose()?;
    let analysis = build_analysis(
        &labeled,
        deaths.as_ref(),
        args.granger_max_lag,
        args.top_terms,
    )?;

    let strategy_metrics = if args.manifest.is_empty() {
        None
    } else {
        let mut manifests = Vec::new();
        for path in &args.manifest {
            let content = std::fs::read_to_string(path)?;
            manifests.push(
                serde_json::from_str(&content)
                    .map_err(|e| adlens::error::Error::invalid(format!("manifest: {e}")))?,
            );
        }
        Some(manifests)
    };

    let report = PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        corpus: corpus_digest(&labeled),
        weak_label_quality,
        strategy_metrics,
        analysis,
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let report_path = args.out_dir.join("report.json");
    write_json(&report_path, &report)?;
    write_csv_tables(&args.out_dir, &report.analysis)?;
    write_meta(&args.out_dir, "analyze")?;

    print_json(&serde_json::json!({
        "report": report_path,
        "records": report.corpus.records,
        "label_coverage": report.corpus.label_coverage,
        "granger_included": report.analysis.granger.is_some(),
    }))
}
