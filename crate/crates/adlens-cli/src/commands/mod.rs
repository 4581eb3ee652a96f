pub mod analyze;
pub mod evaluate;
pub mod gradcheck;
pub mod ingest;
pub mod train;
pub mod weaklabel;

use std::path::Path;

use adlens::corpus::{self, AdFormat, Dataset};
use adlens::embed::{load_store, EmbedSource};
use adlens::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for AdFormat {
    fn from(f: FormatArg) -> AdFormat {
        match f {
            FormatArg::Jsonl => AdFormat::Jsonl,
            FormatArg::Csv => AdFormat::Csv,
        }
    }
}

pub fn load_dataset(path: &Path, format: FormatArg) -> Result<Dataset> {
    corpus::load_ads(path, format.into())
}

/// Builds the embed source: sidecar store when given (hashed fallback for
/// missing keys), pure fallback otherwise.
pub fn embed_source(
    embeddings: Option<&Path>,
    dim: usize,
    embed_seed: u64,
) -> Result<EmbedSource> {
    match embeddings {
        Some(path) => {
            let store = load_store(path)?;
            Ok(EmbedSource::store_with_fallback(store, embed_seed))
        }
        None => Ok(EmbedSource::fallback(dim, embed_seed)),
    }
}

/// Attaches labels to records, dropping labels whose ad id is absent from
/// the corpus (e.g. after dedup). Returns the labeled dataset and how many
/// labels were dropped.
pub fn attach_labels(
    records: Vec<adlens::corpus::AdRecord>,
    labels: Vec<adlens::corpus::LabelPair>,
) -> Result<(Dataset, usize)> {
    let ids: std::collections::HashSet<&str> =
        records.iter().map(|r| r.id.as_str()).collect();
    let total = labels.len();
    let kept: Vec<adlens::corpus::LabelPair> = labels
        .into_iter()
        .filter(|l| ids.contains(l.ad_id.as_str()))
        .collect();
    let dropped = total - kept.len();
    if dropped > 0 {
        log::warn!("{dropped} label(s) reference ads absent from the corpus; ignored");
    }
    let dataset = Dataset {
        records,
        labels: None,
    }
    .with_labels(kept)?;
    Ok((dataset, dropped))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let json =
        serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?
    );
    Ok(())
}
