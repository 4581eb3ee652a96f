use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use adlens::corpus::write_labels_jsonl;
use adlens::error::Result;
use adlens::weaklabel::{
    label_dataset, load_lexicon, silhouette_for_dataset, Lexicon, PhraseBank,
    DEFAULT_THEME_THRESHOLD,
};

use super::{embed_source, load_dataset, print_json, FormatArg};
use crate::config::load_file_config;

#[derive(Args)]
pub struct WeaklabelArgs {
    #[arg(long)]
    pub ads: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Lexicon file (stem[*]\tFoundation); embedded starter when omitted.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Phrase-bank JSON (theme → phrases); embedded bank when omitted.
    #[arg(long)]
    pub phrasebank: Option<PathBuf>,
    /// Embedding sidecar file; hashed fallback covers missing keys.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Cosine-distance threshold for theme assignment.
    #[arg(long, default_value_t = DEFAULT_THEME_THRESHOLD)]
    pub threshold: f64,
    /// Fallback embedding dimension (ignored when a sidecar provides one).
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Fallback embedding seed.
    #[arg(long, default_value_t = 17)]
    pub embed_seed: u64,
    /// Minimum liberty keyword hits.
    #[arg(long)]
    pub liberty_min: Option<u32>,
    /// Weak-labels JSONL output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: WeaklabelArgs, config: Option<&Path>) -> Result<()> {
    // The config file only contributes the embedding dimension default here.
    let file_cfg = load_file_config(config)?;
    let dim = file_cfg.model.embed_dim.unwrap_or(args.dim);

    let dataset = load_dataset(&args.ads, args.format)?;
    let source = embed_source(args.embeddings.as_deref(), dim, args.embed_seed)?;
    let mut lexicon = match &args.lexicon {
        Some(path) => load_lexicon(path)?,
        None => Lexicon::builtin(),
    };
    if let Some(min) = args.liberty_min {
        lexicon = lexicon.with_liberty_min(min);
    }
    let bank = match &args.phrasebank {
        Some(path) => PhraseBank::from_file(path, &source)?,
        None => PhraseBank::builtin(&source)?,
    };

    let labeled = label_dataset(&dataset, &bank, &lexicon, &source, args.threshold)?;
    let labels: Vec<_> = labeled.iter().map(|r| r.label.clone()).collect();
    write_labels_jsonl(&labels, &args.out)?;

    let mut theme_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut mf_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &labels {
        *theme_counts.entry(l.theme.name()).or_default() += 1;
        *mf_counts.entry(l.mf.name()).or_default() += 1;
    }
    let silhouette = silhouette_for_dataset(&dataset, &labels, &source).ok();
    print_json(&serde_json::json!({
        "records": dataset.len(),
        "threshold": args.threshold,
        "theme_counts": theme_counts,
        "mf_counts": mf_counts,
        "silhouette": silhouette,
        "out": args.out,
    }))
}
