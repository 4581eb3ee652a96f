//! Weak label generation.
//!
//! Themes come from nearest-phrase matching: each ad's document vector is
//! compared (cosine distance) against a bank of theme phrases and takes the
//! closest phrase's theme when the distance clears a threshold. Moral-framing
//! labels come from lexicon stem counting with an argmax and a minimum-hit
//! rule for the liberty foundation. Both labelers are pure over immutable
//! inputs, so records are labeled in parallel.

mod lexicon;
mod phrasebank;
#[cfg(test)]
mod tests;

pub use lexicon::{load_lexicon, Foundation, Lexicon, LexiconEntry};
pub use phrasebank::{Phrase, PhraseBank};

use std::collections::BTreeMap;

use crate::corpus::{tokenize_alpha, Dataset, LabelPair, LabelSource, MfLabel, Theme};
use crate::embed::{cosine_distance, doc_vector, EmbedSource};
use crate::error::{Error, Result};
use crate::exec;
use crate::metrics::{classification_metrics, ClassMetrics};

/// Default threshold on cosine distance for theme assignment.
pub const DEFAULT_THEME_THRESHOLD: f64 = 0.5;

/// Per-foundation match counts for one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MfCounts {
    counts: [u32; 6],
}

impl MfCounts {
    pub fn get(&self, f: Foundation) -> u32 {
        self.counts[f as usize]
    }

    pub fn set(&mut self, f: Foundation, v: u32) {
        self.counts[f as usize] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Foundation, u32)> + '_ {
        Foundation::ALL.iter().map(|&f| (f, self.get(f)))
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Counts lexicon matches over the lowercased alphabetic tokens of `body`.
/// A token increments each foundation it matches at most once, but may
/// increment several different foundations.
pub fn score_mf(body: &str, lexicon: &Lexicon) -> MfCounts {
    let mut counts = MfCounts::default();
    for token in tokenize_alpha(body) {
        let mut hit = [false; 6];
        for entry in &lexicon.entries {
            if hit[entry.foundation as usize] {
                continue;
            }
            let matched = if entry.wildcard {
                token.starts_with(entry.stem.as_str())
            } else {
                token == entry.stem
            };
            if matched {
                hit[entry.foundation as usize] = true;
            }
        }
        for (i, h) in hit.iter().enumerate() {
            if *h {
                counts.counts[i] += 1;
            }
        }
    }
    counts
}

/// Picks the foundation with the highest count. Liberty is only eligible
/// with at least `liberty_min` hits; ties break in the fixed foundation
/// order (Care, Fairness, Loyalty, Authority, Sanctity, Liberty). All-zero
/// eligible counts yield `MfLabel::None`.
pub fn assign_mf(counts: &MfCounts, liberty_min: u32) -> MfLabel {
    let mut best: Option<(Foundation, u32)> = None;
    for f in Foundation::ALL {
        let c = counts.get(f);
        if c == 0 {
            continue;
        }
        if f == Foundation::LibertyOppression && c < liberty_min {
            continue;
        }
        match best {
            Some((_, bc)) if c <= bc => {}
            _ => best = Some((f, c)),
        }
    }
    match best {
        Some((f, _)) => f.to_label(),
        None => MfLabel::None,
    }
}

/// Nearest-phrase theme assignment. Returns the matched theme (or
/// `Unassigned` when the minimum distance exceeds `threshold`) along with the
/// minimum distance. Ties at equal distance go to the lower phrase index.
pub fn assign_theme(doc: &[f64], bank: &PhraseBank, threshold: f64) -> Result<(Theme, f64)> {
    if bank.phrases.is_empty() {
        return Err(Error::invalid("empty phrase bank"));
    }
    let mut best_dist = f64::INFINITY;
    let mut best_theme = Theme::Unassigned;
    for phrase in &bank.phrases {
        let dist = cosine_distance(doc, &phrase.vector)?;
        if dist < best_dist {
            best_dist = dist;
            best_theme = phrase.theme;
        }
    }
    if best_dist <= threshold {
        Ok((best_theme, best_dist))
    } else {
        Ok((Theme::Unassigned, best_dist))
    }
}

/// Mean silhouette over assigned documents using cosine distance, the same
/// metric as the assignment itself. Singleton-cluster points contribute 0.
/// Requires at least two nonempty clusters.
pub fn silhouette(
    assignments: &BTreeMap<String, Theme>,
    vectors: &BTreeMap<String, Vec<f64>>,
) -> Result<f64> {
    let mut clusters: BTreeMap<Theme, Vec<&str>> = BTreeMap::new();
    for (doc, theme) in assignments {
        if !vectors.contains_key(doc) {
            return Err(Error::MissingInput(format!("no vector for doc '{doc}'")));
        }
        clusters.entry(*theme).or_default().push(doc);
    }
    if clusters.len() < 2 {
        return Err(Error::invalid(
            "silhouette needs at least 2 nonempty clusters",
        ));
    }
    let mean_dist = |doc: &str, members: &[&str]| -> Result<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for other in members {
            if *other == doc {
                continue;
            }
            sum += cosine_distance(&vectors[doc], &vectors[*other])?;
            count += 1;
        }
        Ok(if count == 0 { 0.0 } else { sum / count as f64 })
    };
    let mut total = 0.0;
    let mut points = 0usize;
    for (theme, members) in &clusters {
        for doc in members {
            points += 1;
            if members.len() == 1 {
                continue; // singleton contributes 0
            }
            let a = mean_dist(doc, members)?;
            let mut b = f64::INFINITY;
            for (other_theme, other_members) in &clusters {
                if other_theme == theme {
                    continue;
                }
                let mut sum = 0.0;
                for other in other_members {
                    sum += cosine_distance(&vectors[*doc], &vectors[*other])?;
                }
                b = b.min(sum / other_members.len() as f64);
            }
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / points as f64)
}

/// Weak label plus the theme match distance for one record.
#[derive(Debug, Clone)]
pub struct RecordLabel {
    pub label: LabelPair,
    pub theme_distance: f64,
}

fn label_record(
    record: &crate::corpus::AdRecord,
    bank: &PhraseBank,
    lexicon: &Lexicon,
    source: &EmbedSource,
    threshold: f64,
) -> Result<RecordLabel> {
    let doc = doc_vector(record, source)?;
    // Empty bodies hash to the zero vector; they go straight to Unassigned
    // rather than failing the whole run.
    let (theme, distance) = if doc.iter().all(|&v| v == 0.0) {
        (Theme::Unassigned, 1.0)
    } else {
        assign_theme(&doc, bank, threshold)?
    };
    let mf = assign_mf(&score_mf(&record.body, lexicon), lexicon.liberty_min);
    Ok(RecordLabel {
        label: LabelPair {
            ad_id: record.id.clone(),
            theme,
            mf,
            source: LabelSource::Weak,
        },
        theme_distance: distance,
    })
}

/// Weak-labels every record of the dataset (parallel over records when the
/// `parallel` feature is on; output order always matches record order).
pub fn label_dataset(
    d: &Dataset,
    bank: &PhraseBank,
    lexicon: &Lexicon,
    source: &EmbedSource,
    threshold: f64,
) -> Result<Vec<RecordLabel>> {
    exec::map(&d.records, |r| {
        label_record(r, bank, lexicon, source, threshold)
    })
    .into_iter()
    .collect()
}

/// Sequential twin of [`label_dataset`], for benches and determinism checks.
pub fn label_dataset_serial(
    d: &Dataset,
    bank: &PhraseBank,
    lexicon: &Lexicon,
    source: &EmbedSource,
    threshold: f64,
) -> Result<Vec<RecordLabel>> {
    exec::map_serial(&d.records, |r| {
        label_record(r, bank, lexicon, source, threshold)
    })
    .into_iter()
    .collect()
}

/// Silhouette over the theme-assigned subset of a labeled dataset.
pub fn silhouette_for_dataset(
    d: &Dataset,
    labels: &[LabelPair],
    source: &EmbedSource,
) -> Result<f64> {
    let mut assignments = BTreeMap::new();
    let mut vectors = BTreeMap::new();
    let by_id: BTreeMap<&str, &LabelPair> =
        labels.iter().map(|l| (l.ad_id.as_str(), l)).collect();
    for record in &d.records {
        let Some(label) = by_id.get(record.id.as_str()) else {
            continue;
        };
        if label.theme == Theme::Unassigned {
            continue;
        }
        let doc = doc_vector(record, source)?;
        if doc.iter().all(|&v| v == 0.0) {
            continue;
        }
        assignments.insert(record.id.clone(), label.theme);
        vectors.insert(record.id.clone(), doc);
    }
    silhouette(&assignments, &vectors)
}

/// Per-task weak-label quality over the gold/weak id intersection.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QualityReport {
    pub overlap: usize,
    pub theme: ClassMetrics,
    pub mf: ClassMetrics,
}

/// Compares weak labels against gold labels. Unassigned weak themes count as
/// (always wrong) predictions of their own bucket; macro-F1 averages over
/// classes present in gold only.
pub fn weak_quality(weak: &[LabelPair], gold: &[LabelPair]) -> Result<QualityReport> {
    let weak_by_id: BTreeMap<&str, &LabelPair> =
        weak.iter().map(|l| (l.ad_id.as_str(), l)).collect();
    let mut theme_pairs = Vec::new();
    let mut mf_pairs = Vec::new();
    for g in gold {
        let Some(w) = weak_by_id.get(g.ad_id.as_str()) else {
            continue;
        };
        theme_pairs.push((g.theme.name().to_string(), w.theme.name().to_string()));
        mf_pairs.push((g.mf.name().to_string(), w.mf.name().to_string()));
    }
    if theme_pairs.is_empty() {
        return Err(Error::invalid(
            "weak_quality: no overlap between weak and gold ad ids",
        ));
    }
    Ok(QualityReport {
        overlap: theme_pairs.len(),
        theme: classification_metrics(&theme_pairs),
        mf: classification_metrics(&mf_pairs),
    })
}
