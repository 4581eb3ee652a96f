//! Deterministic synthetic corpora for benchmarks and end-to-end tests.
//!
//! Two generators:
//! * [`separable_examples`] — token sequences whose hashed bag-of-words
//!   features identify both labels exactly, with optional label noise on a
//!   weak copy. This is the benchmark bed for comparing supervision
//!   strategies without the original corpus.
//! * [`synthetic_ads`] — full ad records with phrase-bank-derived bodies,
//!   spend/impression ranges, demographics, and dates, for exercising the
//!   whole ingest → label → train → analyze pipeline.

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::corpus::{
    AdRecord, AgeBucket, DemographicCell, EntityType, Gender, LabelPair, LabelSource, MfLabel,
    PoliticalView, RegionShare, Theme, TimeSeries, ValueRange,
};
use crate::embed::{token_sequence, EmbedSource};
use crate::mtlnet::{ModelConfig, TrainExample};
use crate::weaklabel::PhraseBank;

/// Vocabulary whose words hash to pairwise-distinct buckets under the
/// fallback encoder, so the bag features are linearly separable by
/// construction: each class owns its own coordinates and fillers occupy
/// further coordinates of their own.
pub struct SeparableVocab {
    theme_words: Vec<Vec<String>>,
    mf_words: Vec<Vec<String>>,
    fillers: Vec<String>,
    pub source: EmbedSource,
}

const THEME_WORDS_PER_CLASS: usize = 3;
const MF_WORDS_PER_CLASS: usize = 2;
const FILLER_WORDS: usize = 8;

impl SeparableVocab {
    /// Needs `cfg.embed_dim` ≥ 3·themes + 2·mfs + 8 to find distinct
    /// buckets. Deterministic for a given (config, embed_seed).
    pub fn build(cfg: &ModelConfig, embed_seed: u64) -> SeparableVocab {
        let needed = THEME_WORDS_PER_CLASS * cfg.theme_classes
            + MF_WORDS_PER_CLASS * cfg.mf_classes
            + FILLER_WORDS;
        assert!(
            cfg.embed_dim >= needed,
            "embed_dim {} too small for a separable vocabulary ({needed} buckets)",
            cfg.embed_dim
        );
        let mut used = std::collections::HashSet::new();
        let mut attempt = 0u32;
        let mut draw = |prefix: &str, count: usize| -> Vec<String> {
            let mut words = Vec::with_capacity(count);
            while words.len() < count {
                let cand = format!("{prefix}x{attempt}");
                attempt += 1;
                let v = crate::embed::hashed_embedding(&cand, cfg.embed_dim, embed_seed);
                let bucket = v.iter().position(|&x| x != 0.0).expect("single token");
                if used.insert(bucket) {
                    words.push(cand);
                }
            }
            words
        };
        let theme_words = (0..cfg.theme_classes)
            .map(|t| draw(&format!("theme{t}"), THEME_WORDS_PER_CLASS))
            .collect();
        let mf_words = (0..cfg.mf_classes)
            .map(|m| draw(&format!("frame{m}"), MF_WORDS_PER_CLASS))
            .collect();
        let fillers = draw("filler", FILLER_WORDS);
        SeparableVocab {
            theme_words,
            mf_words,
            fillers,
            source: EmbedSource::fallback(cfg.embed_dim, embed_seed),
        }
    }

    fn body(&self, theme: usize, mf: usize, rng: &mut ChaCha12Rng) -> String {
        // Fixed slot structure (theme words, then mf words, then filler):
        // unseen class pairs stay compositional, and tiny training splits
        // are not asked to learn order invariance. Per-example variation
        // comes from the filler word.
        let mut words: Vec<&str> = self.theme_words[theme]
            .iter()
            .chain(self.mf_words[mf].iter())
            .map(String::as_str)
            .collect();
        words.push(&self.fillers[rng.random_range(0..self.fillers.len())]);
        words.join(" ")
    }
}

fn noisy_class(true_class: usize, classes: usize, noise: f64, rng: &mut ChaCha12Rng) -> usize {
    if rng.random::<f64>() < noise {
        rng.random_range(0..classes)
    } else {
        true_class
    }
}

/// Generates `count` examples with exact labels; when `label_noise > 0`,
/// each emitted label is independently resampled uniformly with that
/// probability (the separable features stay intact).
pub fn separable_examples(
    cfg: &ModelConfig,
    vocab: &SeparableVocab,
    count: usize,
    label_noise: f64,
    seed: u64,
    id_prefix: &str,
) -> Vec<TrainExample> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let theme = i % cfg.theme_classes;
            let mf = (i / cfg.theme_classes) % cfg.mf_classes;
            let body = vocab.body(theme, mf, &mut rng);
            let id = format!("{id_prefix}{i}");
            let seq = token_sequence(&id, &body, cfg.seq_len, &vocab.source);
            TrainExample {
                id,
                seq,
                theme: Some(noisy_class(theme, cfg.theme_classes, label_noise, &mut rng)),
                mf: Some(noisy_class(mf, cfg.mf_classes, label_noise, &mut rng)),
            }
        })
        .collect()
}

/// Themes a synthetic corpus cycles through (the four headline themes plus
/// a few more so aggregation tables have body).
const CORPUS_THEMES: [Theme; 6] = [
    Theme::EncourageVaccination,
    Theme::VaccineMandate,
    Theme::GovTrust,
    Theme::VaccineRollout,
    Theme::VaccineEfficacy,
    Theme::Vote,
];

const CORPUS_MFS: [MfLabel; 4] = [
    MfLabel::CareHarm,
    MfLabel::LoyaltyBetrayal,
    MfLabel::AuthoritySubversion,
    MfLabel::None,
];

const ENTITIES: [(&str, EntityType, PoliticalView); 4] = [
    ("State Health Department", EntityType::PublicHealth, PoliticalView::Unknown),
    ("Acme Media Inc.", EntityType::Commercial, PoliticalView::Conservative),
    ("Community Action Fund", EntityType::Nonprofit, PoliticalView::Liberal),
    ("Friends of the Governor", EntityType::Political, PoliticalView::Liberal),
];

/// Synthetic ad corpus: bodies are a phrase from the embedded bank for the
/// target theme plus a couple of filler words, so the hashed weak labeler
/// recovers most themes. Returns records and their gold labels.
pub fn synthetic_ads(count: usize, seed: u64, start: NaiveDate) -> (Vec<AdRecord>, Vec<LabelPair>) {
    let texts = PhraseBank::builtin_texts();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let theme = CORPUS_THEMES[i % CORPUS_THEMES.len()];
        // Framing drawn independently so entity type × framing tables are
        // not degenerate by construction.
        let mf = CORPUS_MFS[rng.random_range(0..CORPUS_MFS.len())];
        let phrases = &texts[theme.name()];
        let phrase = &phrases[rng.random_range(0..phrases.len())];
        // Filler words stay outside the starter lexicon so they cannot tilt
        // the framing counts; the index keeps bodies unique.
        let body = format!("{phrase} update {} item {i}", rng.random_range(0..30u32));
        let (entity, entity_type, view) = ENTITIES[i % ENTITIES.len()];
        let spend_lo = rng.random_range(0..10u32) as f64 * 100.0;
        let impr_lo = rng.random_range(1..20u32) as f64 * 1000.0;
        let female = rng.random_range(0.3..0.7);
        let date = start + Duration::days(rng.random_range(0..60i64));
        let id = format!("ad{i:04}");
        records.push(AdRecord {
            id: id.clone(),
            body,
            funding_entity: entity.to_string(),
            entity_type,
            political_view: view,
            spend: ValueRange {
                lower: spend_lo,
                upper: spend_lo + 99.0,
            },
            impressions: ValueRange {
                lower: impr_lo,
                upper: impr_lo + 999.0,
            },
            demographics: vec![
                DemographicCell {
                    age: AgeBucket::From25To34,
                    gender: Gender::Female,
                    share: female * 0.6,
                },
                DemographicCell {
                    age: AgeBucket::From25To34,
                    gender: Gender::Male,
                    share: (1.0 - female) * 0.6,
                },
                DemographicCell {
                    age: AgeBucket::Over65,
                    gender: Gender::Female,
                    share: female * 0.4,
                },
                DemographicCell {
                    age: AgeBucket::Over65,
                    gender: Gender::Male,
                    share: (1.0 - female) * 0.4,
                },
            ],
            regions: vec![
                RegionShare {
                    state: "MA".into(),
                    share: 0.5,
                },
                RegionShare {
                    state: "WY".into(),
                    share: 0.5,
                },
            ],
            start_date: date,
        });
        labels.push(LabelPair {
            ad_id: id,
            theme,
            mf,
            source: LabelSource::Gold,
        });
    }
    (records, labels)
}

/// Daily deaths series leading `impressions` by `lead` days (deaths at t
/// predict impressions at t + lead), over the impressions window. The
/// planted direction makes deaths Granger-cause impressions.
pub fn planted_deaths(impressions: &TimeSeries, lead: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = impressions.len();
    let values: Vec<f64> = (0..n)
        .map(|t| {
            let future = if t + lead < n {
                impressions.values[t + lead]
            } else {
                0.0
            };
            (future / 100.0 + rng.random_range(0.0..3.0)).round()
        })
        .collect();
    TimeSeries {
        name: "Deaths".into(),
        dates: impressions.dates.clone(),
        values,
    }
}
