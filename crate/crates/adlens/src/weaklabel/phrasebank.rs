//! Theme phrase bank. Each theme carries a handful of representative
//! phrases; their vectors come from the embed source (sidecar keys
//! `theme:<name>:<idx>`, falling back to hashed phrase text). A default bank
//! ships embedded; an override file is a JSON object theme-name → [phrases].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::Theme;
use crate::embed::EmbedSource;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Phrase {
    pub theme: Theme,
    pub text: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PhraseBank {
    /// Ordered by theme class index, then in-file phrase order; the order is
    /// the tie-break for equidistant matches.
    pub phrases: Vec<Phrase>,
    pub dim: usize,
}

const BUILTIN_BANK_JSON: &str = include_str!("../../assets/phrase_bank.json");

impl PhraseBank {
    /// Builds a bank from theme → phrase-texts, resolving vectors through
    /// the embed source. Every one of the 15 themes must have at least one
    /// phrase; vectors must share a dimension and be nonzero and finite.
    pub fn from_texts(
        texts: &BTreeMap<String, Vec<String>>,
        source: &EmbedSource,
    ) -> Result<PhraseBank> {
        for name in texts.keys() {
            let theme = Theme::from_name(name)
                .ok_or_else(|| Error::invalid(format!("unknown theme '{name}' in phrase bank")))?;
            if theme == Theme::Unassigned {
                return Err(Error::invalid("phrase bank may not define Unassigned"));
            }
        }
        let mut phrases = Vec::new();
        for theme in Theme::CLASSES {
            let Some(list) = texts.get(theme.name()) else {
                return Err(Error::invalid(format!(
                    "phrase bank missing theme '{}'",
                    theme.name()
                )));
            };
            if list.is_empty() {
                return Err(Error::invalid(format!(
                    "phrase bank theme '{}' has no phrases",
                    theme.name()
                )));
            }
            for (idx, text) in list.iter().enumerate() {
                let key = format!("theme:{}:{}", theme.name(), idx);
                let vector = source.vector_for(&key, text)?;
                if vector.iter().any(|v| !v.is_finite()) {
                    return Err(Error::non_finite(format!("phrase vector '{key}'")));
                }
                if vector.iter().all(|&v| v == 0.0) {
                    return Err(Error::invalid(format!("zero phrase vector for '{key}'")));
                }
                phrases.push(Phrase {
                    theme,
                    text: text.clone(),
                    vector,
                });
            }
        }
        Ok(PhraseBank {
            dim: source.dim(),
            phrases,
        })
    }

    /// The embedded default bank.
    pub fn builtin(source: &EmbedSource) -> Result<PhraseBank> {
        let texts: BTreeMap<String, Vec<String>> = serde_json::from_str(BUILTIN_BANK_JSON)
            .map_err(|e| Error::invalid(format!("embedded phrase bank: {e}")))?;
        PhraseBank::from_texts(&texts, source)
    }

    /// Loads an override bank from a JSON file.
    pub fn from_file(path: impl AsRef<Path>, source: &EmbedSource) -> Result<PhraseBank> {
        let content = fs::read_to_string(path.as_ref())?;
        let texts: BTreeMap<String, Vec<String>> = serde_json::from_str(&content)
            .map_err(|e| Error::invalid(format!("phrase bank json: {e}")))?;
        PhraseBank::from_texts(&texts, source)
    }

    /// Raw phrase texts of the embedded bank, keyed by theme name.
    pub fn builtin_texts() -> BTreeMap<String, Vec<String>> {
        serde_json::from_str(BUILTIN_BANK_JSON).expect("embedded phrase bank must parse")
    }
}
