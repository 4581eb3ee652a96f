//! Stem lexicon for moral-framing scoring.
//!
//! File format: one `stem[*]\tFoundationName` per line, `#` comments. A
//! trailing `*` marks a prefix wildcard. A starter lexicon ships embedded;
//! production runs can point at a full dictionary in the same format.

use std::fs;
use std::path::Path;

use crate::corpus::MfLabel;
use crate::error::{Error, Result};

/// The six lexicon-addressable foundations. `MfLabel::None` is never a
/// lexicon target; it is the fallback when nothing matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(usize)]
pub enum Foundation {
    CareHarm = 0,
    FairnessCheating = 1,
    LoyaltyBetrayal = 2,
    AuthoritySubversion = 3,
    SanctityDegradation = 4,
    LibertyOppression = 5,
}

impl Foundation {
    /// Fixed order; doubles as the argmax tie-break order.
    pub const ALL: [Foundation; 6] = [
        Foundation::CareHarm,
        Foundation::FairnessCheating,
        Foundation::LoyaltyBetrayal,
        Foundation::AuthoritySubversion,
        Foundation::SanctityDegradation,
        Foundation::LibertyOppression,
    ];

    pub fn name(self) -> &'static str {
        self.to_label().name()
    }

    pub fn from_name(s: &str) -> Option<Foundation> {
        Foundation::ALL.iter().copied().find(|f| f.name() == s)
    }

    pub fn to_label(self) -> MfLabel {
        match self {
            Foundation::CareHarm => MfLabel::CareHarm,
            Foundation::FairnessCheating => MfLabel::FairnessCheating,
            Foundation::LoyaltyBetrayal => MfLabel::LoyaltyBetrayal,
            Foundation::AuthoritySubversion => MfLabel::AuthoritySubversion,
            Foundation::SanctityDegradation => MfLabel::SanctityDegradation,
            Foundation::LibertyOppression => MfLabel::LibertyOppression,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    /// Lowercase, nonempty stem.
    pub stem: String,
    /// Prefix match when true, exact token match otherwise.
    pub wildcard: bool,
    pub foundation: Foundation,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub entries: Vec<LexiconEntry>,
    /// Minimum liberty keyword hits before liberty can win the argmax.
    pub liberty_min: u32,
}

pub const DEFAULT_LIBERTY_MIN: u32 = 2;

fn parse_lexicon(content: &str) -> Result<Lexicon> {
    let mut entries = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (raw_stem, foundation_name) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected stem[*]\\tFoundationName"))?;
        let foundation = Foundation::from_name(foundation_name.trim()).ok_or_else(|| {
            Error::parse(line_no, format!("unknown foundation '{foundation_name}'"))
        })?;
        let (stem, wildcard) = match raw_stem.strip_suffix('*') {
            Some(s) => (s, true),
            None => (raw_stem, false),
        };
        let stem = stem.trim().to_lowercase();
        if stem.is_empty() {
            return Err(Error::parse(line_no, "empty stem"));
        }
        entries.push(LexiconEntry {
            stem,
            wildcard,
            foundation,
        });
    }
    Ok(Lexicon {
        entries,
        liberty_min: DEFAULT_LIBERTY_MIN,
    })
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    parse_lexicon(&fs::read_to_string(path.as_ref())?)
}

impl Lexicon {
    /// The embedded starter lexicon (assets/lexicon.tsv).
    pub fn builtin() -> Lexicon {
        parse_lexicon(include_str!("../../assets/lexicon.tsv"))
            .expect("embedded lexicon must parse")
    }

    pub fn with_liberty_min(mut self, liberty_min: u32) -> Lexicon {
        self.liberty_min = liberty_min;
        self
    }

    pub fn from_str_content(content: &str) -> Result<Lexicon> {
        parse_lexicon(content)
    }
}
