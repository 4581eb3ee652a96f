//! Ad-record corpus: domain types, ingestion, dedup, splitting, annotation
//! agreement, aggregation tables, and analysis time series.
//!
//! All operations are pure over immutable datasets and safe to call from
//! multiple threads.

pub mod io;
mod stopwords;

pub use io::{
    ads_from_jsonl_str, deaths_from_csv_str, labels_from_jsonl_str, load_ads, load_deaths,
    load_labels, write_ads_jsonl, write_labels_jsonl, AdFormat,
};
pub use stopwords::is_stopword;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The fixed 15-theme vocabulary plus the unassigned bucket used by the weak
/// labeler when no phrase is close enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theme {
    EncourageVaccination,
    VaccineMandate,
    VaccineEquity,
    VaccineEfficacy,
    GovDistrust,
    GovTrust,
    VaccineRollout,
    VaccineSymptom,
    VaccineStatus,
    VaccineReligion,
    VaccineDevelopment,
    CovidPlan,
    VaccineMisinformation,
    NaturalImmunity,
    Vote,
    Unassigned,
}

impl Theme {
    pub const CLASS_COUNT: usize = 15;

    /// The 15 assignable classes, in class-index order.
    pub const CLASSES: [Theme; 15] = [
        Theme::EncourageVaccination,
        Theme::VaccineMandate,
        Theme::VaccineEquity,
        Theme::VaccineEfficacy,
        Theme::GovDistrust,
        Theme::GovTrust,
        Theme::VaccineRollout,
        Theme::VaccineSymptom,
        Theme::VaccineStatus,
        Theme::VaccineReligion,
        Theme::VaccineDevelopment,
        Theme::CovidPlan,
        Theme::VaccineMisinformation,
        Theme::NaturalImmunity,
        Theme::Vote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theme::EncourageVaccination => "EncourageVaccination",
            Theme::VaccineMandate => "VaccineMandate",
            Theme::VaccineEquity => "VaccineEquity",
            Theme::VaccineEfficacy => "VaccineEfficacy",
            Theme::GovDistrust => "GovDistrust",
            Theme::GovTrust => "GovTrust",
            Theme::VaccineRollout => "VaccineRollout",
            Theme::VaccineSymptom => "VaccineSymptom",
            Theme::VaccineStatus => "VaccineStatus",
            Theme::VaccineReligion => "VaccineReligion",
            Theme::VaccineDevelopment => "VaccineDevelopment",
            Theme::CovidPlan => "CovidPlan",
            Theme::VaccineMisinformation => "VaccineMisinformation",
            Theme::NaturalImmunity => "NaturalImmunity",
            Theme::Vote => "Vote",
            Theme::Unassigned => "Unassigned",
        }
    }

    pub fn from_name(s: &str) -> Option<Theme> {
        Theme::CLASSES
            .iter()
            .copied()
            .chain(std::iter::once(Theme::Unassigned))
            .find(|t| t.name() == s)
    }

    /// Class index in 0..15, or `None` for `Unassigned`.
    pub fn class_index(self) -> Option<usize> {
        Theme::CLASSES.iter().position(|&t| t == self)
    }

    pub fn from_class_index(idx: usize) -> Option<Theme> {
        Theme::CLASSES.get(idx).copied()
    }
}

impl std::fmt::Display for Theme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Moral-framing label: the six foundations plus an explicit `None` class.
/// Unlike the theme's `Unassigned`, `None` is a real class of the 7-way task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MfLabel {
    CareHarm,
    FairnessCheating,
    LoyaltyBetrayal,
    AuthoritySubversion,
    SanctityDegradation,
    LibertyOppression,
    None,
}

impl MfLabel {
    pub const CLASS_COUNT: usize = 7;

    pub const CLASSES: [MfLabel; 7] = [
        MfLabel::CareHarm,
        MfLabel::FairnessCheating,
        MfLabel::LoyaltyBetrayal,
        MfLabel::AuthoritySubversion,
        MfLabel::SanctityDegradation,
        MfLabel::LibertyOppression,
        MfLabel::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MfLabel::CareHarm => "CareHarm",
            MfLabel::FairnessCheating => "FairnessCheating",
            MfLabel::LoyaltyBetrayal => "LoyaltyBetrayal",
            MfLabel::AuthoritySubversion => "AuthoritySubversion",
            MfLabel::SanctityDegradation => "SanctityDegradation",
            MfLabel::LibertyOppression => "LibertyOppression",
            MfLabel::None => "None",
        }
    }

    pub fn from_name(s: &str) -> Option<MfLabel> {
        MfLabel::CLASSES.iter().copied().find(|m| m.name() == s)
    }

    pub fn class_index(self) -> usize {
        MfLabel::CLASSES.iter().position(|&m| m == self).unwrap()
    }

    pub fn from_class_index(idx: usize) -> Option<MfLabel> {
        MfLabel::CLASSES.get(idx).copied()
    }
}

impl std::fmt::Display for MfLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityType {
    PublicHealth,
    Commercial,
    Nonprofit,
    Political,
    Unknown,
}

impl EntityType {
    pub const ALL: [EntityType; 5] = [
        EntityType::PublicHealth,
        EntityType::Commercial,
        EntityType::Nonprofit,
        EntityType::Political,
        EntityType::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityType::PublicHealth => "PublicHealth",
            EntityType::Commercial => "Commercial",
            EntityType::Nonprofit => "Nonprofit",
            EntityType::Political => "Political",
            EntityType::Unknown => "Unknown",
        }
    }

    /// Unknown enum strings map to `Unknown` rather than erroring.
    pub fn parse_lossy(s: &str) -> EntityType {
        EntityType::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .unwrap_or(EntityType::Unknown)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoliticalView {
    Liberal,
    Conservative,
    Unknown,
}

impl PoliticalView {
    pub fn name(self) -> &'static str {
        match self {
            PoliticalView::Liberal => "Liberal",
            PoliticalView::Conservative => "Conservative",
            PoliticalView::Unknown => "Unknown",
        }
    }

    pub fn parse_lossy(s: &str) -> PoliticalView {
        match s {
            "Liberal" => PoliticalView::Liberal,
            "Conservative" => PoliticalView::Conservative,
            _ => PoliticalView::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeBucket {
    #[serde(rename = "18-24")]
    From18To24,
    #[serde(rename = "25-34")]
    From25To34,
    #[serde(rename = "35-44")]
    From35To44,
    #[serde(rename = "45-54")]
    From45To54,
    #[serde(rename = "55-64")]
    From55To64,
    #[serde(rename = "65+")]
    Over65,
    #[serde(rename = "unknown")]
    Unknown,
}

impl AgeBucket {
    pub const ALL: [AgeBucket; 7] = [
        AgeBucket::From18To24,
        AgeBucket::From25To34,
        AgeBucket::From35To44,
        AgeBucket::From45To54,
        AgeBucket::From55To64,
        AgeBucket::Over65,
        AgeBucket::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgeBucket::From18To24 => "18-24",
            AgeBucket::From25To34 => "25-34",
            AgeBucket::From35To44 => "35-44",
            AgeBucket::From45To54 => "45-54",
            AgeBucket::From55To64 => "55-64",
            AgeBucket::Over65 => "65+",
            AgeBucket::Unknown => "unknown",
        }
    }

    pub fn parse_lossy(s: &str) -> AgeBucket {
        AgeBucket::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .unwrap_or(AgeBucket::Unknown)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn name(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }

    pub fn parse_lossy(s: &str) -> Gender {
        match s {
            "male" => Gender::Male,
            "female" => Gender::Female,
            _ => Gender::Unknown,
        }
    }
}

/// Closed interval reported by the ad archive (spend, impressions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lower: f64,
    pub upper: f64,
}

impl ValueRange {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower > upper || lower < 0.0 {
            return Err(Error::invalid(format!(
                "invalid value range [{lower}, {upper}]"
            )));
        }
        Ok(ValueRange { lower, upper })
    }

    /// All analytics collapse the range to its midpoint.
    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemographicCell {
    pub age: AgeBucket,
    pub gender: Gender,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionShare {
    pub state: String,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdRecord {
    pub id: String,
    pub body: String,
    pub funding_entity: String,
    pub entity_type: EntityType,
    pub political_view: PoliticalView,
    pub spend: ValueRange,
    pub impressions: ValueRange,
    pub demographics: Vec<DemographicCell>,
    pub regions: Vec<RegionShare>,
    pub start_date: NaiveDate,
}

/// Share lists must sum to 1 within this tolerance when nonempty.
pub const SHARE_SUM_TOLERANCE: f64 = 0.02;

fn check_shares(kind: &str, shares: impl Iterator<Item = f64> + Clone) -> Result<()> {
    let mut any = false;
    let mut sum = 0.0;
    for s in shares {
        any = true;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!("{kind} share {s} outside [0, 1]")));
        }
        sum += s;
    }
    if any && (sum - 1.0).abs() > SHARE_SUM_TOLERANCE {
        return Err(Error::invalid(format!(
            "{kind} shares sum to {sum:.4}, expected 1 \u{b1} {SHARE_SUM_TOLERANCE}"
        )));
    }
    Ok(())
}

impl AdRecord {
    /// Validates the per-record invariants (share ranges/sums, id, ranges).
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("empty ad id"));
        }
        ValueRange::new(self.spend.lower, self.spend.upper)?;
        ValueRange::new(self.impressions.lower, self.impressions.upper)?;
        check_shares("demographic", self.demographics.iter().map(|d| d.share))?;
        check_shares("region", self.regions.iter().map(|r| r.share))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    Gold,
    Weak,
}

/// Theme and moral-framing assignment for one ad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPair {
    pub ad_id: String,
    pub theme: Theme,
    pub mf: MfLabel,
    pub source: LabelSource,
}

/// Records plus (optionally) a label per ad id.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub records: Vec<AdRecord>,
    pub labels: Option<BTreeMap<String, LabelPair>>,
}

impl Dataset {
    pub fn new(records: Vec<AdRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::invalid(format!("duplicate ad id '{}'", r.id)));
            }
        }
        Ok(Dataset {
            records,
            labels: None,
        })
    }

    /// Attaches labels; every label must resolve to a record.
    pub fn with_labels(mut self, labels: Vec<LabelPair>) -> Result<Self> {
        let ids: HashSet<&str> = self.records.iter().map(|r| r.id.as_str()).collect();
        let mut map = BTreeMap::new();
        for l in labels {
            if !ids.contains(l.ad_id.as_str()) {
                return Err(Error::invalid(format!(
                    "label for unknown ad id '{}'",
                    l.ad_id
                )));
            }
            if map.insert(l.ad_id.clone(), l).is_some() {
                return Err(Error::invalid("duplicate label ad_id"));
            }
        }
        self.labels = Some(map);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn label_of(&self, id: &str) -> Option<&LabelPair> {
        self.labels.as_ref().and_then(|m| m.get(id))
    }

    fn labels_required(&self) -> Result<&BTreeMap<String, LabelPair>> {
        self.labels
            .as_ref()
            .ok_or_else(|| Error::MissingInput("dataset has no labels".into()))
    }

    /// Content digest over ids, bodies, and labels, for run manifests.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.records {
            hasher.update(r.id.as_bytes());
            hasher.update([0u8]);
            hasher.update(r.body.as_bytes());
            hasher.update([1u8]);
        }
        if let Some(labels) = &self.labels {
            for (id, l) in labels {
                hasher.update(id.as_bytes());
                hasher.update(l.theme.name().as_bytes());
                hasher.update(l.mf.name().as_bytes());
            }
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn subset_by_indices(&self, idx: &[usize]) -> Dataset {
        let records: Vec<AdRecord> = idx.iter().map(|&i| self.records[i].clone()).collect();
        let labels = self.labels.as_ref().map(|m| {
            records
                .iter()
                .filter_map(|r| m.get(&r.id).cloned().map(|l| (r.id.clone(), l)))
                .collect()
        });
        Dataset { records, labels }
    }
}

/// Dated daily series, e.g. new deaths per day or themed impressions per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: String, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::invalid("time series dates/values length mismatch"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "time series dates must be strictly increasing",
            ));
        }
        Ok(TimeSeries {
            name,
            dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every interior calendar day is present.
    pub fn is_contiguous_daily(&self) -> bool {
        self.dates.windows(2).all(|w| w[1] - w[0] == Duration::days(1))
    }

    /// Restricts to `[start, end]`; errors if any day in the window is absent.
    pub fn window(&self, start: NaiveDate, end: NaiveDate) -> Result<TimeSeries> {
        let mut dates = Vec::new();
        let mut values = Vec::new();
        let mut day = start;
        while day <= end {
            match self.dates.binary_search(&day) {
                Ok(i) => {
                    dates.push(day);
                    values.push(self.values[i]);
                }
                Err(_) => {
                    return Err(Error::invalid(format!(
                        "series '{}' missing date {day}",
                        self.name
                    )))
                }
            }
            day += Duration::days(1);
        }
        TimeSeries::new(self.name.clone(), dates, values)
    }
}

/// Lowercase + whitespace collapse; the equality key for content dedup.
pub fn normalize_body(body: &str) -> String {
    body.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased alphabetic-run tokens ("COVID-19 shot!" → ["covid", "shot"]).
pub fn tokenize_alpha(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            for lc in ch.to_lowercase() {
                cur.push(lc);
            }
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Retains the first occurrence (input order) of each distinct normalized
/// body. Labels of dropped ids are discarded.
pub fn dedup_by_content(d: &Dataset) -> Dataset {
    let mut seen = HashSet::new();
    let keep: Vec<usize> = d
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| seen.insert(normalize_body(&r.body)))
        .map(|(i, _)| i)
        .collect();
    d.subset_by_indices(&keep)
}

/// Deterministic index partition: shuffle by seed, sizes
/// floor(n·train) / floor(n·val) / remainder.
pub fn split_indices(
    n: usize,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let (tr, va, te) = ratios;
    if tr <= 0.0 || va <= 0.0 || te <= 0.0 {
        return Err(Error::invalid("split ratios must be positive"));
    }
    if (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split ratios must sum to 1"));
    }
    if n == 0 {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = (n as f64 * tr).floor() as usize;
    let n_val = (n as f64 * va).floor() as usize;
    let val_end = n_train + n_val;
    Ok((
        idx[..n_train].to_vec(),
        idx[n_train..val_end].to_vec(),
        idx[val_end..].to_vec(),
    ))
}

/// Splits a dataset into train/val/test partitions (disjoint, exhaustive).
pub fn split(
    d: &Dataset,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let (a, b, c) = split_indices(d.len(), ratios, seed)?;
    Ok((
        d.subset_by_indices(&a),
        d.subset_by_indices(&b),
        d.subset_by_indices(&c),
    ))
}

/// Cohen's kappa: (p_o − p_e) / (1 − p_e) over two equal-length label
/// sequences. Errors when chance agreement is exactly 1.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::invalid(
            "cohen_kappa needs equal nonzero-length sequences",
        ));
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b.iter()).filter(|(x, y)| x == y).count() as f64 / n;
    let mut count_a: HashMap<&T, usize> = HashMap::new();
    let mut count_b: HashMap<&T, usize> = HashMap::new();
    for x in a {
        *count_a.entry(x).or_default() += 1;
    }
    for y in b {
        *count_b.entry(y).or_default() += 1;
    }
    let expected: f64 = count_a
        .iter()
        .filter_map(|(k, &ca)| count_b.get(k).map(|&cb| (ca as f64 / n) * (cb as f64 / n)))
        .sum();
    if (1.0 - expected).abs() < 1e-12 {
        return Err(Error::Degenerate("degenerate agreement".into()));
    }
    Ok(((observed - expected) / (1.0 - expected)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Theme,
    Mf,
    EntityType,
    FundingEntity,
    AgeGender,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Count,
    SpendMid,
    ImpressionsMid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub group: String,
    pub value: f64,
}

/// Bucket for labeled-but-unassigned records in theme/mf tables.
pub const UNLABELED_GROUP: &str = "Unlabeled";

/// Grouped totals, sorted by value descending (ties by group name).
///
/// Spend/impression measures use range midpoints. For `AgeGender` each ad
/// contributes to every listed bucket weighted by its share, so `Count`
/// yields fractional expected-ad mass per bucket.
pub fn aggregate(d: &Dataset, group_by: GroupBy, measure: Measure) -> Result<Vec<AggregateRow>> {
    if matches!(group_by, GroupBy::Theme | GroupBy::Mf) {
        d.labels_required()?;
    }
    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    for r in &d.records {
        let base = match measure {
            Measure::Count => 1.0,
            Measure::SpendMid => r.spend.midpoint(),
            Measure::ImpressionsMid => r.impressions.midpoint(),
        };
        match group_by {
            GroupBy::Theme => {
                let key = match d.label_of(&r.id) {
                    Some(l) => l.theme.name().to_string(),
                    None => UNLABELED_GROUP.to_string(),
                };
                *totals.entry(key).or_default() += base;
            }
            GroupBy::Mf => {
                let key = match d.label_of(&r.id) {
                    Some(l) => l.mf.name().to_string(),
                    None => UNLABELED_GROUP.to_string(),
                };
                *totals.entry(key).or_default() += base;
            }
            GroupBy::EntityType => {
                *totals.entry(r.entity_type.name().to_string()).or_default() += base;
            }
            GroupBy::FundingEntity => {
                *totals.entry(r.funding_entity.clone()).or_default() += base;
            }
            GroupBy::AgeGender => {
                for cell in &r.demographics {
                    let key = format!("{}:{}", cell.age.name(), cell.gender.name());
                    *totals.entry(key).or_default() += base * cell.share;
                }
            }
        }
    }
    let mut rows: Vec<AggregateRow> = totals
        .into_iter()
        .map(|(group, value)| AggregateRow { group, value })
        .collect();
    rows.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.group.cmp(&b.group))
    });
    Ok(rows)
}

/// Top-k term counts over ads of the given theme. Lowercased alphabetic
/// tokens, bundled stopword list applied, ties broken lexicographically.
pub fn term_frequency(d: &Dataset, theme: Theme, top_k: usize) -> Result<Vec<(String, u64)>> {
    d.labels_required()?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in &d.records {
        if d.label_of(&r.id).map(|l| l.theme) != Some(theme) {
            continue;
        }
        for tok in tokenize_alpha(&r.body) {
            if !is_stopword(&tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(top_k);
    Ok(rows)
}

/// Daily impression-midpoint totals over ads in `themes`, keyed by ad start
/// date, zero-filled over `[start, end]`.
pub fn build_time_series(
    d: &Dataset,
    themes: &[Theme],
    start: NaiveDate,
    end: NaiveDate,
) -> Result<TimeSeries> {
    if start > end {
        return Err(Error::invalid("time series start after end"));
    }
    d.labels_required()?;
    let theme_set: HashSet<Theme> = themes.iter().copied().collect();
    let days = (end - start).num_days() as usize + 1;
    let mut values = vec![0.0; days];
    for r in &d.records {
        let Some(label) = d.label_of(&r.id) else {
            continue;
        };
        if !theme_set.contains(&label.theme) {
            continue;
        }
        if r.start_date < start || r.start_date > end {
            continue;
        }
        let offset = (r.start_date - start).num_days() as usize;
        values[offset] += r.impressions.midpoint();
    }
    let dates = (0..days as i64).map(|o| start + Duration::days(o)).collect();
    TimeSeries::new("AdsImpressions".into(), dates, values)
}
