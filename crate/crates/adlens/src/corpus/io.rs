//! File ingestion and emission for ad records, labels, and the deaths series.
//!
//! JSONL ad schema (one object per line):
//! `{"id", "body", "funding_entity", "entity_type", "political_view"?,
//!   "spend": {"lower", "upper"}, "impressions": {"lower", "upper"},
//!   "demographics": [{"age", "gender", "share"}],
//!   "regions": [{"state", "share"}], "start_date": "YYYY-MM-DD"}`
//!
//! CSV ads carry the same fields flattened; `demographics` is encoded
//! `age:gender:share|...` and `regions` `ST:share|...`.
//!
//! Label JSONL: `{"ad_id", "theme", "mf", "source"?}` (source defaults Gold).
//! Deaths CSV: header `date,new_deaths`, one row per consecutive day.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use super::{
    AdRecord, AgeBucket, Dataset, DemographicCell, EntityType, Gender, LabelPair, LabelSource,
    MfLabel, PoliticalView, RegionShare, Theme, TimeSeries, ValueRange,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdFormat {
    Jsonl,
    Csv,
}

#[derive(Deserialize)]
struct RawRange {
    lower: f64,
    upper: f64,
}

#[derive(Deserialize)]
struct RawDemographic {
    age: String,
    gender: String,
    share: f64,
}

#[derive(Deserialize)]
struct RawRegion {
    state: String,
    share: f64,
}

#[derive(Deserialize)]
struct RawAd {
    id: String,
    body: String,
    funding_entity: String,
    #[serde(default)]
    entity_type: Option<String>,
    #[serde(default)]
    political_view: Option<String>,
    spend: RawRange,
    impressions: RawRange,
    #[serde(default)]
    demographics: Vec<RawDemographic>,
    #[serde(default)]
    regions: Vec<RawRegion>,
    start_date: String,
}

fn convert_ad(raw: RawAd, line: usize) -> Result<AdRecord> {
    let err = |msg: String| Error::parse(line, msg);
    let start_date = NaiveDate::parse_from_str(&raw.start_date, "%Y-%m-%d")
        .map_err(|e| err(format!("bad start_date '{}': {e}", raw.start_date)))?;
    let record = AdRecord {
        id: raw.id,
        body: raw.body,
        funding_entity: raw.funding_entity,
        entity_type: raw
            .entity_type
            .as_deref()
            .map(EntityType::parse_lossy)
            .unwrap_or(EntityType::Unknown),
        political_view: raw
            .political_view
            .as_deref()
            .map(PoliticalView::parse_lossy)
            .unwrap_or(PoliticalView::Unknown),
        spend: ValueRange {
            lower: raw.spend.lower,
            upper: raw.spend.upper,
        },
        impressions: ValueRange {
            lower: raw.impressions.lower,
            upper: raw.impressions.upper,
        },
        demographics: raw
            .demographics
            .into_iter()
            .map(|d| DemographicCell {
                age: AgeBucket::parse_lossy(&d.age),
                gender: Gender::parse_lossy(&d.gender),
                share: d.share,
            })
            .collect(),
        regions: raw
            .regions
            .into_iter()
            .map(|r| RegionShare {
                state: r.state,
                share: r.share,
            })
            .collect(),
        start_date,
    };
    record.validate().map_err(|e| err(e.to_string()))?;
    Ok(record)
}

fn read_jsonl_ads(reader: impl BufRead) -> Result<Vec<AdRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawAd = serde_json::from_str(&line)
            .map_err(|e| Error::parse(line_no, format!("bad ad json: {e}")))?;
        records.push(convert_ad(raw, line_no)?);
    }
    Ok(records)
}

fn parse_pipe_demographics(s: &str, line: usize) -> Result<Vec<DemographicCell>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split('|')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::parse(
                    line,
                    format!("bad demographics cell '{item}', want age:gender:share"),
                ));
            }
            let share: f64 = parts[2]
                .parse()
                .map_err(|e| Error::parse(line, format!("bad share '{}': {e}", parts[2])))?;
            Ok(DemographicCell {
                age: AgeBucket::parse_lossy(parts[0]),
                gender: Gender::parse_lossy(parts[1]),
                share,
            })
        })
        .collect()
}

fn parse_pipe_regions(s: &str, line: usize) -> Result<Vec<RegionShare>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split('|')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 2 {
                return Err(Error::parse(
                    line,
                    format!("bad region cell '{item}', want state:share"),
                ));
            }
            let share: f64 = parts[1]
                .parse()
                .map_err(|e| Error::parse(line, format!("bad share '{}': {e}", parts[1])))?;
            Ok(RegionShare {
                state: parts[0].to_string(),
                share,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct CsvAdRow {
    id: String,
    body: String,
    funding_entity: String,
    #[serde(default)]
    entity_type: String,
    #[serde(default)]
    political_view: String,
    spend_lower: f64,
    spend_upper: f64,
    impressions_lower: f64,
    impressions_upper: f64,
    #[serde(default)]
    demographics: String,
    #[serde(default)]
    regions: String,
    start_date: String,
}

fn read_csv_ads(reader: impl Read) -> Result<Vec<AdRecord>> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut records = Vec::new();
    for (i, row) in csv_reader.deserialize::<CsvAdRow>().enumerate() {
        let line_no = i + 2; // header is line 1
        let row = row.map_err(|e| Error::parse(line_no, format!("bad ad csv row: {e}")))?;
        let raw = RawAd {
            id: row.id,
            body: row.body,
            funding_entity: row.funding_entity,
            entity_type: Some(row.entity_type),
            political_view: Some(row.political_view),
            spend: RawRange {
                lower: row.spend_lower,
                upper: row.spend_upper,
            },
            impressions: RawRange {
                lower: row.impressions_lower,
                upper: row.impressions_upper,
            },
            demographics: Vec::new(),
            regions: Vec::new(),
            start_date: row.start_date,
        };
        let mut record = convert_ad(raw, line_no)?;
        record.demographics = parse_pipe_demographics(&row.demographics, line_no)?;
        record.regions = parse_pipe_regions(&row.regions, line_no)?;
        record.validate().map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::parse(line_no, other.to_string()),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Loads ads from a JSONL or CSV file into a validated dataset.
pub fn load_ads(path: impl AsRef<Path>, format: AdFormat) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    let records = match format {
        AdFormat::Jsonl => read_jsonl_ads(BufReader::new(file))?,
        AdFormat::Csv => read_csv_ads(file)?,
    };
    Dataset::new(records)
}

/// Parses ads from an in-memory JSONL string (fixtures, tests).
pub fn ads_from_jsonl_str(content: &str) -> Result<Dataset> {
    Dataset::new(read_jsonl_ads(BufReader::new(content.as_bytes()))?)
}

pub fn write_ads_jsonl(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path.as_ref())?);
    for r in &d.records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::invalid(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct RawLabel {
    ad_id: String,
    theme: String,
    mf: String,
    #[serde(default)]
    source: Option<String>,
}

/// Loads label pairs from JSONL. Theme/mf strings must be from the fixed
/// vocabularies. `source` defaults to Gold when absent.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelPair>> {
    let file = File::open(path.as_ref())?;
    labels_from_reader(BufReader::new(file))
}

pub fn labels_from_jsonl_str(content: &str) -> Result<Vec<LabelPair>> {
    labels_from_reader(BufReader::new(content.as_bytes()))
}

fn labels_from_reader(reader: impl BufRead) -> Result<Vec<LabelPair>> {
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLabel = serde_json::from_str(&line)
            .map_err(|e| Error::parse(line_no, format!("bad label json: {e}")))?;
        let theme = Theme::from_name(&raw.theme)
            .ok_or_else(|| Error::parse(line_no, format!("unknown theme '{}'", raw.theme)))?;
        let mf = MfLabel::from_name(&raw.mf)
            .ok_or_else(|| Error::parse(line_no, format!("unknown mf '{}'", raw.mf)))?;
        let source = match raw.source.as_deref() {
            None | Some("Gold") => LabelSource::Gold,
            Some("Weak") => LabelSource::Weak,
            Some(other) => {
                return Err(Error::parse(line_no, format!("unknown source '{other}'")))
            }
        };
        labels.push(LabelPair {
            ad_id: raw.ad_id,
            theme,
            mf,
            source,
        });
    }
    Ok(labels)
}

pub fn write_labels_jsonl(labels: &[LabelPair], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path.as_ref())?);
    for l in labels {
        serde_json::to_writer(&mut out, l).map_err(|e| Error::invalid(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Loads the daily deaths CSV (`date,new_deaths`). Dates must be strictly
/// increasing with no interior gaps.
pub fn load_deaths(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let file = File::open(path.as_ref())?;
    deaths_from_reader(file)
}

pub fn deaths_from_csv_str(content: &str) -> Result<TimeSeries> {
    deaths_from_reader(content.as_bytes())
}

fn deaths_from_reader(reader: impl Read) -> Result<TimeSeries> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let line_no = i + 2;
        let row = row.map_err(|e| Error::parse(line_no, format!("bad deaths row: {e}")))?;
        if row.len() < 2 {
            return Err(Error::parse(line_no, "expected date,new_deaths"));
        }
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
            .map_err(|e| Error::parse(line_no, format!("bad date '{}': {e}", &row[0])))?;
        let value: f64 = row[1]
            .trim()
            .parse()
            .map_err(|e| Error::parse(line_no, format!("bad new_deaths '{}': {e}", &row[1])))?;
        dates.push(date);
        values.push(value);
    }
    if dates.is_empty() {
        return Err(Error::invalid("deaths file has no rows"));
    }
    let series = TimeSeries::new("Deaths".into(), dates, values)?;
    if !series.is_contiguous_daily() {
        return Err(Error::invalid(
            "deaths series has missing interior dates; one row per day is required",
        ));
    }
    Ok(series)
}
