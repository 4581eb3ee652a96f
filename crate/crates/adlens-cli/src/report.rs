//! Pipeline report: the JSON document `analyze` emits, plus the CSV side
//! tables. Everything is deterministic for fixed inputs; wall-clock fields
//! live in the separate meta file written by the commands.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use adlens::corpus::{
    aggregate, build_time_series, term_frequency, AgeBucket, AggregateRow, Dataset, EntityType,
    Gender, GroupBy, Measure, MfLabel, PoliticalView, Theme, TimeSeries,
};
use adlens::error::{Error, Result};
use adlens::stats::{adf, chi_square, granger, two_sample_t, ContingencyTable, Dof, LagSelect};
use adlens::weaklabel::QualityReport;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Themes highlighted in the demographic and causality sections.
pub const HEADLINE_THEMES: [Theme; 4] = [
    Theme::EncourageVaccination,
    Theme::VaccineMandate,
    Theme::GovTrust,
    Theme::VaccineRollout,
];

#[derive(Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub corpus: CorpusDigest,
    /// Present when gold labels were supplied for comparison.
    pub weak_label_quality: Option<QualityReport>,
    /// Training manifests embedded on request.
    pub strategy_metrics: Option<Vec<serde_json::Value>>,
    pub analysis: AnalysisBlock,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusDigest {
    pub records: usize,
    pub labeled: usize,
    pub label_coverage: f64,
    pub digest: String,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnalysisBlock {
    /// Theme tables per measure (count / impressions_mid / spend_mid).
    pub theme_tables: BTreeMap<String, Vec<AggregateRow>>,
    pub mf_tables: BTreeMap<String, Vec<AggregateRow>>,
    /// Spend by (entity type, theme).
    pub entity_theme_spend: Vec<EntityThemeRow>,
    /// Impression mass per age:gender bucket.
    pub age_gender_impressions: Vec<AggregateRow>,
    pub chi_square: Vec<ChiSquareEntry>,
    pub t_tests: Vec<TTestEntry>,
    /// Top terms per headline theme (wordcloud data).
    pub term_frequency: BTreeMap<String, Vec<(String, u64)>>,
    pub granger: Option<GrangerBlock>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EntityThemeRow {
    pub entity_type: String,
    pub theme: String,
    pub spend_mid: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChiSquareEntry {
    pub group: String,
    pub ads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TTestEntry {
    pub theme: String,
    pub age: String,
    pub n_ads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GrangerBlock {
    pub window: (NaiveDate, NaiveDate),
    pub themes: Vec<String>,
    pub adf: Vec<AdfEntry>,
    pub tests: Vec<GrangerEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AdfEntry {
    pub series: String,
    pub max_lag: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub stationary_at_5pct: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GrangerEntry {
    pub direction: String,
    pub lag: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant_at_5pct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

pub fn corpus_digest(d: &Dataset) -> CorpusDigest {
    let labeled = d.labels.as_ref().map(|m| m.len()).unwrap_or(0);
    let date_range = d
        .records
        .iter()
        .map(|r| r.start_date)
        .fold(None, |acc: Option<(NaiveDate, NaiveDate)>, date| match acc {
            None => Some((date, date)),
            Some((lo, hi)) => Some((lo.min(date), hi.max(date))),
        });
    CorpusDigest {
        records: d.len(),
        labeled,
        label_coverage: if d.is_empty() {
            0.0
        } else {
            labeled as f64 / d.len() as f64
        },
        digest: d.digest(),
        date_range,
    }
}

fn theme_mf_table(d: &Dataset, group: &str, filter: impl Fn(&adlens::corpus::AdRecord) -> bool)
    -> Result<Option<ChiSquareEntry>> {
    let labels = d.labels.as_ref().expect("labels checked by caller");
    // Count (theme, mf) over labeled ads passing the filter.
    let mut counts: BTreeMap<(Theme, MfLabel), u64> = BTreeMap::new();
    let mut ads = 0usize;
    for r in &d.records {
        if !filter(r) {
            continue;
        }
        let Some(l) = labels.get(&r.id) else { continue };
        if l.theme == Theme::Unassigned {
            continue;
        }
        *counts.entry((l.theme, l.mf)).or_default() += 1;
        ads += 1;
    }
    if ads == 0 {
        return Ok(None);
    }
    let themes: Vec<Theme> = Theme::CLASSES
        .iter()
        .copied()
        .filter(|t| counts.keys().any(|(kt, _)| kt == t))
        .collect();
    let mfs: Vec<MfLabel> = MfLabel::CLASSES
        .iter()
        .copied()
        .filter(|m| counts.keys().any(|(_, km)| km == m))
        .collect();
    if themes.len() < 2 || mfs.len() < 2 {
        return Ok(Some(ChiSquareEntry {
            group: group.to_string(),
            ads,
            statistic: None,
            dof: None,
            p_value: None,
            skipped: Some("needs at least a 2x2 table after dropping empty rows/columns".into()),
        }));
    }
    let matrix: Vec<Vec<u64>> = themes
        .iter()
        .map(|t| mfs.iter().map(|m| *counts.get(&(*t, *m)).unwrap_or(&0)).collect())
        .collect();
    let table = ContingencyTable::new(
        matrix,
        themes.iter().map(|t| t.name().to_string()).collect(),
        mfs.iter().map(|m| m.name().to_string()).collect(),
    )?;
    let entry = match chi_square(&table) {
        Ok(res) => ChiSquareEntry {
            group: group.to_string(),
            ads,
            statistic: Some(res.statistic),
            dof: match res.dof {
                Dof::Single(v) => Some(v),
                Dof::Pair(a, _) => Some(a),
            },
            p_value: Some(res.p_value),
            skipped: None,
        },
        Err(e) => ChiSquareEntry {
            group: group.to_string(),
            ads,
            statistic: None,
            dof: None,
            p_value: None,
            skipped: Some(e.to_string()),
        },
    };
    Ok(Some(entry))
}

fn demographic_t_tests(d: &Dataset) -> Result<Vec<TTestEntry>> {
    let labels = d.labels.as_ref().expect("labels checked by caller");
    let mut entries = Vec::new();
    for theme in HEADLINE_THEMES {
        let ads: Vec<&adlens::corpus::AdRecord> = d
            .records
            .iter()
            .filter(|r| labels.get(&r.id).map(|l| l.theme) == Some(theme))
            .collect();
        for age in AgeBucket::ALL.iter().filter(|a| **a != AgeBucket::Unknown) {
            // Observation per ad: share(age, gender) × impressions midpoint,
            // with absent cells contributing 0.
            let sample = |gender: Gender| -> Vec<f64> {
                ads.iter()
                    .map(|r| {
                        let share: f64 = r
                            .demographics
                            .iter()
                            .filter(|c| c.age == *age && c.gender == gender)
                            .map(|c| c.share)
                            .sum();
                        share * r.impressions.midpoint()
                    })
                    .collect()
            };
            let female = sample(Gender::Female);
            let male = sample(Gender::Male);
            let base = TTestEntry {
                theme: theme.name().to_string(),
                age: age.name().to_string(),
                n_ads: ads.len(),
                statistic: None,
                dof: None,
                p_value: None,
                skipped: None,
            };
            let entry = if ads.len() < 2 {
                TTestEntry {
                    skipped: Some("fewer than 2 ads".into()),
                    ..base
                }
            } else {
                match two_sample_t(&female, &male, true) {
                    Ok(res) => TTestEntry {
                        statistic: Some(res.statistic),
                        dof: match res.dof {
                            Dof::Single(v) => Some(v),
                            Dof::Pair(a, _) => Some(a),
                        },
                        p_value: Some(res.p_value),
                        ..base
                    },
                    Err(e) => TTestEntry {
                        skipped: Some(e.to_string()),
                        ..base
                    },
                }
            };
            entries.push(entry);
        }
    }
    Ok(entries)
}

fn granger_block(
    d: &Dataset,
    deaths: &TimeSeries,
    themes: &[Theme],
    max_lag: usize,
) -> Result<GrangerBlock> {
    let Some((start, end)) = d
        .records
        .iter()
        .map(|r| r.start_date)
        .fold(None, |acc: Option<(NaiveDate, NaiveDate)>, date| match acc {
            None => Some((date, date)),
            Some((lo, hi)) => Some((lo.min(date), hi.max(date))),
        })
    else {
        return Err(Error::invalid("no ads to build a time series from"));
    };
    let impressions = build_time_series(d, themes, start, end)?;
    let deaths_window = deaths.window(start, end).map_err(|e| {
        Error::invalid(format!(
            "deaths series does not cover the ads window {start}..{end}: {e}"
        ))
    })?;
    let n = impressions.len();
    let adf_max_lag = ((n.saturating_sub(10)).min(14)).max(1);
    let mut adf_entries = Vec::new();
    for series in [&deaths_window, &impressions] {
        let res = adf(series, adf_max_lag, LagSelect::Aic)?;
        adf_entries.push(AdfEntry {
            series: series.name.clone(),
            max_lag: adf_max_lag,
            statistic: res.statistic,
            p_value: res.p_value,
            stationary_at_5pct: res.p_value < 0.05,
        });
    }
    // Feasible Granger lags satisfy n >= 3·lag + 10.
    let feasible = if n > 10 { (n - 10) / 3 } else { 0 };
    let sweep_max = max_lag.min(feasible);
    let mut tests = Vec::new();
    for lag in 1..=sweep_max {
        for (direction, x, y) in [
            ("deaths_to_impressions", &deaths_window, &impressions),
            ("impressions_to_deaths", &impressions, &deaths_window),
        ] {
            let entry = match granger(x, y, lag) {
                Ok(res) => GrangerEntry {
                    direction: direction.to_string(),
                    lag,
                    f_statistic: Some(res.statistic),
                    p_value: Some(res.p_value),
                    significant_at_5pct: Some(res.p_value < 0.05),
                    skipped: None,
                },
                Err(e) => GrangerEntry {
                    direction: direction.to_string(),
                    lag,
                    f_statistic: None,
                    p_value: None,
                    significant_at_5pct: None,
                    skipped: Some(e.to_string()),
                },
            };
            tests.push(entry);
        }
    }
    Ok(GrangerBlock {
        window: (start, end),
        themes: themes.iter().map(|t| t.name().to_string()).collect(),
        adf: adf_entries,
        tests,
    })
}

/// Builds the full analysis block. `deaths` enables the causality section.
pub fn build_analysis(
    d: &Dataset,
    deaths: Option<&TimeSeries>,
    granger_max_lag: usize,
    top_terms: usize,
) -> Result<AnalysisBlock> {
    if d.labels.is_none() {
        return Err(Error::MissingInput("analysis requires labels".into()));
    }
    let mut theme_tables = BTreeMap::new();
    let mut mf_tables = BTreeMap::new();
    for (name, measure) in [
        ("count", Measure::Count),
        ("impressions_mid", Measure::ImpressionsMid),
        ("spend_mid", Measure::SpendMid),
    ] {
        theme_tables.insert(name.to_string(), aggregate(d, GroupBy::Theme, measure)?);
        mf_tables.insert(name.to_string(), aggregate(d, GroupBy::Mf, measure)?);
    }

    let mut entity_theme_spend = Vec::new();
    for entity_type in EntityType::ALL {
        let records: Vec<adlens::corpus::AdRecord> = d
            .records
            .iter()
            .filter(|r| r.entity_type == entity_type)
            .cloned()
            .collect();
        if records.is_empty() {
            continue;
        }
        let labels = d.labels.as_ref().map(|m| {
            records
                .iter()
                .filter_map(|r| m.get(&r.id).map(|l| (r.id.clone(), l.clone())))
                .collect()
        });
        let sub = Dataset { records, labels };
        for row in aggregate(&sub, GroupBy::Theme, Measure::SpendMid)? {
            entity_theme_spend.push(EntityThemeRow {
                entity_type: entity_type.name().to_string(),
                theme: row.group,
                spend_mid: row.value,
            });
        }
    }

    let age_gender_impressions = aggregate(d, GroupBy::AgeGender, Measure::ImpressionsMid)?;

    let mut chi_entries = Vec::new();
    for entity_type in EntityType::ALL {
        if let Some(entry) = theme_mf_table(d, entity_type.name(), |r| {
            r.entity_type == entity_type
        })? {
            chi_entries.push(entry);
        }
    }
    for view in [PoliticalView::Liberal, PoliticalView::Conservative] {
        if let Some(entry) = theme_mf_table(d, view.name(), |r| r.political_view == view)? {
            chi_entries.push(entry);
        }
    }

    let t_tests = demographic_t_tests(d)?;

    let mut tf = BTreeMap::new();
    for theme in HEADLINE_THEMES {
        tf.insert(
            theme.name().to_string(),
            term_frequency(d, theme, top_terms)?,
        );
    }

    let granger = match deaths {
        Some(deaths) => Some(granger_block(d, deaths, &HEADLINE_THEMES, granger_max_lag)?),
        None => None,
    };

    Ok(AnalysisBlock {
        theme_tables,
        mf_tables,
        entity_theme_spend,
        age_gender_impressions,
        chi_square: chi_entries,
        t_tests,
        term_frequency: tf,
        granger,
    })
}

fn fmt_value(v: f64) -> String {
    // Shortest roundtrip form keeps CSVs byte-stable and exact.
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json's float formatting (ryu) via Value keeps one code path.
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

/// Side-table CSV emission next to the report.
pub fn write_csv_tables(dir: &Path, analysis: &AnalysisBlock) -> Result<()> {
    let write = |name: &str, header: &str, rows: Vec<String>| -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
        writeln!(out, "{header}")?;
        for row in rows {
            writeln!(out, "{row}")?;
        }
        out.flush()?;
        Ok(())
    };

    let mut theme_rows: BTreeMap<&str, [f64; 3]> = BTreeMap::new();
    for (idx, key) in ["count", "impressions_mid", "spend_mid"].iter().enumerate() {
        for row in &analysis.theme_tables[*key] {
            theme_rows.entry(row.group.as_str()).or_default()[idx] = row.value;
        }
    }
    write(
        "theme_distribution.csv",
        "theme,count,impressions_mid,spend_mid",
        theme_rows
            .iter()
            .map(|(theme, v)| {
                format!(
                    "{theme},{},{},{}",
                    fmt_value(v[0]),
                    fmt_value(v[1]),
                    fmt_value(v[2])
                )
            })
            .collect(),
    )?;

    write(
        "demographics.csv",
        "bucket,impressions_mid",
        analysis
            .age_gender_impressions
            .iter()
            .map(|r| format!("{},{}", r.group, fmt_value(r.value)))
            .collect(),
    )?;

    write(
        "term_frequency.csv",
        "theme,term,count",
        analysis
            .term_frequency
            .iter()
            .flat_map(|(theme, rows)| {
                rows.iter()
                    .map(move |(term, count)| format!("{theme},{term},{count}"))
            })
            .collect(),
    )?;

    write(
        "t_tests.csv",
        "theme,age,n_ads,statistic,dof,p_value,skipped",
        analysis
            .t_tests
            .iter()
            .map(|t| {
                format!(
                    "{},{},{},{},{},{},{}",
                    t.theme,
                    t.age,
                    t.n_ads,
                    t.statistic.map(fmt_value).unwrap_or_default(),
                    t.dof.map(fmt_value).unwrap_or_default(),
                    t.p_value.map(fmt_value).unwrap_or_default(),
                    t.skipped.clone().unwrap_or_default()
                )
            })
            .collect(),
    )?;

    if let Some(granger) = &analysis.granger {
        write(
            "granger.csv",
            "direction,lag,f_statistic,p_value,significant_at_5pct,skipped",
            granger
                .tests
                .iter()
                .map(|g| {
                    format!(
                        "{},{},{},{},{},{}",
                        g.direction,
                        g.lag,
                        g.f_statistic.map(fmt_value).unwrap_or_default(),
                        g.p_value.map(fmt_value).unwrap_or_default(),
                        g.significant_at_5pct
                            .map(|b| b.to_string())
                            .unwrap_or_default(),
                        g.skipped.clone().unwrap_or_default()
                    )
                })
                .collect(),
        )?;
    }
    Ok(())
}

/// Writes the wall-clock metadata sidecar; the main artifacts stay
/// deterministic.
pub fn write_meta(dir: &Path, command: &str) -> Result<()> {
    let meta = serde_json::json!({
        "command": command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "generated_at": chrono::Utc::now().to_rfc3339(),
    });
    std::fs::write(
        dir.join("run.meta.json"),
        serde_json::to_string_pretty(&meta).map_err(|e| Error::invalid(e.to_string()))?,
    )?;
    Ok(())
}
