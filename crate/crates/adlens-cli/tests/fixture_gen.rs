//! Regenerates the bundled synthetic fixture (50 ads, gold labels, planted
//! deaths series, small training config). Run on demand:
//! `cargo test -p adlens-cli --test fixture_gen -- --ignored`

use std::io::Write;
use std::path::PathBuf;

use adlens::corpus::{build_time_series, write_ads_jsonl, write_labels_jsonl, Dataset, Theme};
use adlens::synth::{planted_deaths, synthetic_ads};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

const HEADLINE: [Theme; 4] = [
    Theme::EncourageVaccination,
    Theme::VaccineMandate,
    Theme::GovTrust,
    Theme::VaccineRollout,
];

#[test]
#[ignore = "regenerates committed fixtures"]
fn regenerate_fixtures() {
    let dir = fixture_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let start = chrono::NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let (mut records, mut gold) = synthetic_ads(49, 20240901, start);
    // One deliberate duplicate-content pair so the pipeline's dedup step
    // has work to do.
    let mut dup = records[0].clone();
    dup.id = "ad0049".into();
    let mut dup_label = gold[0].clone();
    dup_label.ad_id = dup.id.clone();
    records.push(dup);
    gold.push(dup_label);
    let dataset = Dataset::new(records).unwrap().with_labels(gold.clone()).unwrap();

    write_ads_jsonl(&dataset, dir.join("ads_50.jsonl")).unwrap();
    write_labels_jsonl(&gold, dir.join("gold_50.jsonl")).unwrap();

    // Deaths lead the headline-theme impressions by 3 days.
    let (lo, hi) = dataset
        .records
        .iter()
        .map(|r| r.start_date)
        .fold((start, start), |(lo, hi), d| (lo.min(d), hi.max(d)));
    let impressions = build_time_series(&dataset, &HEADLINE, lo, hi).unwrap();
    let deaths = planted_deaths(&impressions, 3, 7);
    let mut out = std::fs::File::create(dir.join("deaths.csv")).unwrap();
    writeln!(out, "date,new_deaths").unwrap();
    for (date, value) in deaths.dates.iter().zip(deaths.values.iter()) {
        writeln!(out, "{date},{value}").unwrap();
    }

    std::fs::write(
        dir.join("config_small.toml"),
        "[model]\n\
         seq_len = 12\n\
         embed_dim = 32\n\
         hidden_dim = 8\n\
         repr_dim = 8\n\
         dropout = 0.1\n\
         gamma = 1e-5\n\
         lr = 0.02\n\
         batch_size = 16\n\
         max_epochs = 12\n\
         patience = 4\n\
         \n\
         [strategy]\n\
         strategy = \"hybrid\"\n\
         split_seed = 11\n\
         model_seed = 21\n",
    )
    .unwrap();
    println!(
        "fixtures written to {} ({} days of deaths)",
        dir.display(),
        deaths.len()
    );
}
