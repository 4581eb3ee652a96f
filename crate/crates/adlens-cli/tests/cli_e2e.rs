//! End-to-end command tests against the compiled binary and the bundled
//! 50-ad fixture.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adlens::corpus::{ads_from_jsonl_str, labels_from_jsonl_str, Theme};
use adlens::embed::{doc_vector, EmbedSource};
use adlens::weaklabel::{assign_mf, assign_theme, score_mf, Lexicon, PhraseBank};
use adlens_cli::report::PipelineReport;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_adlens")
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn ingest_reports_counts_and_dedups() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ads.jsonl");
    let stdout = run_ok(&[
        "ingest",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--dedup",
        "--out",
        &path_str(&out),
    ]);
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["records_loaded"], 50);
    assert_eq!(summary["records_written"], 49);
    let content = std::fs::read_to_string(&out).unwrap();
    assert_eq!(content.lines().count(), 49);
}

#[test]
fn ingest_rejects_malformed_rows_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"id\":\"a\",\"body\":\"x\",\"funding_entity\":\"e\",\"spend\":{\"lower\":0,\"upper\":1},\"impressions\":{\"lower\":0,\"upper\":1},\"start_date\":\"2021-01-01\"}\nnot json\n",
    )
    .unwrap();
    let out = run(&[
        "ingest",
        "--ads",
        &path_str(&bad),
        "--out",
        &path_str(&dir.path().join("out.jsonl")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error[E_PARSE]"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn weaklabel_output_matches_library_recount() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("weak.jsonl");
    let stdout = run_ok(&[
        "weaklabel",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--dim",
        "64",
        "--embed-seed",
        "17",
        "--threshold",
        "0.5",
        "--out",
        &path_str(&out),
    ]);
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["records"], 50);

    // Brute-force recount through the library on the same inputs.
    let ads =
        ads_from_jsonl_str(&std::fs::read_to_string(fixtures().join("ads_50.jsonl")).unwrap())
            .unwrap();
    let labels = labels_from_jsonl_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(labels.len(), 50);
    let source = EmbedSource::fallback(64, 17);
    let bank = PhraseBank::builtin(&source).unwrap();
    let lexicon = Lexicon::builtin();
    for (record, label) in ads.records.iter().zip(labels.iter()) {
        assert_eq!(record.id, label.ad_id);
        let doc = doc_vector(record, &source).unwrap();
        let (theme, _) = assign_theme(&doc, &bank, 0.5).unwrap();
        assert_eq!(label.theme, theme, "theme mismatch for {}", record.id);
        let mf = assign_mf(&score_mf(&record.body, &lexicon), lexicon.liberty_min);
        assert_eq!(label.mf, mf, "mf mismatch for {}", record.id);
    }
    // Stdout counts equal a recount over the output file.
    let theme_count = |name: &str| {
        labels
            .iter()
            .filter(|l| l.theme.name() == name)
            .count() as u64
    };
    for (name, count) in summary["theme_counts"].as_object().unwrap() {
        assert_eq!(count.as_u64().unwrap(), theme_count(name), "{name}");
    }
}

#[test]
fn weaklabel_threshold_zero_only_exact_matches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("weak.jsonl");
    run_ok(&[
        "weaklabel",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--threshold",
        "0",
        "--out",
        &path_str(&out),
    ]);
    let labels = labels_from_jsonl_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // Fixture bodies are phrase + suffix words, never exactly a phrase
    // vector, so a zero threshold assigns nothing.
    assert!(labels.iter().all(|l| l.theme == Theme::Unassigned));
}

#[test]
fn train_requires_weak_for_hybrid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--config",
        &path_str(&fixtures().join("config_small.toml")),
        "train",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--gold",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--strategy",
        "hybrid",
        "--out-dir",
        &path_str(&dir.path().join("run")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error[E_MISSING_INPUT]"), "{stderr}");
}

fn pipeline(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let ads = dir.join("ads.jsonl");
    let weak = dir.join("weak.jsonl");
    let run_dir = dir.join("run");
    run_ok(&[
        "ingest",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--dedup",
        "--out",
        &path_str(&ads),
    ]);
    run_ok(&[
        "weaklabel",
        "--ads",
        &path_str(&ads),
        "--dim",
        "32",
        "--embed-seed",
        "17",
        "--out",
        &path_str(&weak),
    ]);
    run_ok(&[
        "--config",
        &path_str(&fixtures().join("config_small.toml")),
        "train",
        "--ads",
        &path_str(&ads),
        "--gold",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--weak",
        &path_str(&weak),
        "--strategy",
        "hybrid",
        "--out-dir",
        &path_str(&run_dir),
    ]);
    (ads, weak, run_dir)
}

#[test]
fn train_manifest_and_checkpoint_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let (_, _, run_a) = pipeline(dir_a.path());
    let (_, _, run_b) = pipeline(dir_b.path());
    for name in ["manifest.json", "checkpoint.json"] {
        let a = std::fs::read(run_a.join(name)).unwrap();
        let b = std::fs::read(run_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_a.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["strategy"], "hybrid");
    assert_eq!(manifest["test_isolated"], true);
    assert!(manifest["metrics"]["mf"]["accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn evaluate_scores_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let (ads, _, run_dir) = pipeline(dir.path());
    let stdout = run_ok(&[
        "evaluate",
        "--ads",
        &path_str(&ads),
        "--labels",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--checkpoint",
        &path_str(&run_dir.join("checkpoint.json")),
    ]);
    let metrics: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(metrics["examples"], 49);
    let acc = metrics["theme"]["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn analyze_without_deaths_omits_granger() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = dir.path().join("report");
    run_ok(&[
        "analyze",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--labels",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--out-dir",
        &path_str(&report_dir),
    ]);
    let report: PipelineReport = serde_json::from_str(
        &std::fs::read_to_string(report_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    assert!(report.analysis.granger.is_none());
    assert!(!report_dir.join("granger.csv").exists());
}

#[test]
fn analyze_with_planted_deaths_flags_lag_three() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = dir.path().join("report");
    run_ok(&[
        "analyze",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--labels",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--deaths",
        &path_str(&fixtures().join("deaths.csv")),
        "--out-dir",
        &path_str(&report_dir),
    ]);
    let report: PipelineReport = serde_json::from_str(
        &std::fs::read_to_string(report_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    let granger = report.analysis.granger.expect("granger block present");
    let lag3 = granger
        .tests
        .iter()
        .find(|t| t.direction == "deaths_to_impressions" && t.lag == 3)
        .expect("lag-3 entry");
    assert!(lag3.p_value.unwrap() < 0.05, "p = {:?}", lag3.p_value);
    assert_eq!(lag3.significant_at_5pct, Some(true));
    // Both series flagged stationary on this fixture.
    assert!(granger.adf.iter().all(|a| a.stationary_at_5pct));
}

#[test]
fn analyze_theme_totals_match_library_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = dir.path().join("report");
    run_ok(&[
        "analyze",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--labels",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--out-dir",
        &path_str(&report_dir),
    ]);
    let report: PipelineReport = serde_json::from_str(
        &std::fs::read_to_string(report_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    let ads =
        ads_from_jsonl_str(&std::fs::read_to_string(fixtures().join("ads_50.jsonl")).unwrap())
            .unwrap();
    let gold =
        labels_from_jsonl_str(&std::fs::read_to_string(fixtures().join("gold_50.jsonl")).unwrap())
            .unwrap();
    let labeled = ads.with_labels(gold).unwrap();
    let expected = adlens::corpus::aggregate(
        &labeled,
        adlens::corpus::GroupBy::Theme,
        adlens::corpus::Measure::Count,
    )
    .unwrap();
    let got = &report.analysis.theme_tables["count"];
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(expected.iter()) {
        assert_eq!(g.group, e.group);
        assert_eq!(g.value, e.value);
    }
}

#[test]
fn analyze_with_weak_and_gold_reports_quality() {
    let dir = tempfile::tempdir().unwrap();
    let weak = dir.path().join("weak.jsonl");
    run_ok(&[
        "weaklabel",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--out",
        &path_str(&weak),
    ]);
    let report_dir = dir.path().join("report");
    run_ok(&[
        "analyze",
        "--ads",
        &path_str(&fixtures().join("ads_50.jsonl")),
        "--labels",
        &path_str(&weak),
        "--gold",
        &path_str(&fixtures().join("gold_50.jsonl")),
        "--out-dir",
        &path_str(&report_dir),
    ]);
    let report: PipelineReport = serde_json::from_str(
        &std::fs::read_to_string(report_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    let quality = report.weak_label_quality.expect("quality block");
    assert_eq!(quality.overlap, 50);
    assert!(quality.theme.accuracy > 0.0);
}

#[test]
fn gradcheck_command_passes() {
    let stdout = run_ok(&["gradcheck", "--seeds", "2"]);
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn config_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .env("ADLENS_CONFIG", fixtures().join("config_small.toml"))
        .args([
            "train",
            "--ads",
            &path_str(&fixtures().join("ads_50.jsonl")),
            "--gold",
            &path_str(&fixtures().join("gold_50.jsonl")),
            "--strategy",
            "fully_supervised",
            "--out-dir",
            &path_str(&dir.path().join("run")),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap(),
    )
    .unwrap();
    // seq_len 12 comes from the env-var config, not the 100 default.
    assert_eq!(manifest["model_config"]["seq_len"], 12);
}
