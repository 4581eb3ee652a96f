//! Strategy-level integration tests: learning on separable synthetic data,
//! determinism, the two-stage freeze contract, test-set isolation, and the
//! repeated-runs protocol.

use adlens::mtlnet::{ModelConfig, TrainExample};
use adlens::synth::{separable_examples, SeparableVocab};
use adlens::train::{
    evaluate, repeat_runs, run_hybrid, run_strategy, run_two_stage, PairedOutcome, Strategy,
    StrategyConfig,
};

fn small_cfg() -> ModelConfig {
    ModelConfig {
        seq_len: 8,
        embed_dim: 40,
        hidden_dim: 8,
        repr_dim: 8,
        theme_classes: 6,
        mf_classes: 4,
        dropout: 0.1,
        gamma: 1e-6,
        lr: 0.02,
        batch_size: 16,
        max_epochs: 12,
        patience: 4,
        seed: 0,
    }
}

fn scfg(strategy: Strategy, model_seed: u64) -> StrategyConfig {
    StrategyConfig {
        strategy,
        split_seed: 5,
        model_seed,
        ..Default::default()
    }
}

#[test]
fn fully_supervised_separable_reaches_high_accuracy() {
    let cfg = ModelConfig {
        hidden_dim: 12,
        repr_dim: 12,
        dropout: 0.0,
        max_epochs: 300,
        patience: 60,
        ..small_cfg()
    };
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 60, 0.0, 42, "g");
    let run = run_strategy(&gold, None, &cfg, &scfg(Strategy::FullySupervised, 1)).unwrap();
    assert!(run.theme.accuracy >= 0.9, "theme acc {}", run.theme.accuracy);
    assert!(run.mf.accuracy >= 0.9, "mf acc {}", run.mf.accuracy);
    assert!(run.epochs_run <= cfg.max_epochs);
    assert!(run.id_trace.test_isolated());
}

#[test]
fn identical_seeds_give_identical_runs() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 1, "g");
    let weak = separable_examples(&cfg, &vocab, 150, 0.4, 2, "w");
    let a = run_strategy(&gold, Some(&weak), &cfg, &scfg(Strategy::Hybrid, 9)).unwrap();
    let b = run_strategy(&gold, Some(&weak), &cfg, &scfg(Strategy::Hybrid, 9)).unwrap();
    assert_eq!(a.theme.accuracy, b.theme.accuracy);
    assert_eq!(a.mf.macro_f1, b.mf.macro_f1);
    assert_eq!(a.epochs_run, b.epochs_run);
    assert_eq!(a.best_val_loss.to_bits(), b.best_val_loss.to_bits());
    let fa = a.checkpoint.flatten();
    let fb = b.checkpoint.flatten();
    for (x, y) in fa.iter().zip(fb.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn hybrid_with_empty_weak_degenerates_to_gold_mix() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 3, "g");
    let run = run_hybrid(&gold, &[], &cfg, &scfg(Strategy::Hybrid, 4)).unwrap();
    // 30% of 40 = 12 pooled for train/val; the other 28 are the test set.
    assert_eq!(run.id_trace.test.len(), 28);
    assert_eq!(run.id_trace.train.len() + run.id_trace.val.len(), 12);
    assert!(run.id_trace.test_isolated());
}

#[test]
fn two_stage_freezes_encoder_bit_exactly() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 5, "g");
    let weak = separable_examples(&cfg, &vocab, 200, 0.4, 6, "w");
    for variant in [1u8, 2] {
        let run = run_two_stage(&gold, &weak, variant, &cfg, &scfg(Strategy::TwoStage1, 7))
            .unwrap();
        let before = run.pretrain_encoder.as_ref().unwrap();
        let after = run.checkpoint.encoder_flat();
        assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(after.iter()) {
            assert_eq!(b.to_bits(), a.to_bits(), "variant {variant}");
        }
        assert!(run.id_trace.test_isolated(), "variant {variant}");
        // Head tensors did move during fine-tuning.
        assert_ne!(
            run.checkpoint.w_o_theme.data,
            vec![0.0; run.checkpoint.w_o_theme.data.len()]
        );
    }
}

#[test]
fn weak_examples_sharing_test_ids_are_excluded() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 8, "g");
    // Weak set = fresh ids plus full clones of the gold ids (as weak
    // labeling over the same corpus would produce).
    let mut weak = separable_examples(&cfg, &vocab, 120, 0.4, 9, "w");
    weak.extend(gold.clone());
    for strategy in [Strategy::Hybrid, Strategy::TwoStage1, Strategy::TwoStage2] {
        let run = run_strategy(&gold, Some(&weak), &cfg, &scfg(strategy, 10)).unwrap();
        assert!(
            run.id_trace.test_isolated(),
            "{:?} leaked test ids",
            strategy
        );
        assert!(!run.id_trace.test.is_empty());
    }
}

#[test]
fn all_strategies_complete_and_report_metrics() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 12, "g");
    let weak = separable_examples(&cfg, &vocab, 200, 0.4, 13, "w");
    for strategy in [
        Strategy::FullySupervised,
        Strategy::Hybrid,
        Strategy::TwoStage1,
        Strategy::TwoStage2,
    ] {
        let run = run_strategy(&gold, Some(&weak), &cfg, &scfg(strategy, 14)).unwrap();
        assert!((0.0..=1.0).contains(&run.theme.accuracy), "{strategy:?}");
        assert!((0.0..=1.0).contains(&run.mf.macro_f1), "{strategy:?}");
        assert!(run.epochs_run <= cfg.max_epochs);
        assert!(run.id_trace.test_isolated());
        assert_eq!(run.best_val_loss, {
            let mut best = f64::INFINITY;
            for &v in &run.val_loss_curve {
                if v < best {
                    best = v;
                }
            }
            best
        });
    }
}

#[test]
fn missing_weak_input_is_an_error() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 15, "g");
    let err = run_strategy(&gold, None, &cfg, &scfg(Strategy::Hybrid, 16)).unwrap_err();
    assert_eq!(err.code(), "E_MISSING_INPUT");
}

#[test]
fn early_stopping_halts_after_patience_without_improvement() {
    // lr = 0 freezes learning, so validation loss never improves after the
    // first epoch and training must stop at exactly 1 + patience epochs
    // with the first-epoch checkpoint as best.
    let cfg = ModelConfig {
        lr: 0.0,
        dropout: 0.0,
        max_epochs: 50,
        patience: 3,
        ..small_cfg()
    };
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 30, 0.0, 17, "g");
    let run = run_strategy(&gold, None, &cfg, &scfg(Strategy::FullySupervised, 18)).unwrap();
    assert_eq!(run.epochs_run, 1 + cfg.patience);
    assert_eq!(run.val_loss_curve.len(), run.epochs_run);
    let min = run
        .val_loss_curve
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert_eq!(run.best_val_loss.to_bits(), min.to_bits());
    // The first epoch attains the minimum; everything after is no better.
    assert_eq!(run.val_loss_curve[0].to_bits(), min.to_bits());
}

#[test]
fn repeat_runs_means_and_paired_tests() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 19, "g");
    let weak = separable_examples(&cfg, &vocab, 150, 0.4, 20, "w");
    let report = repeat_runs(
        &gold,
        Some(&weak),
        &cfg,
        &scfg(Strategy::Hybrid, 30),
        &scfg(Strategy::FullySupervised, 30),
        2,
    )
    .unwrap();
    assert_eq!(report.strategy_runs.len(), 2);
    let want = (report.strategy_runs[0].theme.accuracy + report.strategy_runs[1].theme.accuracy)
        / 2.0;
    assert!((report.strategy_means.theme_accuracy - want).abs() < 1e-12);
    assert_eq!(report.paired.len(), 4);

    // Same strategy, same seeds: every per-seed difference is zero, so the
    // paired test is degenerate.
    let self_report = repeat_runs(
        &gold,
        Some(&weak),
        &cfg,
        &scfg(Strategy::Hybrid, 30),
        &scfg(Strategy::Hybrid, 30),
        2,
    )
    .unwrap();
    for outcome in self_report.paired.values() {
        assert!(matches!(outcome, PairedOutcome::Degenerate));
    }
}

#[test]
fn paired_t_consistent_with_stats_module() {
    // Cross-module check: the repeat harness must produce exactly what
    // stats::paired_t reports on the same vectors.
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 40, 0.0, 21, "g");
    let weak = separable_examples(&cfg, &vocab, 150, 0.4, 22, "w");
    let report = repeat_runs(
        &gold,
        Some(&weak),
        &cfg,
        &scfg(Strategy::Hybrid, 40),
        &scfg(Strategy::FullySupervised, 40),
        3,
    )
    .unwrap();
    let a: Vec<f64> = report.strategy_runs.iter().map(|r| r.mf.accuracy).collect();
    let b: Vec<f64> = report.baseline_runs.iter().map(|r| r.mf.accuracy).collect();
    match (&report.paired["mf_accuracy"], adlens::stats::paired_t(&a, &b)) {
        (PairedOutcome::Test { t, p }, Ok(expected)) => {
            assert!((t - expected.statistic).abs() < 1e-12);
            assert!((p - expected.p_value).abs() < 1e-12);
        }
        (PairedOutcome::Degenerate, Err(_)) => {}
        other => panic!("inconsistent paired outcomes: {other:?}"),
    }
}

#[test]
fn evaluate_rejects_empty_and_unlabeled() {
    let cfg = small_cfg();
    let vocab = SeparableVocab::build(&cfg, 11);
    let gold = separable_examples(&cfg, &vocab, 10, 0.0, 23, "g");
    let params = adlens::mtlnet::init_params(&cfg, 1).unwrap();
    assert!(evaluate(&params, &cfg, &[]).is_err());
    let unlabeled: Vec<TrainExample> = gold
        .iter()
        .map(|e| TrainExample {
            theme: None,
            mf: None,
            ..e.clone()
        })
        .collect();
    assert!(evaluate(&params, &cfg, &unlabeled).is_err());
}
