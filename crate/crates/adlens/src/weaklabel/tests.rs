use super::*;
use crate::embed::hashed_embedding;

fn lex(content: &str) -> Lexicon {
    Lexicon::from_str_content(content).unwrap()
}

#[test]
fn score_mf_zero_hits() {
    let lexicon = lex("safe*\tCareHarm\n");
    let counts = score_mf("nothing matches here", &lexicon);
    assert_eq!(counts.total(), 0);
}

#[test]
fn score_mf_hand_counts() {
    let lexicon = lex("protect*\tCareHarm\nharm\tCareHarm\n");
    let counts = score_mf("protect yourself from harm", &lexicon);
    assert_eq!(counts.get(Foundation::CareHarm), 2);

    let lexicon = lex("freedom\tLibertyOppression\n");
    let counts = score_mf("freedom freedom", &lexicon);
    assert_eq!(counts.get(Foundation::LibertyOppression), 2);
}

#[test]
fn score_mf_token_counts_once_per_foundation() {
    // Two Care entries both match "protection": one increment, not two.
    let lexicon = lex("protect*\tCareHarm\nprot*\tCareHarm\nprotection\tLibertyOppression\n");
    let counts = score_mf("protection", &lexicon);
    assert_eq!(counts.get(Foundation::CareHarm), 1);
    // Different foundations may both count the same token.
    assert_eq!(counts.get(Foundation::LibertyOppression), 1);
}

#[test]
fn score_mf_additive_over_concatenation() {
    let lexicon = Lexicon::builtin();
    let a = "protect the community";
    let b = "freedom from tyranny and harm";
    let joined = format!("{a} {b}");
    let ca = score_mf(a, &lexicon);
    let cb = score_mf(b, &lexicon);
    let cab = score_mf(&joined, &lexicon);
    for f in Foundation::ALL {
        assert_eq!(cab.get(f), ca.get(f) + cb.get(f), "{f:?}");
    }
}

#[test]
fn assign_mf_zero_counts_is_none() {
    assert_eq!(assign_mf(&MfCounts::default(), 2), MfLabel::None);
}

#[test]
fn assign_mf_liberty_needs_min_hits() {
    let mut counts = MfCounts::default();
    counts.set(Foundation::LibertyOppression, 1);
    assert_eq!(assign_mf(&counts, 2), MfLabel::None);
    counts.set(Foundation::LibertyOppression, 2);
    assert_eq!(assign_mf(&counts, 2), MfLabel::LibertyOppression);
}

#[test]
fn assign_mf_tie_break_matches_order_oracle() {
    // Every two-way tie resolves to whichever foundation comes first in the
    // fixed order; checked against an independent order-scan oracle.
    for (i, fa) in Foundation::ALL.iter().enumerate() {
        for fb in Foundation::ALL.iter().skip(i + 1) {
            let mut counts = MfCounts::default();
            counts.set(*fa, 3);
            counts.set(*fb, 3);
            let got = assign_mf(&counts, 2);
            let expected = Foundation::ALL
                .iter()
                .find(|f| counts.get(**f) == 3)
                .unwrap()
                .to_label();
            assert_eq!(got, expected, "{fa:?} vs {fb:?}");
        }
    }
}

#[test]
fn assign_mf_invariant_under_lexicon_permutation() {
    let forward = lex("safe*\tCareHarm\nfreedom\tLibertyOppression\nloyal*\tLoyaltyBetrayal\n");
    let reversed = lex("loyal*\tLoyaltyBetrayal\nfreedom\tLibertyOppression\nsafe*\tCareHarm\n");
    let body = "stay safe loyal freedom freedom";
    let a = assign_mf(&score_mf(body, &forward), 2);
    let b = assign_mf(&score_mf(body, &reversed), 2);
    assert_eq!(a, b);
}

fn tiny_bank() -> PhraseBank {
    // Orthogonal basis phrases: theme i owns axis i.
    let mut phrases = Vec::new();
    for (i, theme) in Theme::CLASSES.iter().enumerate().take(4) {
        let mut v = vec![0.0; 4];
        v[i] = 1.0;
        phrases.push(Phrase {
            theme: *theme,
            text: format!("axis {i}"),
            vector: v,
        });
    }
    PhraseBank { phrases, dim: 4 }
}

#[test]
fn assign_theme_exact_phrase_match() {
    let bank = tiny_bank();
    let (theme, dist) = assign_theme(&[0.0, 1.0, 0.0, 0.0], &bank, 0.5).unwrap();
    assert_eq!(theme, Theme::CLASSES[1]);
    assert!(dist.abs() < 1e-12);
}

#[test]
fn assign_theme_orthogonal_goes_unassigned() {
    let bank = tiny_bank();
    // Orthogonal to every phrase: distance 1 > 0.5.
    let (theme, dist) = assign_theme(&[0.0, 0.0, 0.0, -1.0], &bank, 0.5).unwrap();
    // dist to axis 3 phrase is 1 − (−1) = 2; to others 1.
    assert_eq!(theme, Theme::Unassigned);
    assert!((dist - 1.0).abs() < 1e-12);
}

#[test]
fn assign_theme_zero_doc_errors() {
    let bank = tiny_bank();
    assert!(assign_theme(&[0.0; 4], &bank, 0.5).is_err());
}

#[test]
fn assign_theme_matches_linear_scan_oracle() {
    // Random docs over a 10-phrase hashed bank vs an exhaustive scan.
    let source = crate::embed::EmbedSource::fallback(16, 3);
    let texts: std::collections::BTreeMap<String, Vec<String>> = PhraseBank::builtin_texts();
    let bank = PhraseBank::from_texts(&texts, &source).unwrap();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for case in 0..200 {
        let doc: Vec<f64> = (0..16).map(|_| next()).collect();
        if doc.iter().all(|&v| v == 0.0) {
            continue;
        }
        let threshold = 0.9;
        let (theme, dist) = assign_theme(&doc, &bank, threshold).unwrap();
        // Oracle: first phrase attaining the minimum distance.
        let mut best = (f64::INFINITY, Theme::Unassigned);
        for p in &bank.phrases {
            let d = crate::embed::cosine_distance(&doc, &p.vector).unwrap();
            if d < best.0 {
                best = (d, p.theme);
            }
        }
        let want_theme = if best.0 <= threshold {
            best.1
        } else {
            Theme::Unassigned
        };
        assert_eq!(theme, want_theme, "case {case}");
        assert!((dist - best.0).abs() < 1e-12);
    }
}

#[test]
fn assign_theme_scale_invariant() {
    let bank = tiny_bank();
    let doc = [0.3, 0.9, 0.1, 0.0];
    let (t1, d1) = assign_theme(&doc, &bank, 0.5).unwrap();
    let scaled: Vec<f64> = doc.iter().map(|v| v * 73.0).collect();
    let (t2, d2) = assign_theme(&scaled, &bank, 0.5).unwrap();
    assert_eq!(t1, t2);
    assert!((d1 - d2).abs() < 1e-12);
}

#[test]
fn lowering_threshold_only_unassigns() {
    let source = crate::embed::EmbedSource::fallback(16, 11);
    let bank = PhraseBank::builtin(&source).unwrap();
    let docs: Vec<Vec<f64>> = (0..50)
        .map(|i| hashed_embedding(&format!("get the vaccine today {i}"), 16, 11))
        .collect();
    for doc in &docs {
        let (hi, _) = assign_theme(doc, &bank, 0.8).unwrap();
        let (lo, _) = assign_theme(doc, &bank, 0.3).unwrap();
        match (hi, lo) {
            (_, Theme::Unassigned) => {}
            (a, b) => assert_eq!(a, b),
        }
        if hi == Theme::Unassigned {
            assert_eq!(lo, Theme::Unassigned);
        }
    }
}

fn vectors_of(pairs: &[(&str, [f64; 2])]) -> std::collections::BTreeMap<String, Vec<f64>> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_vec()))
        .collect()
}

fn assignments_of(pairs: &[(&str, Theme)]) -> std::collections::BTreeMap<String, Theme> {
    pairs.iter().map(|(k, t)| (k.to_string(), *t)).collect()
}

#[test]
fn silhouette_identical_clusters_is_one() {
    // Intra distance 0, cross distance 1 → silhouette 1.
    let vectors = vectors_of(&[
        ("a1", [1.0, 0.0]),
        ("a2", [1.0, 0.0]),
        ("b1", [0.0, 1.0]),
        ("b2", [0.0, 1.0]),
    ]);
    let assignments = assignments_of(&[
        ("a1", Theme::Vote),
        ("a2", Theme::Vote),
        ("b1", Theme::GovTrust),
        ("b2", Theme::GovTrust),
    ]);
    let s = silhouette(&assignments, &vectors).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn silhouette_singleton_contributes_zero() {
    let vectors = vectors_of(&[
        ("a1", [1.0, 0.0]),
        ("b1", [0.0, 1.0]),
        ("b2", [0.0, 1.0]),
    ]);
    let assignments = assignments_of(&[
        ("a1", Theme::Vote),
        ("b1", Theme::GovTrust),
        ("b2", Theme::GovTrust),
    ]);
    // a1 is a singleton: contributes 0. b1, b2: a = 0, b = 1 → 1 each.
    let s = silhouette(&assignments, &vectors).unwrap();
    assert!((s - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn silhouette_four_point_fixture_matches_direct_formula() {
    let deg = |d: f64| (d.to_radians().cos(), d.to_radians().sin());
    let (a1c, a1s) = deg(0.0);
    let (a2c, a2s) = deg(20.0);
    let (b1c, b1s) = deg(90.0);
    let (b2c, b2s) = deg(110.0);
    let vectors = vectors_of(&[
        ("a1", [a1c, a1s]),
        ("a2", [a2c, a2s]),
        ("b1", [b1c, b1s]),
        ("b2", [b2c, b2s]),
    ]);
    let assignments = assignments_of(&[
        ("a1", Theme::Vote),
        ("a2", Theme::Vote),
        ("b1", Theme::GovTrust),
        ("b2", Theme::GovTrust),
    ]);
    // Direct evaluation: cosine distance between unit vectors at angle θ is
    // 1 − cos θ. Per point: s = (b − a)/max(a, b).
    let d = |angle: f64| 1.0 - angle.to_radians().cos();
    let s_a1 = {
        let a = d(20.0);
        let b = (d(90.0) + d(110.0)) / 2.0;
        (b - a) / b.max(a)
    };
    let s_a2 = {
        let a = d(20.0);
        let b = (d(70.0) + d(90.0)) / 2.0;
        (b - a) / b.max(a)
    };
    let s_b1 = {
        let a = d(20.0);
        let b = (d(90.0) + d(70.0)) / 2.0;
        (b - a) / b.max(a)
    };
    let s_b2 = {
        let a = d(20.0);
        let b = (d(110.0) + d(90.0)) / 2.0;
        (b - a) / b.max(a)
    };
    let want = (s_a1 + s_a2 + s_b1 + s_b2) / 4.0;
    let got = silhouette(&assignments, &vectors).unwrap();
    assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    assert!((-1.0..=1.0).contains(&got));
}

#[test]
fn silhouette_needs_two_clusters() {
    let vectors = vectors_of(&[("a1", [1.0, 0.0]), ("a2", [0.9, 0.1])]);
    let assignments = assignments_of(&[("a1", Theme::Vote), ("a2", Theme::Vote)]);
    assert!(silhouette(&assignments, &vectors).is_err());
}

fn pair(id: &str, theme: Theme, mf: MfLabel, source: LabelSource) -> LabelPair {
    LabelPair {
        ad_id: id.into(),
        theme,
        mf,
        source,
    }
}

#[test]
fn weak_quality_exact_match_is_perfect() {
    let gold: Vec<LabelPair> = (0..4)
        .map(|i| {
            pair(
                &format!("a{i}"),
                Theme::CLASSES[i],
                MfLabel::CLASSES[i],
                LabelSource::Gold,
            )
        })
        .collect();
    let weak: Vec<LabelPair> = gold
        .iter()
        .map(|g| pair(&g.ad_id, g.theme, g.mf, LabelSource::Weak))
        .collect();
    let q = weak_quality(&weak, &gold).unwrap();
    assert_eq!(q.overlap, 4);
    assert_eq!(q.theme.accuracy, 1.0);
    assert_eq!(q.theme.macro_f1, 1.0);
    assert_eq!(q.mf.accuracy, 1.0);
    assert_eq!(q.mf.macro_f1, 1.0);
}

#[test]
fn weak_quality_one_error_matches_hand_confusion() {
    // 4 items, two classes (Vote, GovTrust), one weak error on "a3":
    // gold Vote predicted GovTrust.
    let gold = vec![
        pair("a0", Theme::Vote, MfLabel::None, LabelSource::Gold),
        pair("a1", Theme::Vote, MfLabel::None, LabelSource::Gold),
        pair("a2", Theme::GovTrust, MfLabel::CareHarm, LabelSource::Gold),
        pair("a3", Theme::Vote, MfLabel::None, LabelSource::Gold),
    ];
    let weak = vec![
        pair("a0", Theme::Vote, MfLabel::None, LabelSource::Weak),
        pair("a1", Theme::Vote, MfLabel::None, LabelSource::Weak),
        pair("a2", Theme::GovTrust, MfLabel::CareHarm, LabelSource::Weak),
        pair("a3", Theme::GovTrust, MfLabel::None, LabelSource::Weak),
    ];
    let q = weak_quality(&weak, &gold).unwrap();
    // Accuracy 3/4. Vote: P=1, R=2/3 → F1=0.8. GovTrust: P=1/2, R=1 → F1=2/3.
    assert!((q.theme.accuracy - 0.75).abs() < 1e-12);
    assert!((q.theme.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    assert_eq!(q.mf.accuracy, 1.0);
}

#[test]
fn weak_quality_unassigned_counts_as_wrong() {
    let gold = vec![
        pair("a0", Theme::Vote, MfLabel::None, LabelSource::Gold),
        pair("a1", Theme::GovTrust, MfLabel::None, LabelSource::Gold),
    ];
    let weak = vec![
        pair("a0", Theme::Unassigned, MfLabel::None, LabelSource::Weak),
        pair("a1", Theme::GovTrust, MfLabel::None, LabelSource::Weak),
    ];
    let q = weak_quality(&weak, &gold).unwrap();
    assert!((q.theme.accuracy - 0.5).abs() < 1e-12);
}

#[test]
fn weak_quality_empty_intersection_errors() {
    let gold = vec![pair("a0", Theme::Vote, MfLabel::None, LabelSource::Gold)];
    let weak = vec![pair("b0", Theme::Vote, MfLabel::None, LabelSource::Weak)];
    assert!(weak_quality(&weak, &gold).is_err());
}

#[test]
fn label_dataset_parallel_matches_serial() {
    let records: Vec<crate::corpus::AdRecord> = (0..40)
        .map(|i| {
            crate::corpus::tests::ad(
                &format!("r{i}"),
                &format!("get the vaccine number {i}"),
                1,
                (0.0, 10.0),
                (0.0, 10.0),
            )
        })
        .collect();
    let d = crate::corpus::Dataset::new(records).unwrap();
    let source = crate::embed::EmbedSource::fallback(24, 7);
    let bank = PhraseBank::builtin(&source).unwrap();
    let lexicon = Lexicon::builtin();
    let a = label_dataset(&d, &bank, &lexicon, &source, 0.5).unwrap();
    let b = label_dataset_serial(&d, &bank, &lexicon, &source, 0.5).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.label, y.label);
        assert_eq!(x.theme_distance.to_bits(), y.theme_distance.to_bits());
    }
}
