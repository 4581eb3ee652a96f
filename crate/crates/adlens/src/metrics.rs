//! Confusion-matrix classification metrics shared by weak-label quality
//! scoring and model evaluation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Accuracy plus macro-averaged F1. Macro-F1 averages over classes present
/// in the gold labels, with F1 = 0 for classes that are never predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<String, f64>,
}

/// Computes metrics over (gold, predicted) label pairs.
/// Panics on an empty slice; callers gate on nonempty intersections.
pub fn classification_metrics(pairs: &[(String, String)]) -> ClassMetrics {
    assert!(!pairs.is_empty(), "classification_metrics on empty pairs");
    let n = pairs.len() as f64;
    let correct = pairs.iter().filter(|(g, p)| g == p).count() as f64;
    let gold_classes: BTreeSet<&String> = pairs.iter().map(|(g, _)| g).collect();
    let mut per_class_f1 = BTreeMap::new();
    let mut f1_sum = 0.0;
    for class in &gold_classes {
        let tp = pairs.iter().filter(|(g, p)| g == *class && p == *class).count() as f64;
        let fp = pairs.iter().filter(|(g, p)| g != *class && p == *class).count() as f64;
        let fn_ = pairs.iter().filter(|(g, p)| g == *class && p != *class).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class_f1.insert((*class).clone(), f1);
        f1_sum += f1;
    }
    ClassMetrics {
        accuracy: correct / n,
        macro_f1: f1_sum / gold_classes.len() as f64,
        per_class_f1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter()
            .map(|(g, p)| (g.to_string(), p.to_string()))
            .collect()
    }

    #[test]
    fn perfect_predictions() {
        let m = classification_metrics(&pairs(&[("a", "a"), ("b", "b"), ("a", "a")]));
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn constant_predictor_on_balanced_two_class() {
        // Always predict "a" on balanced {a, b}: accuracy 1/2,
        // F1(a) = 2/3, F1(b) = 0, macro = 1/3.
        let m = classification_metrics(&pairs(&[("a", "a"), ("a", "a"), ("b", "a"), ("b", "a")]));
        assert!((m.accuracy - 0.5).abs() < 1e-12);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.per_class_f1["a"] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.per_class_f1["b"], 0.0);
    }

    #[test]
    fn matches_independent_confusion_oracle_on_random_pairs() {
        // LCG-driven random labels over 4 classes; oracle computes the
        // confusion matrix and per-class F1 from first principles.
        let classes = ["w", "x", "y", "z"];
        let mut state = 9872314u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        let data: Vec<(String, String)> = (0..300)
            .map(|_| {
                (
                    classes[next() % 4].to_string(),
                    classes[next() % 4].to_string(),
                )
            })
            .collect();
        let got = classification_metrics(&data);

        let mut confusion = [[0usize; 4]; 4];
        for (g, p) in &data {
            let gi = classes.iter().position(|c| c == g).unwrap();
            let pi = classes.iter().position(|c| c == p).unwrap();
            confusion[gi][pi] += 1;
        }
        let acc: f64 =
            (0..4).map(|i| confusion[i][i]).sum::<usize>() as f64 / data.len() as f64;
        assert!((got.accuracy - acc).abs() < 1e-12);
        let mut f1_sum = 0.0;
        for c in 0..4 {
            let tp = confusion[c][c] as f64;
            let fp = (0..4).filter(|&g| g != c).map(|g| confusion[g][c]).sum::<usize>() as f64;
            let fn_ = (0..4).filter(|&p| p != c).map(|p| confusion[c][p]).sum::<usize>() as f64;
            let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let rec = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f1 = if prec + rec > 0.0 {
                2.0 * prec * rec / (prec + rec)
            } else {
                0.0
            };
            f1_sum += f1;
        }
        assert!((got.macro_f1 - f1_sum / 4.0).abs() < 1e-12);
    }
}
