//! Self-contained hypothesis tests: chi-square independence, two-sample and
//! paired t-tests, the augmented Dickey-Fuller unit-root test, and Granger
//! causality. P-values come from [`special`]; nothing here depends on an
//! external statistics library.

pub mod adf;
pub mod granger;
pub mod ols;
pub mod special;

pub use adf::{adf, LagSelect};
pub use granger::granger;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degrees of freedom attached to a test statistic. Welch t-tests carry a
/// fractional value, F-tests carry a numerator/denominator pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dof {
    Single(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: Dof,
    pub p_value: f64,
}

/// R×C count table with labeled margins.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn new(
        counts: Vec<Vec<u64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let r = counts.len();
        if r < 2 {
            return Err(Error::invalid("contingency table needs at least 2 rows"));
        }
        let c = counts[0].len();
        if c < 2 {
            return Err(Error::invalid("contingency table needs at least 2 columns"));
        }
        if counts.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged contingency table"));
        }
        if row_labels.len() != r || col_labels.len() != c {
            return Err(Error::invalid("contingency table label count mismatch"));
        }
        if counts.iter().flatten().sum::<u64>() == 0 {
            return Err(Error::invalid("contingency table grand total is zero"));
        }
        Ok(ContingencyTable {
            counts,
            row_labels,
            col_labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts[0].len()
    }
}

/// Pearson chi-square test of independence.
///
/// Errors on zero row/column totals or an expected cell below 1; expected
/// cells below 5 only log a warning.
pub fn chi_square(table: &ContingencyTable) -> Result<TestResult> {
    let r = table.rows();
    let c = table.cols();
    let row_tot: Vec<f64> = table
        .counts
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .collect();
    let col_tot: Vec<f64> = (0..c)
        .map(|j| table.counts.iter().map(|row| row[j]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_tot.iter().sum();
    if let Some(i) = row_tot.iter().position(|&t| t == 0.0) {
        return Err(Error::invalid(format!(
            "zero row total for '{}'",
            table.row_labels[i]
        )));
    }
    if let Some(j) = col_tot.iter().position(|&t| t == 0.0) {
        return Err(Error::invalid(format!(
            "zero column total for '{}'",
            table.col_labels[j]
        )));
    }
    let mut statistic = 0.0;
    let mut low_expected = false;
    for i in 0..r {
        for j in 0..c {
            let expected = row_tot[i] * col_tot[j] / total;
            if expected < 1.0 {
                return Err(Error::invalid(format!(
                    "expected cell ({}, {}) below 1 ({expected:.3})",
                    table.row_labels[i], table.col_labels[j]
                )));
            }
            if expected < 5.0 {
                low_expected = true;
            }
            let diff = table.counts[i][j] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    if low_expected {
        log::warn!("chi-square: some expected cells are below 5; test may be unreliable");
    }
    let dof = ((r - 1) * (c - 1)) as f64;
    Ok(TestResult {
        statistic,
        dof: Dof::Single(dof),
        p_value: special::chi2_sf(statistic, dof),
    })
}

fn mean_var(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample t-test: pooled-variance Student when `equal_var`, otherwise
/// Welch with the Welch–Satterthwaite degrees of freedom. Two-sided p.
pub fn two_sample_t(a: &[f64], b: &[f64], equal_var: bool) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("two_sample_t needs at least 2 per sample"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (statistic, dof) = if equal_var {
        let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        if pooled <= 0.0 {
            return Err(Error::Degenerate("zero pooled variance".into()));
        }
        let t = (ma - mb) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
        (t, na + nb - 2.0)
    } else {
        let sa = va / na;
        let sb = vb / nb;
        if sa + sb <= 0.0 {
            return Err(Error::Degenerate("zero pooled variance".into()));
        }
        let t = (ma - mb) / (sa + sb).sqrt();
        let dof = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        (t, dof)
    };
    Ok(TestResult {
        statistic,
        dof: Dof::Single(dof),
        p_value: special::t_sf_two_sided(statistic, dof),
    })
}

/// Paired t-test: one-sample t on the differences, two-sided p.
/// Zero variance of the differences is reported as degenerate.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid("paired_t needs equal-length samples"));
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired_t needs at least 2 pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let (mean, var) = mean_var(&diffs);
    if var <= 0.0 {
        return Err(Error::Degenerate(
            "zero variance of paired differences".into(),
        ));
    }
    let n = diffs.len() as f64;
    let statistic = mean / (var / n).sqrt();
    let dof = n - 1.0;
    Ok(TestResult {
        statistic,
        dof: Dof::Single(dof),
        p_value: special::t_sf_two_sided(statistic, dof),
    })
}
