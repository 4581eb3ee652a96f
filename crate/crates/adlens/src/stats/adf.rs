//! Augmented Dickey-Fuller unit-root test with a constant term.
//!
//! Regresses Δy_t on [1, y_{t−1}, Δy_{t−1}, …, Δy_{t−p}] and reports the
//! t-ratio of the y_{t−1} coefficient. P-values use the MacKinnon (1994)
//! approximate response surface for the constant-only case.

use serde::{Deserialize, Serialize};

use super::ols::ols;
use super::special::normal_cdf;
use super::{Dof, TestResult};
use crate::corpus::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagSelect {
    /// Use `max_lag` as-is.
    Fixed,
    /// Pick the lag in 0..=max_lag minimizing AIC on a common sample,
    /// then refit on the longest sample for the chosen lag.
    Aic,
}

/// MacKinnon approximate p-value, constant-only regression, one variable.
fn mackinnon_p(stat: f64) -> f64 {
    const TAU_MAX: f64 = 2.74;
    const TAU_MIN: f64 = -18.83;
    const TAU_STAR: f64 = -1.61;
    const SMALL: [f64; 3] = [2.1659, 1.4412, 0.038269];
    const LARGE: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_STAR {
        SMALL[0] + SMALL[1] * stat + SMALL[2] * stat * stat
    } else {
        LARGE[0] + stat * (LARGE[1] + stat * (LARGE[2] + stat * LARGE[3]))
    };
    normal_cdf(z)
}

/// Builds the regression for lag `p`, optionally restricted to rows where a
/// model with `trim_lag` lags would also be estimable (for AIC comparison).
fn fit_adf(values: &[f64], p: usize, trim_lag: usize) -> Result<super::ols::OlsFit> {
    let n = values.len();
    let diff: Vec<f64> = (1..n).map(|t| values[t] - values[t - 1]).collect();
    let t_start = trim_lag.max(p) + 1;
    let mut rows = Vec::with_capacity(n - t_start);
    let mut targets = Vec::with_capacity(n - t_start);
    for t in t_start..n {
        let mut row = Vec::with_capacity(p + 2);
        row.push(1.0);
        row.push(values[t - 1]);
        for j in 1..=p {
            row.push(diff[t - 1 - j]);
        }
        rows.push(row);
        targets.push(diff[t - 1]);
    }
    ols(&rows, &targets)
}

/// Augmented Dickey-Fuller test. Needs `series.len() >= max_lag + 10`.
pub fn adf(series: &TimeSeries, max_lag: usize, lag_select: LagSelect) -> Result<TestResult> {
    let values = &series.values;
    if values.len() < max_lag + 10 {
        return Err(Error::invalid(format!(
            "adf: series '{}' has {} points, need at least {}",
            series.name,
            values.len(),
            max_lag + 10
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::non_finite(format!("series '{}'", series.name)));
    }
    let used_lag = match lag_select {
        LagSelect::Fixed => max_lag,
        LagSelect::Aic => {
            let mut best = (f64::INFINITY, 0usize);
            for p in 0..=max_lag {
                let fit = fit_adf(values, p, max_lag)?;
                let n = fit.n_obs as f64;
                let aic = n * (fit.ssr / n).ln() + 2.0 * fit.n_params as f64;
                if aic < best.0 {
                    best = (aic, p);
                }
            }
            best.1
        }
    };
    let fit = fit_adf(values, used_lag, used_lag)?;
    let statistic = fit.t_ratio(1);
    Ok(TestResult {
        statistic,
        dof: Dof::Single(fit.dof_resid() as f64),
        p_value: mackinnon_p(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(values: Vec<f64>) -> TimeSeries {
        let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        TimeSeries::new(
            "test".into(),
            (0..values.len() as i64)
                .map(|d| start + chrono::Duration::days(d))
                .collect(),
            values,
        )
        .unwrap()
    }

    #[test]
    fn too_short_series_rejected() {
        let s = series((0..12).map(|v| v as f64).collect());
        assert!(adf(&s, 6, LagSelect::Fixed).is_err());
    }

    #[test]
    fn constant_series_is_singular() {
        let s = series(vec![3.0; 50]);
        assert!(matches!(
            adf(&s, 2, LagSelect::Fixed),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn mackinnon_surface_anchors() {
        // Deep rejection region and acceptance region behave as expected.
        assert_eq!(mackinnon_p(-30.0), 0.0);
        assert_eq!(mackinnon_p(5.0), 1.0);
        assert!(mackinnon_p(-4.0) < 0.01);
        assert!(mackinnon_p(-1.0) > 0.5);
        // Monotone increasing in the statistic.
        let mut prev = 0.0;
        let mut t = -18.0;
        while t < 2.7 {
            let p = mackinnon_p(t);
            assert!(p >= prev - 1e-12, "t = {t}");
            prev = p;
            t += 0.05;
        }
    }
}
