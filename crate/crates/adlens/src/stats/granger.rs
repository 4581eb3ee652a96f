//! Granger causality via the nested-OLS F-test.
//!
//! Restricted model:   y_t ~ const + y_{t−1..t−lag}
//! Unrestricted model: adds x_{t−1..t−lag}
//! F = ((SSR_r − SSR_u)/lag) / (SSR_u/(T − 2·lag − 1)), where T is the
//! number of regression rows. Tests the hypothesis "x Granger-causes y".

use super::ols::ols;
use super::special::f_sf;
use super::{Dof, TestResult};
use crate::corpus::TimeSeries;
use crate::error::{Error, Result};

pub fn granger(x: &TimeSeries, y: &TimeSeries, lag: usize) -> Result<TestResult> {
    if lag == 0 {
        return Err(Error::invalid("granger: lag must be at least 1"));
    }
    if x.dates != y.dates {
        return Err(Error::invalid(
            "granger: series dates are misaligned; align the windows first",
        ));
    }
    let n = y.values.len();
    if n < 3 * lag + 10 {
        return Err(Error::invalid(format!(
            "granger: {n} points too few for lag {lag} (need at least {})",
            3 * lag + 10
        )));
    }
    for (name, vals) in [(&x.name, &x.values), (&y.name, &y.values)] {
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite(format!("series '{name}'")));
        }
    }

    let rows_r: Vec<Vec<f64>> = (lag..n)
        .map(|t| {
            let mut row = Vec::with_capacity(lag + 1);
            row.push(1.0);
            for j in 1..=lag {
                row.push(y.values[t - j]);
            }
            row
        })
        .collect();
    let rows_u: Vec<Vec<f64>> = (lag..n)
        .map(|t| {
            let mut row = Vec::with_capacity(2 * lag + 1);
            row.push(1.0);
            for j in 1..=lag {
                row.push(y.values[t - j]);
            }
            for j in 1..=lag {
                row.push(x.values[t - j]);
            }
            row
        })
        .collect();
    let targets: Vec<f64> = (lag..n).map(|t| y.values[t]).collect();

    let fit_r = ols(&rows_r, &targets)?;
    let fit_u = ols(&rows_u, &targets)?;

    let t_obs = targets.len() as f64;
    let dof_num = lag as f64;
    let dof_den = t_obs - 2.0 * lag as f64 - 1.0;
    if fit_u.ssr <= 0.0 {
        return Err(Error::Degenerate(
            "granger: unrestricted model fits exactly".into(),
        ));
    }
    let statistic = ((fit_r.ssr - fit_u.ssr) / dof_num) / (fit_u.ssr / dof_den);
    Ok(TestResult {
        statistic,
        dof: Dof::Pair(dof_num, dof_den),
        p_value: f_sf(statistic, dof_num, dof_den),
    })
}
