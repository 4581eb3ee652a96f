//! Ordinary least squares on small design matrices via normal equations.
//! Used by the unit-root and causality regressions, where k stays well under
//! the conditioning range where normal equations would be a concern.

use crate::error::{Error, Result};
use crate::linalg::{invert, solve, Mat};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefs: Vec<f64>,
    /// Standard error per coefficient.
    pub se: Vec<f64>,
    /// Sum of squared residuals.
    pub ssr: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

impl OlsFit {
    pub fn t_ratio(&self, j: usize) -> f64 {
        self.coefs[j] / self.se[j]
    }

    pub fn dof_resid(&self) -> usize {
        self.n_obs - self.n_params
    }
}

/// Fits y = X β. `rows` are the design-matrix rows (each of equal length).
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::invalid("ols: empty or mismatched design"));
    }
    let k = rows[0].len();
    if n <= k {
        return Err(Error::invalid(format!(
            "ols: {n} observations cannot identify {k} parameters"
        )));
    }
    let mut xtx = Mat::zeros(k, k);
    let mut xty = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y.iter()) {
        debug_assert_eq!(row.len(), k);
        for i in 0..k {
            xty[i] += row[i] * yi;
            for j in i..k {
                let v = xtx.get(i, j) + row[i] * row[j];
                xtx.set(i, j, v);
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            xtx.set(i, j, xtx.get(j, i));
        }
    }
    let coefs = solve(xtx.clone(), xty)?;
    let mut ssr = 0.0;
    for (row, &yi) in rows.iter().zip(y.iter()) {
        let mut fit = 0.0;
        for (b, x) in coefs.iter().zip(row.iter()) {
            fit += b * x;
        }
        let r = yi - fit;
        ssr += r * r;
    }
    let s2 = ssr / (n - k) as f64;
    let xtx_inv = invert(&xtx)?;
    let se = (0..k)
        .map(|j| (s2 * xtx_inv.get(j, j)).max(0.0).sqrt())
        .collect();
    Ok(OlsFit {
        coefs,
        se,
        ssr,
        n_obs: n,
        n_params: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        // y = 2 + 3x, no noise: coefficients exact, SSR zero.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = ols(&rows, &y).unwrap();
        assert!((fit.coefs[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefs[1] - 3.0).abs() < 1e-10);
        assert!(fit.ssr < 1e-18);
    }

    #[test]
    fn collinear_design_rejected() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![1.0, i as f64, 2.0 * i as f64])
            .collect();
        let y = vec![1.0; 8];
        assert!(matches!(ols(&rows, &y), Err(Error::Singular(_))));
    }

    #[test]
    fn known_standard_errors() {
        // Textbook case: slope se with hand-computable sums.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.1, 3.9, 6.2, 7.8, 10.1];
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
        let fit = ols(&rows, &y).unwrap();
        // slope ≈ 2.0, intercept ≈ 0.02
        assert!((fit.coefs[1] - 2.0).abs() < 0.05);
        assert!(fit.se[1] > 0.0 && fit.se[1] < 0.1);
    }
}
