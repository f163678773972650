//! Power-law regression of a positive statistic against `N`.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_grid: Vec<f64>,
    pub statistic: String,
    /// `ln y_i − (intercept + exponent · ln N_i)`.
    pub residuals: Vec<f64>,
    /// Weighted residual sum of squares over `n − 2` degrees of freedom.
    pub reduced_chi2: f64,
    pub weighted: bool,
}

/// Weighted least squares of `ln y` on `ln N`. With `errors`, point `i`
/// gets weight `(y_i / σ_i)²`, the inverse variance of `ln y_i`.
pub fn fit_exponent(n_grid: &[f64], values: &[f64], errors: Option<&[f64]>, statistic: &str) -> Result<ExponentFit> {
    let n = n_grid.len();
    if n < 4 {
        return Err(Error::invalid(format!("exponent fits need at least 4 grid points, got {n}")));
    }
    if values.len() != n || errors.is_some_and(|e| e.len() != n) {
        return Err(Error::invalid("grid, values and errors must have equal lengths"));
    }
    if let Some(i) = values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!(
            "statistic '{statistic}' is not positive at N = {} (value {})",
            n_grid[i], values[i]
        )));
    }
    if n_grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("grid points must be positive"));
    }
    let weighted = errors.is_some_and(|e| e.iter().all(|&s| s > 0.0 && s.is_finite()));
    let w: Vec<f64> = match errors {
        Some(e) if weighted => values.iter().zip(e).map(|(v, s)| (v / s).powi(2)).collect(),
        _ => vec![1.0; n],
    };
    let x: Vec<f64> = n_grid.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(a, b)| a * (b - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("grid points must not all coincide"));
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - intercept - exponent * x[i]).collect();
    let rss: f64 = (0..n).map(|i| w[i] * residuals[i].powi(2)).sum();
    let reduced_chi2 = rss / (n - 2) as f64;
    Ok(ExponentFit {
        exponent,
        intercept,
        stderr: (reduced_chi2 / sxx).sqrt(),
        n_grid: n_grid.to_vec(),
        statistic: statistic.to_string(),
        residuals,
        reduced_chi2,
        weighted,
    })
}
