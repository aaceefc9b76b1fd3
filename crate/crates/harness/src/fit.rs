//! Least-squares power-law fits on log-log data.

use serde::Serialize;

use crate::error::{HarnessError, Result};

/// `err ~ exp(intercept) * m^(-b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub b: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope; NaN with only two points.
    pub stderr: f64,
}

pub fn fit_power_law(ms: &[f64], errs: &[f64]) -> Result<PowerLawFit> {
    if ms.len() != errs.len() {
        return Err(HarnessError::Other(format!(
            "{} sample sizes but {} errors",
            ms.len(),
            errs.len()
        )));
    }
    if ms.len() < 2 {
        return Err(HarnessError::Other(
            "a fit needs at least two points".into(),
        ));
    }
    if let Some(v) = ms.iter().chain(errs).find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(HarnessError::Other(format!(
            "power-law fit needs positive values, got {v}"
        )));
    }
    let x: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Other("all sample sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(PowerLawFit {
        b: -slope,
        intercept,
        r2,
        stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [f64; 7] = [1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5];

    #[test]
    fn exact_power_laws() {
        let errs: Vec<f64> = GRID.iter().map(|m| m.powf(-0.5)).collect();
        let fit = fit_power_law(&GRID, &errs).unwrap();
        assert!((fit.b - 0.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let errs: Vec<f64> = GRID.iter().map(|m| 3.0 / m).collect();
        let fit = fit_power_law(&GRID, &errs).unwrap();
        assert!((fit.b - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(fit_power_law(&[0.0, 2.0], &[1.0, 1.0]).is_err());
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
    }
}
