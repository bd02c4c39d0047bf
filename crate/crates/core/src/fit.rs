//! Ordinary least-squares line fits, used for log-log rate estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("fit_line: length mismatch".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::FitDegenerate(format!("{n} points")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::FitDegenerate("non-finite sample".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDegenerate("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        residual: (sse / nf).sqrt(),
        r_squared,
        points: n,
    })
}

/// Fit `log |v| = log C + s·log(x)`, returning the exponent `s` in the fit slope.
pub fn fit_power_law(x: &[f64], v: &[f64]) -> Result<LineFit> {
    if v.iter().any(|a| *a == 0.0) {
        return Err(Error::FitDegenerate("zero sample in power-law fit".into()));
    }
    let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
    let lv: Vec<f64> = v.iter().map(|a| a.abs().ln()).collect();
    fit_line(&lx, &lv)
}

/// Geometric sequence from `start` towards `end` (inclusive, up to rounding)
/// with the given ratio in (0, 1).
pub fn geometric_sequence(start: f64, end: f64, ratio: f64) -> Vec<f64> {
    assert!(ratio > 0.0 && ratio < 1.0 && start > end && end > 0.0);
    let mut out = Vec::new();
    let mut v = start;
    while v >= end * (1.0 - 1e-9) {
        out.push(v);
        v *= ratio;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_law_exponent() {
        let x = geometric_sequence(0.1, 1e-4, 0.5);
        let v: Vec<f64> = x.iter().map(|e| 3.0 * e.powf(-1.5)).collect();
        let f = fit_power_law(&x, &v).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn geometric_includes_endpoint() {
        let s = geometric_sequence(0.1, 0.0125, 0.5);
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.0125).abs() < 1e-15);
    }
}
