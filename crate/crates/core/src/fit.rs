//! Least-squares line fits used for empirical convergence orders and
//! log-factor regressions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y ≈ a + b·x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter(format!(
            "a line fit needs at least two paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LineFit { intercept, slope, r_squared })
}

/// Slope of `ln(error)` against `ln(h)` over the last `levels` entries.
pub fn convergence_order(h: &[f64], errors: &[f64], levels: usize) -> Result<f64> {
    if h.len() != errors.len() || h.len() < 3 {
        return Err(Error::Parameter("an order fit needs at least three levels".into()));
    }
    let start = h.len().saturating_sub(levels.max(3));
    let lx: Vec<f64> = h[start..].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors[start..].iter().map(|v| v.ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("errors must be positive to fit an order".into()));
    }
    Ok(fit_line(&lx, &ly)?.slope)
}

/// An affine upper envelope `a + b·x` fitted on the leading points and
/// tested on the held-out trailing ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub intercept: f64,
    /// Least-squares slope on the fitted points, floored at zero.
    pub slope: f64,
    pub fitted: usize,
    /// Largest `y/(a + b·x) − 1` over the held-out points.
    pub max_excess: f64,
    pub holds: bool,
}

/// Fits `y ≈ a + b·x` on all but the last `holdout` points, lifts `a` until the
/// line covers every fitted point, and accepts when each held-out point lies
/// below the envelope with relative slack `slack`.
pub fn affine_envelope(x: &[f64], y: &[f64], holdout: usize, slack: f64) -> Result<EnvelopeCheck> {
    if x.len() != y.len() || x.len() < holdout + 2 {
        return Err(Error::Parameter(format!(
            "an envelope check needs at least {} points, got {}",
            holdout + 2,
            x.len()
        )));
    }
    let fitted = x.len() - holdout;
    let line = fit_line(&x[..fitted], &y[..fitted])?;
    let slope = line.slope.max(0.0);
    let lift = x[..fitted].iter().zip(&y[..fitted]).map(|(a, b)| b - slope * a).fold(f64::NEG_INFINITY, f64::max);
    let max_excess = x[fitted..]
        .iter()
        .zip(&y[fitted..])
        .map(|(a, b)| b / (lift + slope * a) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EnvelopeCheck { intercept: lift, slope, fitted, max_excess, holds: max_excess <= slack })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let h: Vec<f64> = (2..7).map(|e| 2f64.powi(-e)).collect();
        let err: Vec<f64> = h.iter().map(|v| 3.0 * v.powf(3.5)).collect();
        assert!((convergence_order(&h, &err, 4).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn line_fit_quality() {
        let f = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(convergence_order(&[0.5, 0.25], &[1.0, 0.5], 4).is_err());
    }

    #[test]
    fn envelope_accepts_log_growth_and_rejects_faster() {
        let x: Vec<f64> = (1..=6).map(|e| 1.0 + e as f64 * 2f64.ln()).collect();
        let slow: Vec<f64> = x.iter().map(|v| 0.2 + 0.1 * v).collect();
        assert!(affine_envelope(&x, &slow, 2, 0.1).unwrap().holds);
        let fast: Vec<f64> = x.iter().map(|v| (0.8 * v).exp()).collect();
        let c = affine_envelope(&x, &fast, 2, 0.1).unwrap();
        assert!(!c.holds && c.max_excess > 0.1);
        assert!(affine_envelope(&x[..3], &slow[..3], 2, 0.1).is_err());
    }
}
