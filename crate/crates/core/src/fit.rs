//! Exponential scaling fits `p ~ C exp(-alpha N^beta)` by least squares on
//! `ln p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Points used in the fit, `(n_spins, value)`.
    pub points: Vec<(f64, f64)>,
    pub beta: f64,
    pub alpha: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Sum of squared residuals of `ln p`.
    pub residual: f64,
    /// Points left out because their value was not positive.
    pub dropped: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept - self.alpha * n.powf(self.beta)).exp()
    }
}

/// Fits `ln p = c - alpha N^beta` over points with `p > 0`.
pub fn fit_scaling(points: &[(f64, f64)], beta: f64) -> Result<ScalingFit> {
    if !beta.is_finite() {
        return Err(Error::Fit(format!("beta must be finite, got {beta}")));
    }
    let (used, dropped): (Vec<_>, Vec<_>) = points.iter().copied().partition(|&(_, p)| p > 0.0);
    if let Some(&(n, p)) = used.iter().find(|(n, p)| !n.is_finite() || !p.is_finite() || *n < 0.0) {
        return Err(Error::Fit(format!("unusable point ({n}, {p})")));
    }
    if used.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 points with positive probability, got {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|&(n, _)| n.powf(beta)).collect();
    let ys: Vec<f64> = used.iter().map(|&(_, p)| p.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all points share the same N^beta".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let alpha = -slope;
    if !alpha.is_finite() {
        return Err(Error::Fit("alpha is not finite".into()));
    }
    Ok(ScalingFit {
        points: used,
        beta,
        alpha,
        intercept,
        residual,
        dropped,
    })
}

/// Fits `T ~ C exp(alpha N^beta)` for run times; same machinery on `1/T`.
pub fn fit_time_scaling(points: &[(f64, f64)], beta: f64) -> Result<ScalingFit> {
    let inv: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, t)| (n, if t > 0.0 { 1.0 / t } else { 0.0 }))
        .collect();
    let mut fit = fit_scaling(&inv, beta)?;
    fit.intercept = -fit.intercept;
    let restore = |v: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        v.into_iter()
            .map(|(n, _)| *points.iter().find(|p| p.0 == n).expect("point came from input"))
            .collect()
    };
    fit.points = restore(fit.points);
    fit.dropped = restore(fit.dropped);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(alpha: f64, beta: f64) -> Vec<(f64, f64)> {
        [8.0, 12.0, 16.0, 20.0, 28.0]
            .iter()
            .map(|&n: &f64| (n, (-alpha * n.powf(beta)).exp()))
            .collect()
    }

    #[test]
    fn recovers_synthetic_rates() {
        for a in [0.6, 0.1] {
            let f = fit_scaling(&synthetic(a, 1.0), 1.0).unwrap();
            assert!((f.alpha - a).abs() < 1e-9, "{}", f.alpha);
            assert!(f.intercept.abs() < 1e-9);
            assert!(f.residual < 1e-18);
        }
        let f = fit_scaling(&synthetic(0.3, 0.5), 0.5).unwrap();
        assert!((f.alpha - 0.3).abs() < 1e-9);
    }

    #[test]
    fn drops_zeros_and_needs_two_points() {
        let mut pts = synthetic(0.2, 1.0);
        pts.push((40.0, 0.0));
        let f = fit_scaling(&pts, 1.0).unwrap();
        assert_eq!(f.dropped, vec![(40.0, 0.0)]);
        assert_eq!(f.points.len(), 5);
        assert!(matches!(
            fit_scaling(&[(8.0, 0.5), (12.0, 0.0)], 1.0),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            fit_scaling(&[(8.0, 0.5), (8.0, 0.2)], 1.0),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn time_fit() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 30.0]
            .iter()
            .map(|&n: &f64| (n, 2.0 * (0.4 * n).exp()))
            .collect();
        let f = fit_time_scaling(&pts, 1.0).unwrap();
        assert!((f.alpha - 0.4).abs() < 1e-9);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-9);
        assert_eq!(f.points, pts);
    }
}
