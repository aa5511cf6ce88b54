//! Effective temperature from a weighted least-squares line through
//! `ln P` versus energy.

use super::histogram::LevelStat;
use crate::error::{Error, Result};

/// Levels with fewer visits than this are left out of the fit by default.
pub const DEFAULT_MIN_COUNT: u64 = 20;

/// Which probability is fitted against energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum FitTarget {
    /// `P(E) / n(E)`: probability of a single configuration at energy `E`.
    #[default]
    PerConfiguration,
    /// `P(E)` as sampled.
    PerEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum FitWeights {
    /// Weight each level by its visit count (Poisson variance of `ln P`).
    #[default]
    Counts,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitOptions {
    pub min_count: u64,
    pub target: FitTarget,
    pub weights: FitWeights,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_count: DEFAULT_MIN_COUNT, target: FitTarget::default(), weights: FitWeights::default() }
    }
}

/// Weighted straight line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the weighted residual variance.
    pub slope_std_err: f64,
    /// Weighted coefficient of determination.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fits `(x, y, w)` triples. The slope variance is
/// `s^2 / sum w (x - xbar)^2` with `s^2 = sum w r^2 / (k - 2)`, which is
/// unchanged when all weights are multiplied by a constant.
pub fn weighted_line_fit(points: &[(f64, f64, f64)]) -> Result<LineFit> {
    let k = points.len();
    if k < 3 {
        return Err(Error::InsufficientData { usable: k });
    }
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if !(sw > 0.0) {
        return Err(Error::param("fit weights must have a positive sum"));
    }
    let xbar = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ybar = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y, w) in points {
        let (dx, dy) = (x - xbar, y - ybar);
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::param("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = points
        .iter()
        .map(|&(x, y, w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let slope_std_err = (ssr / (k as f64 - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LineFit { slope, intercept, slope_std_err, r_squared, n_points: k })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TempFit {
    pub t_eff: f64,
    /// One standard deviation of `t_eff`, propagated from the slope.
    pub std_err: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Fitted line `ln P = intercept + slope E`.
    pub slope: f64,
    pub intercept: f64,
}

/// Fits `ln P = c - E / T_eff` over levels with at least `min_count` visits.
pub fn fit_temperature(levels: &[LevelStat], opts: &FitOptions) -> Result<TempFit> {
    let points: Vec<(f64, f64, f64)> = levels
        .iter()
        .filter(|l| l.count >= opts.min_count.max(1))
        .map(|l| {
            let p = match opts.target {
                FitTarget::PerConfiguration => l.p_per_config,
                FitTarget::PerEnergy => l.p_energy,
            };
            let w = match opts.weights {
                FitWeights::Counts => l.count as f64,
                FitWeights::Uniform => 1.0,
            };
            (l.energy, p.ln(), w)
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData { usable: points.len() });
    }
    let line = weighted_line_fit(&points)?;
    if !(line.slope < 0.0) {
        return Err(Error::NoThermalFit { slope: line.slope });
    }
    let t_eff = -1.0 / line.slope;
    Ok(TempFit {
        t_eff,
        std_err: line.slope_std_err / (line.slope * line.slope),
        r_squared: line.r_squared,
        n_points: line.n_points,
        slope: line.slope,
        intercept: line.intercept,
    })
}
