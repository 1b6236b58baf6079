use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increasing list of `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TSchedule(Vec<f64>);

impl Default for TSchedule {
    fn default() -> Self {
        Self(vec![4.0, 5.66, 8.0, 11.3, 16.0, 22.6, 32.0])
    }
}

impl TSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let s = Self(values);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidInput("schedule is empty".into()));
        }
        if self.0.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidInput("schedule values must be positive".into()));
        }
        if self.0.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("schedule must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Least-squares fit of `log err = log C - epsilon t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub r_squared: f64,
    /// `epsilon > 0` with a nonzero spread in the data.
    pub decaying: bool,
    /// Some errors were clamped at machine epsilon before fitting.
    #[serde(default)]
    pub clamped: bool,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!("rate fit needs at least 3 points, got {}", points.len())));
    }
    for (i, &(_, e)) in points.iter().enumerate() {
        if !(e > 0.0) {
            return Err(Error::NonPositiveError { index: i, value: e });
        }
    }
    let n = points.len() as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(t, e) in points {
        let (dx, dy) = (t - tm, e.ln() - ym);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs distinct t values".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss_res = (syy - slope * sxy).max(0.0);
    let flat = syy <= 1e-24 * (1.0 + ym * ym);
    let r_squared = if flat { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    let epsilon = if flat { 0.0 } else { -slope };
    Ok(RateFit { c: intercept.exp(), epsilon, r_squared, decaying: epsilon > 0.0, clamped: false })
}

/// Clamps nonpositive errors at machine epsilon, fits, and flags the clamp.
pub fn rate_fit_clamped(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut clamped = false;
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(t, e)| {
            if e > f64::EPSILON {
                (t, e)
            } else {
                clamped = true;
                (t, f64::EPSILON)
            }
        })
        .collect();
    let mut fit = rate_fit(&pts)?;
    fit.clamped = clamped;
    if clamped {
        fit.decaying = false;
    }
    Ok(fit)
}
