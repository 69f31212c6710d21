//! Empirical frequencies and their comparison with analytic probabilities.

use serde::Serialize;

use crate::error::{Error, Result};

/// Half-width floor used when comparing against a degenerate probability.
pub const CI_FLOOR: f64 = 1e-9;

/// `count / n` with a normal-approximation interval of `sigma_level` standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyEstimate {
    pub count: u64,
    pub n: u64,
    pub p_hat: f64,
    pub ci_half_width: f64,
}

impl FrequencyEstimate {
    pub fn new(count: u64, n: u64, sigma_level: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("frequency estimate needs at least one trial".into()));
        }
        if count > n {
            return Err(Error::InvalidConfig(format!("count {count} exceeds n {n}")));
        }
        if !(sigma_level.is_finite() && sigma_level > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma level {sigma_level} must be positive")));
        }
        let p_hat = count as f64 / n as f64;
        let ci_half_width = sigma_level * (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        Ok(FrequencyEstimate { count, n, p_hat, ci_half_width })
    }

    /// `|p_hat − p| ≤ max(ci_half_width, CI_FLOOR)`
    pub fn agrees_with(&self, p: f64) -> bool {
        (self.p_hat - p).abs() <= self.ci_half_width.max(CI_FLOOR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub analytic: f64,
    pub estimate: FrequencyEstimate,
    pub pass: bool,
}

impl ComparisonRow {
    pub fn new(label: impl Into<String>, analytic: f64, estimate: FrequencyEstimate) -> Self {
        ComparisonRow {
            label: label.into(),
            analytic,
            pass: estimate.agrees_with(analytic),
            estimate,
        }
    }
}
