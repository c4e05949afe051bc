use alloc::format;

use crate::circular::{resultant_length, AngleSample};
use crate::error::{invalid, Result};
use crate::special::{chi2_2_quantile, chi2_2_sf};

use super::{check_alpha, TestId, TestReport};

/// `2 m R̂²` for `m` angles with mean resultant length `R̂`.
pub fn rayleigh_statistic_from(m: usize, resultant: f64) -> Result<f64> {
    if m < 2 {
        return Err(invalid(format!("Rayleigh statistic needs at least 2 angles, got {m}")));
    }
    if !(0.0..=1.0).contains(&resultant) {
        return Err(invalid(format!("resultant length {resultant} outside [0, 1]")));
    }
    Ok(2.0 * m as f64 * resultant * resultant)
}

pub fn rayleigh_statistic(sample: &AngleSample) -> Result<f64> {
    rayleigh_statistic_from(sample.len(), resultant_length(sample))
}

/// Rejects uniformity of the doubled axes when `2 m R̂² > χ²_{2, 1−α}`.
pub fn test_rayleigh(sample: &AngleSample, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let r = resultant_length(sample);
    let stat = rayleigh_statistic_from(sample.len(), r)?;
    let threshold = chi2_2_quantile(1.0 - alpha)?;
    let mut report = TestReport::new(TestId::Rayleigh, stat, threshold, stat > threshold, alpha)
        .with("m", sample.len() as f64)
        .with("resultant_length", r);
    report.p_value = Some(chi2_2_sf(stat));
    Ok(report)
}
