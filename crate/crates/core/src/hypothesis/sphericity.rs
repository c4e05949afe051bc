use alloc::format;

use crate::error::{invalid, Result};
use crate::estimator::full_procrustes_residuals;
use crate::pattern::MatchedPair;

/// Likelihood-ratio sphericity statistic `ρ = 2n log(â/ĝ)` of a 2×2 covariance,
/// with `â`, `ĝ` the arithmetic and geometric means of its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericityStat {
    pub rho: f64,
    pub n: usize,
    /// `(ℓ₁, ℓ₂)` with `ℓ₁ ≥ ℓ₂ > 0`.
    pub eigenvalues: (f64, f64),
}

pub(crate) fn symmetric_eigen(m: [[f64; 2]; 2]) -> (f64, f64) {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let disc = libm::hypot(half_diff, m[0][1]);
    (half_tr + disc, half_tr - disc)
}

pub fn sphericity_rho(cov: [[f64; 2]; 2], n: usize) -> Result<SphericityStat> {
    let off = cov[0][1];
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("covariance has non-finite entries"));
    }
    let scale = cov[0][0].abs().max(cov[1][1].abs()).max(1e-300);
    if (off - cov[1][0]).abs() > 1e-12 * scale {
        return Err(invalid("covariance is not symmetric"));
    }
    let (l1, l2) = symmetric_eigen(cov);
    if !(l2 > 0.0) {
        return Err(invalid(format!(
            "covariance is not positive definite (eigenvalues {l1}, {l2})"
        )));
    }
    let log_ratio = libm::log(0.5 * (l1 + l2)) - 0.5 * (libm::log(l1) + libm::log(l2));
    Ok(SphericityStat {
        rho: (2.0 * n as f64 * log_ratio).max(0.0),
        n,
        eigenvalues: (l1, l2),
    })
}

/// Empirical (divide-by-n) covariance of full-Procrustes residual displacements.
pub fn residual_covariance(pair: &MatchedPair) -> Result<[[f64; 2]; 2]> {
    let res = full_procrustes_residuals(pair)?;
    let n = res.len() as f64;
    let mean = res.iter().sum::<num_complex::Complex64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in &res {
        let d = r - mean;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    Ok([[sxx / n, sxy / n], [sxy / n, syy / n]])
}

/// `ρ` of one matched pair.
pub fn pair_sphericity(pair: &MatchedPair) -> Result<SphericityStat> {
    sphericity_rho(residual_covariance(pair)?, pair.n())
}
