use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

use super::sphericity::symmetric_eigen;
use super::{check_alpha, TestId, TestReport};

/// Relative slack applied to the closed-rectangle membership test.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Empirical joint confidence rectangle aligned with the covariance
/// eigenvectors of the replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRectangle {
    pub center: [f64; 2],
    pub axes: [[f64; 2]; 2],
    /// Covariance eigenvalues `λ₁ ≥ λ₂`; the half-widths are `λᵢ c`.
    pub eigenvalues: [f64; 2],
    pub scale: f64,
    pub alpha: f64,
    pub replicates: usize,
}

impl ConfidenceRectangle {
    fn projections(&self, theta: [f64; 2]) -> [f64; 2] {
        let d = [theta[0] - self.center[0], theta[1] - self.center[1]];
        [
            d[0] * self.axes[0][0] + d[1] * self.axes[0][1],
            d[0] * self.axes[1][0] + d[1] * self.axes[1][1],
        ]
    }

    /// `max_i |⟨θ − θ₀, eᵢ⟩| / λᵢ`; the rectangle holds θ iff this is ≤ c.
    pub fn scaled_distance(&self, theta: [f64; 2]) -> f64 {
        let p = self.projections(theta);
        let mut m: f64 = 0.0;
        for (&proj, &ev) in p.iter().zip(&self.eigenvalues) {
            let s = if ev > 0.0 {
                proj.abs() / ev
            } else if proj == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            m = m.max(s);
        }
        m
    }

    pub fn half_widths(&self) -> [f64; 2] {
        [self.eigenvalues[0] * self.scale, self.eigenvalues[1] * self.scale]
    }

    pub fn contains(&self, theta: [f64; 2]) -> bool {
        self.scaled_distance(theta) <= self.scale * (1.0 + BOUNDARY_SLACK)
    }
}

/// Builds `C_{1−α}` from `N ≥ 10` replicates: centered at their mean, axes
/// from the covariance eigenvectors, and `c` the `⌊(1−α)N⌋`-th smallest
/// scaled distance.
pub fn build_confidence_rectangle(replicates: &[[f64; 2]], alpha: f64) -> Result<ConfidenceRectangle> {
    check_alpha(alpha)?;
    let n = replicates.len();
    if n < 10 {
        return Err(invalid(format!("confidence rectangle needs at least 10 replicates, got {n}")));
    }
    if replicates.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("replicates contain non-finite values"));
    }
    let nf = n as f64;
    let center = [
        replicates.iter().map(|t| t[0]).sum::<f64>() / nf,
        replicates.iter().map(|t| t[1]).sum::<f64>() / nf,
    ];
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for t in replicates {
        let (dx, dy) = (t[0] - center[0], t[1] - center[1]);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let cov = [[sxx / (nf - 1.0), sxy / (nf - 1.0)], [sxy / (nf - 1.0), syy / (nf - 1.0)]];
    let keep = libm::floor((1.0 - alpha) * nf) as usize;

    if replicates.iter().all(|t| *t == replicates[0]) {
        return Ok(ConfidenceRectangle {
            center: replicates[0],
            axes: [[1.0, 0.0], [0.0, 1.0]],
            eigenvalues: [0.0, 0.0],
            scale: 0.0,
            alpha,
            replicates: n,
        });
    }
    let (l1, l2) = symmetric_eigen(cov);
    if !(l2 > 1e-12 * l1) {
        return Err(Error::Degenerate(format!(
            "replicate covariance is singular (eigenvalues {l1:e}, {l2:e})"
        )));
    }
    // eigenvector of l1: (l1 − syy', sxy') or the coordinate axis when diagonal
    let e1 = if cov[0][1].abs() > 0.0 {
        let v = [l1 - cov[1][1], cov[0][1]];
        let norm = libm::hypot(v[0], v[1]);
        [v[0] / norm, v[1] / norm]
    } else if cov[0][0] >= cov[1][1] {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let e2 = [-e1[1], e1[0]];
    let mut rect = ConfidenceRectangle {
        center,
        axes: [e1, e2],
        eigenvalues: [l1, l2],
        scale: 0.0,
        alpha,
        replicates: n,
    };
    let mut scores: Vec<f64> = replicates.iter().map(|&t| rect.scaled_distance(t)).collect();
    scores.sort_by(f64::total_cmp);
    rect.scale = if keep == 0 { 0.0 } else { scores[keep - 1] };
    Ok(rect)
}

/// Rejects isotropy when `θ̂ = (R̂, Σρ)` falls outside the rectangle.
pub fn test_joint(theta_hat: [f64; 2], rect: &ConfidenceRectangle) -> Result<TestReport> {
    if theta_hat.iter().any(|v| !v.is_finite()) {
        return Err(invalid("joint statistic must be finite"));
    }
    let stat = rect.scaled_distance(theta_hat);
    Ok(TestReport::new(TestId::Joint, stat, rect.scale, !rect.contains(theta_hat), rect.alpha)
        .with("resultant_length", theta_hat[0])
        .with("rho_sum", theta_hat[1])
        .with("replicates", rect.replicates as f64)
        .with("half_width_1", rect.half_widths()[0])
        .with("half_width_2", rect.half_widths()[1]))
}
