//! Tests for the presence and the axis of anisotropic growth.
//!
//! | test          | null hypothesis         | input                     |
//! |---------------|-------------------------|---------------------------|
//! | `rayleigh`    | growth is isotropic     | doubled axes `2γ̂`         |
//! | `tau_ks`      | growth is isotropic     | `τ̂` against a reference   |
//! | `joint`       | growth is isotropic     | `(R̂, Σρ)` against replicates |
//! | `distal_vm`   | growth is not along the axis | doubled axes, von Mises |
//! | `distal_boot` | growth is not along the axis | doubled axes, bootstrap |

mod distal;
mod joint;
mod ks;
mod rayleigh;
mod report;
mod sphericity;

pub use distal::{
    axis_relative_mean, solve_delta, test_distal_boot, test_distal_boot_with_rng, test_distal_vm,
    ConcentrationScale, DistalTestConfig,
};
pub use joint::{build_confidence_rectangle, test_joint, ConfidenceRectangle};
pub use ks::{ks_p_value, ks_statistic, test_tau_ks};
pub use rayleigh::{rayleigh_statistic, rayleigh_statistic_from, test_rayleigh};
pub use report::{Decision, TestId, TestReport};
pub use sphericity::{pair_sphericity, residual_covariance, sphericity_rho, SphericityStat};

use alloc::format;

use crate::error::{invalid, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("level alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}
