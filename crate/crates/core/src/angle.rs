//! Angle reduction helpers.

use core::f64::consts::{PI, TAU};

/// Reduces an angle to `[-π, π)`.
pub fn wrap_pi(theta: f64) -> f64 {
    let r = theta - TAU * libm::floor((theta + PI) / TAU);
    // floor can land exactly on the excluded endpoint after rounding
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Reduces an axis angle to `[0, π)`.
pub fn wrap_axis(theta: f64) -> f64 {
    let r = theta - PI * libm::floor(theta / PI);
    if !(0.0..PI).contains(&r) {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles on the circle, in `[-π, π)`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b)
}
