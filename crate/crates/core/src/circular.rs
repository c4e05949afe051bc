//! Directional statistics on the doubled-angle circle.
//!
//! Axes `γ ∈ [0, π)` are mapped to `2γ` so that `γ` and `γ + π` coincide.
//! All location quantities here live on that doubled scale.

use core::f64::consts::{PI, TAU};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Distribution;

use crate::angle::wrap_pi;
use crate::error::{invalid, Error, Result};
pub use crate::special::bessel_i0;
use crate::special::bessel_i0e;

/// Resultant lengths below this leave the extrinsic mean undefined.
pub const UNDEFINED_MEAN_THRESHOLD: f64 = 1e-12;

/// Default rose-diagram resolution.
pub const DEFAULT_ROSE_BINS: usize = 24;

/// A non-empty sample of angles reduced to `[-π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSample {
    values: Vec<f64>,
}

impl AngleSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("angle sample is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("angle sample contains a non-finite value"));
        }
        Ok(Self {
            values: values.into_iter().map(wrap_pi).collect(),
        })
    }

    /// Doubles axis angles `γ` into `2γ`.
    pub fn from_axes(gammas: &[f64]) -> Result<Self> {
        Self::new(gammas.iter().map(|g| 2.0 * g).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Σ e^{iθ_j}.
    pub fn resultant_vector(&self) -> Complex64 {
        self.values.iter().map(|&t| Complex64::cis(t)).sum()
    }

    /// Adds `shift` to every angle.
    pub fn rotated(&self, shift: f64) -> Self {
        Self {
            values: self.values.iter().map(|&t| wrap_pi(t + shift)).collect(),
        }
    }
}

/// Mean resultant length `|Σ e^{iθ_j}| / m`, in `[0, 1]`.
pub fn resultant_length(sample: &AngleSample) -> f64 {
    (sample.resultant_vector().norm() / sample.len() as f64).min(1.0)
}

/// Argument of `Σ e^{iθ_j}` in `[-π, π)`; the von Mises location MLE.
pub fn extrinsic_mean(sample: &AngleSample) -> Result<f64> {
    let r = resultant_length(sample);
    if r < UNDEFINED_MEAN_THRESHOLD {
        return Err(Error::UndefinedMean(r));
    }
    Ok(wrap_pi(sample.resultant_vector().arg()))
}

/// Resultant length, extrinsic mean and concentration of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularSummary {
    pub resultant_length: f64,
    /// `None` when the resultant length is below [`UNDEFINED_MEAN_THRESHOLD`].
    pub extrinsic_mean: Option<f64>,
    /// `None` when the resultant length is 1 (infinite concentration).
    pub kappa_hat: Option<f64>,
}

impl CircularSummary {
    pub fn of(sample: &AngleSample) -> Self {
        let r = resultant_length(sample);
        Self {
            resultant_length: r,
            extrinsic_mean: extrinsic_mean(sample).ok(),
            kappa_hat: kappa_hat(r).ok(),
        }
    }
}

/// Piecewise approximation of the von Mises concentration MLE from the mean
/// resultant length. Branches are half-open at 0.53 and 0.85.
pub fn kappa_hat(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(invalid(format!(
            "concentration needs resultant length in [0, 1), got {r}"
        )));
    }
    Ok(if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 / 6.0 * r.powi(5)
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (2.0 * (1.0 - r))
    })
}

/// Von Mises density of the axis `γ` with respect to `dγ/π` on the half circle:
/// `I₀(κ)^{-1} e^{κ cos(2γ − μ)}`.
pub fn von_mises_halfcircle_density(gamma: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !gamma.is_finite() || !mu.is_finite() {
        return Err(invalid("density arguments must be finite"));
    }
    // scaled form keeps large κ finite
    let i0e = bessel_i0e(kappa)?;
    Ok(libm::exp(kappa * (libm::cos(2.0 * gamma - mu) - 1.0)) / i0e)
}

/// Equal-width bins partitioning `[-π, π)`; returns `(center, count)` pairs.
pub fn rose_bins(sample: &AngleSample, bin_count: usize) -> Result<Vec<(f64, usize)>> {
    if bin_count < 2 {
        return Err(invalid(format!("rose diagram needs at least 2 bins, got {bin_count}")));
    }
    let width = TAU / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    for &t in sample.values() {
        let idx = (libm::floor((t + PI) / width) as usize).min(bin_count - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (-PI + (k as f64 + 0.5) * width, c))
        .collect())
}

/// Von Mises distribution on the full circle, sampled with the Best–Fisher
/// rejection scheme. Samples are reduced to `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMises {
    mu: f64,
    kappa: f64,
    r: f64,
}

impl VonMises {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !mu.is_finite() || !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("invalid von Mises parameters ({mu}, {kappa})")));
        }
        let r = if kappa < 1e-8 {
            0.0
        } else {
            let t = 1.0 + libm::sqrt(1.0 + 4.0 * kappa * kappa);
            let rho = (t - libm::sqrt(2.0 * t)) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        };
        Ok(Self { mu, kappa, r })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Density with respect to `dθ` on `[-π, π)`.
    pub fn pdf(&self, theta: f64) -> f64 {
        let i0 = bessel_i0e(self.kappa).unwrap_or(f64::NAN);
        libm::exp(self.kappa * (libm::cos(theta - self.mu) - 1.0)) / (TAU * i0)
    }
}

impl Distribution<f64> for VonMises {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.r == 0.0 {
            return wrap_pi(rng.random::<f64>() * TAU - PI);
        }
        loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let z = libm::cos(PI * u1);
            let f = (1.0 + self.r * z) / (self.r + z);
            let c = self.kappa * (self.r - f);
            if c * (2.0 - c) - u2 > 0.0 || libm::log(c / u2) + 1.0 - c >= 0.0 {
                let u3: f64 = rng.random();
                let dev = libm::acos(f.clamp(-1.0, 1.0));
                let theta = if u3 > 0.5 { self.mu + dev } else { self.mu - dev };
                return wrap_pi(theta);
            }
        }
    }
}
