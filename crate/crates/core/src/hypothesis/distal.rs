use core::f64::consts::{FRAC_PI_2, PI};

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circular::{kappa_hat, resultant_length, AngleSample, UNDEFINED_MEAN_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::special::{bessel_i0e, integrate, normal_quantile};

use super::{check_alpha, TestId, TestReport};

/// Bisection stops once the bracket is narrower than this.
const DELTA_TOLERANCE: f64 = 1e-10;

/// Bootstrap variances below this are treated as zero.
const DEGENERATE_VARIANCE: f64 = 1e-16;

/// Resultant lengths this close to 1 are treated as infinitely concentrated.
const FULL_CONCENTRATION: f64 = 1e-12;

/// Which resultant multiplies `κ̂` in the conditional concentration of `μ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationScale {
    /// `κ̂ R̂` with the mean resultant length `R̂ ∈ [0, 1]`.
    MeanResultant,
    /// `κ̂ m R̂`, the total resultant length of `m` angles.
    #[default]
    TotalResultant,
}

/// Settings shared by the two tests for growth along a given axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistalTestConfig {
    /// Accuracy on the doubled-angle scale, twice the alignment precision.
    pub epsilon: f64,
    pub alpha: f64,
    pub bootstrap_b: usize,
    /// Target axis on the `γ` scale; 0 is the horizontal (distal) axis.
    pub axis: f64,
    pub concentration: ConcentrationScale,
}

impl Default for DistalTestConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.15,
            alpha: 0.05,
            bootstrap_b: 100,
            axis: 0.0,
            concentration: ConcentrationScale::default(),
        }
    }
}

impl DistalTestConfig {
    /// Config with `ε = 2η` for alignment precision `η`.
    pub fn from_eta(eta: f64) -> Self {
        Self {
            epsilon: 2.0 * eta,
            ..Self::default()
        }
    }

    pub fn eta(&self) -> f64 {
        0.5 * self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        check_alpha(self.alpha)?;
        if !self.axis.is_finite() {
            return Err(invalid("test axis must be finite"));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
        return Err(invalid(format!("accuracy epsilon must lie in (0, π/2), got {epsilon}")));
    }
    Ok(())
}

/// Mass of `(−δ, δ)` under a von Mises law with location `ε` and
/// concentration `k`.
fn central_mass(delta: f64, k: f64, epsilon: f64, norm: f64) -> f64 {
    let f = |x: f64| libm::exp(k * (libm::cos(x - epsilon) - 1.0));
    integrate(f, -delta, delta, 1e-13) / norm
}

/// Critical angle `δ ∈ (0, ε)` at which a von Mises law centered at `ε` with
/// concentration `k` puts mass `α` on `(−δ, δ)`. Returns `None` when even
/// `(−ε, ε)` carries less than `α`, and `Some(ε)` when `k` is infinite.
pub fn solve_delta(k: f64, epsilon: f64, alpha: f64) -> Result<Option<f64>> {
    check_epsilon(epsilon)?;
    check_alpha(alpha)?;
    if k.is_nan() || k < 0.0 {
        return Err(invalid(format!("concentration must be non-negative, got {k}")));
    }
    if k == f64::INFINITY {
        return Ok(Some(epsilon));
    }
    let norm = 2.0 * PI * bessel_i0e(k)?;
    if central_mass(epsilon, k, epsilon, norm) < alpha {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, epsilon);
    while hi - lo > DELTA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if central_mass(mid, k, epsilon, norm) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `Σ e^{iθ_j}` rotated so that the target axis `a` sits at 0, i.e.
/// multiplied by `e^{−2ia}`.
fn axis_resultant(values: impl Iterator<Item = f64>, axis: f64) -> Complex64 {
    values.map(Complex64::cis).sum::<Complex64>() * Complex64::cis(-2.0 * axis)
}

/// Extrinsic mean of the doubled angles measured from the doubled target axis.
pub fn axis_relative_mean(sample: &AngleSample, axis: f64) -> Result<f64> {
    let r = resultant_length(sample);
    if r < UNDEFINED_MEAN_THRESHOLD {
        return Err(Error::UndefinedMean(r));
    }
    Ok(axis_resultant(sample.values().iter().copied(), axis).arg())
}

/// Parametric test of `|μ| ≥ ε` against `|μ| < ε`: reject when `|μ̄| < δ`.
pub fn test_distal_vm(sample: &AngleSample, cfg: &DistalTestConfig) -> Result<TestReport> {
    cfg.validate()?;
    let mu = axis_relative_mean(sample, cfg.axis)?;
    let m = sample.len() as f64;
    let r = resultant_length(sample);
    let kappa = if r >= 1.0 - FULL_CONCENTRATION {
        f64::INFINITY
    } else {
        kappa_hat(r)?
    };
    let k = match cfg.concentration {
        ConcentrationScale::MeanResultant => kappa * r,
        ConcentrationScale::TotalResultant => kappa * m * r,
    };
    let delta = solve_delta(k, cfg.epsilon, cfg.alpha)?;
    let reject = delta.is_some_and(|d| mu.abs() < d);
    let mut report = TestReport::new(TestId::DistalVm, mu.abs(), delta.unwrap_or(0.0), reject, cfg.alpha)
        .with("mean", mu)
        .with("resultant_length", r)
        .with("kappa_hat", kappa)
        .with("concentration", k)
        .with("n", m)
        .with("axis", cfg.axis)
        .with("delta_found", if delta.is_some() { 1.0 } else { 0.0 });
    report.epsilon = Some(cfg.epsilon);
    Ok(report)
}

/// Bootstrap test of `|μ| ≥ ε` with a ChaCha8 stream seeded from `seed`.
pub fn test_distal_boot(sample: &AngleSample, cfg: &DistalTestConfig, seed: u64) -> Result<TestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = test_distal_boot_with_rng(sample, cfg, &mut rng)?;
    report.seed = Some(seed);
    Ok(report)
}

/// Bootstrap test of `|μ| ≥ ε`: `T = (μ̄² − ε²)/√V*` with `V*` the variance
/// of `B` resampled squared means; reject when `T < Φ⁻¹(α)`.
///
/// A zero bootstrap variance decides by the sign of `μ̄² − ε²`.
pub fn test_distal_boot_with_rng<R: Rng + ?Sized>(
    sample: &AngleSample,
    cfg: &DistalTestConfig,
    rng: &mut R,
) -> Result<TestReport> {
    cfg.validate()?;
    let n = sample.len();
    if n < 5 {
        return Err(invalid(format!("bootstrap test needs at least 5 angles, got {n}")));
    }
    if cfg.bootstrap_b < 50 {
        return Err(invalid(format!("bootstrap needs B >= 50, got {}", cfg.bootstrap_b)));
    }
    let mu = axis_relative_mean(sample, cfg.axis)?;
    let values = sample.values();
    let squares: Vec<f64> = (0..cfg.bootstrap_b)
        .map(|_| {
            let z = axis_resultant((0..n).map(|_| values[rng.random_range(0..n)]), cfg.axis);
            let m = z.arg();
            m * m
        })
        .collect();
    let b = squares.len() as f64;
    let mean = squares.iter().sum::<f64>() / b;
    let var = squares.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (b - 1.0);
    let eps2 = cfg.epsilon * cfg.epsilon;
    let numerator = mu * mu - eps2;
    let degenerate = var < DEGENERATE_VARIANCE;
    let t = if degenerate {
        // a mean sitting on the boundary up to rounding counts as T = 0
        if numerator.abs() <= 1e-12 * eps2 {
            0.0
        } else {
            numerator.signum() * f64::INFINITY
        }
    } else {
        numerator / libm::sqrt(var)
    };
    let quantile = normal_quantile(cfg.alpha)?;
    let mut report = TestReport::new(TestId::DistalBoot, t, quantile, t < quantile, cfg.alpha)
        .with("mean", mu)
        .with("bootstrap_variance", var)
        .with("bootstrap_b", b)
        .with("n", n as f64)
        .with("axis", cfg.axis)
        .with("degenerate_bootstrap", if degenerate { 1.0 } else { 0.0 });
    report.epsilon = Some(cfg.epsilon);
    Ok(report)
}
