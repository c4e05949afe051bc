//! Synthetic minutiae patterns, the isotropic null model, injected
//! anisotropic growth and alignment precision.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimator::{estimate, partial_procrustes, SolverConfig};
use crate::pattern::{MatchedPair, MinutiaPattern, StudyDataset};

/// Noise coordinates are redrawn until they lie within this many standard
/// deviations.
pub const NOISE_TRUNCATION: f64 = 5.0;

/// Patterns with fewer points are redrawn.
pub const MIN_SIMULATED_POINTS: usize = 3;

/// Laws are redrawn at most this often before giving up on their support.
const MAX_REDRAWS: usize = 10_000;

/// I.i.d. Gaussian displacement truncated per coordinate at
/// [`NOISE_TRUNCATION`] standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("noise level must be finite and non-negative, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    fn coordinate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x.abs() <= NOISE_TRUNCATION {
                return self.sigma * x;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        if self.sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let re = self.coordinate(rng);
        let im = self.coordinate(rng);
        Complex64::new(re, im)
    }
}

/// Axis-parallel rectangle `[−a, a] × [−b, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub half_width: f64,
    pub half_height: f64,
}

impl Rectangle {
    pub fn new(half_width: f64, half_height: f64) -> Result<Self> {
        let r = Self {
            half_width,
            half_height,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.half_width) || !ok(self.half_height) {
            return Err(invalid(format!(
                "rectangle half-extents must be positive, got ({}, {})",
                self.half_width, self.half_height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re.abs() <= self.half_width && z.im.abs() <= self.half_height
    }
}

/// Shape of a simulated study under the isotropic null model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub fingers: u32,
    pub impressions: u32,
    /// Expected number of points per pattern.
    pub intensity: f64,
    /// Finger `p` (1-based) uses rectangle `(p − 1) mod len`.
    pub rectangles: Vec<Rectangle>,
    /// Isotropic rate of each impression, drawn uniformly from this list.
    pub lambda_values: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Eight fingers with seven further impressions each, 22 expected
    /// minutiae in `[−95, 95] × [−160, 160]` and noise level 7.
    pub fn stand_in() -> Self {
        Self {
            fingers: 8,
            impressions: 7,
            intensity: 22.0,
            rectangles: alloc::vec![Rectangle {
                half_width: 95.0,
                half_height: 160.0,
            }],
            lambda_values: alloc::vec![1.0],
            sigma: 7.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fingers == 0 || self.impressions == 0 {
            return Err(invalid("simulation needs at least one finger and one impression"));
        }
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(invalid(format!("intensity must be positive, got {}", self.intensity)));
        }
        if self.rectangles.is_empty() {
            return Err(invalid("simulation needs at least one rectangle"));
        }
        for r in &self.rectangles {
            r.validate()?;
        }
        if self.lambda_values.is_empty() || self.lambda_values.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("isotropic rates must be a non-empty list of positive values"));
        }
        NoiseModel::new(self.sigma)?;
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel { sigma: self.sigma }
    }

    pub fn rectangle_for(&self, finger: u32) -> Rectangle {
        self.rectangles[(finger.saturating_sub(1) as usize) % self.rectangles.len()]
    }
}

/// Homogeneous Poisson pattern in `rect` with `intensity` expected points,
/// redrawn until it has at least [`MIN_SIMULATED_POINTS`] points.
pub fn simulate_pattern<R: Rng + ?Sized>(
    rect: &Rectangle,
    intensity: f64,
    finger_id: u32,
    impression_id: u32,
    rng: &mut R,
) -> Result<MinutiaPattern> {
    rect.validate()?;
    let poisson = Poisson::new(intensity).map_err(|e| invalid(format!("intensity {intensity}: {e}")))?;
    let count = loop {
        let c = poisson.sample(rng) as usize;
        if c >= MIN_SIMULATED_POINTS {
            break c;
        }
    };
    let points = (0..count)
        .map(|_| {
            let x = rng.random_range(-rect.half_width..=rect.half_width);
            let y = rng.random_range(-rect.half_height..=rect.half_height);
            Complex64::new(x, y)
        })
        .collect();
    MinutiaPattern::new(points, finger_id, impression_id)
}

/// Adds truncated Gaussian noise to every point. The result is not re-centered.
pub fn perturb<R: Rng + ?Sized>(pattern: &MinutiaPattern, noise: &NoiseModel, rng: &mut R) -> MinutiaPattern {
    if noise.sigma == 0.0 {
        return pattern.clone();
    }
    pattern.map(|z| z + noise.sample(rng))
}

/// `z_kj = λ e^{iβ} (z_0j + ε_kj)`.
pub fn apply_null_model<R: Rng + ?Sized>(
    z0: &MinutiaPattern,
    lambda: f64,
    beta: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> MinutiaPattern {
    let s = lambda * Complex64::cis(beta);
    z0.map(|z| s * (z + noise.sample(rng)))
}

/// `⟨z, w⟩ w` for the unit vector `w = e^{iγ}`, written as
/// `((e^{iγ} z̄ + e^{−iγ} z)/2) e^{iγ}`.
pub fn project_on_axis(z: Complex64, gamma: f64) -> Complex64 {
    let w = Complex64::cis(gamma);
    (w * z.conj() + w.conj() * z) * 0.5 * w
}

/// Aligns `zk` onto `z0` by a rotation and stretches it along `e^{iγ}`:
/// `z̃ = λ (e^{iβ} z + τ ⟨e^{iβ} z, w⟩ w)`.
pub fn inject_growth(
    z0: &MinutiaPattern,
    zk: &MinutiaPattern,
    gamma: f64,
    tau: f64,
    lambda: f64,
) -> Result<MinutiaPattern> {
    if !(tau >= 0.0 && tau.is_finite()) || !(lambda > 0.0 && lambda.is_finite()) || !gamma.is_finite() {
        return Err(invalid(format!("invalid growth (γ={gamma}, τ={tau}, λ={lambda})")));
    }
    let beta = partial_procrustes(&MatchedPair::new(zk.clone(), z0.clone())?)?;
    let r = Complex64::cis(beta);
    Ok(zk.map(|z| {
        let a = r * z;
        lambda * (a + tau * project_on_axis(a, gamma))
    }))
}

/// A real-valued parameter law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Fixed(f64),
    /// Normal law conditioned on `value > lower` (or `≥ lower` when
    /// `inclusive`), drawn by redrawing.
    TruncatedNormal {
        mean: f64,
        sd: f64,
        lower: f64,
        #[serde(default)]
        inclusive: bool,
    },
}

impl Law {
    fn admits(lower: f64, inclusive: bool, v: f64) -> bool {
        if inclusive {
            v >= lower
        } else {
            v > lower
        }
    }

    pub fn median_hint(&self) -> f64 {
        match *self {
            Law::Fixed(v) => v,
            Law::TruncatedNormal { mean, .. } => mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            Law::Fixed(v) => Ok(v),
            Law::TruncatedNormal {
                mean,
                sd,
                lower,
                inclusive,
            } => {
                if !(sd >= 0.0) || !mean.is_finite() {
                    return Err(invalid(format!("invalid normal law ({mean}, {sd})")));
                }
                for _ in 0..MAX_REDRAWS {
                    let x: f64 = rng.sample(StandardNormal);
                    let v = mean + sd * x;
                    if Law::admits(lower, inclusive, v) {
                        return Ok(v);
                    }
                }
                Err(invalid(format!(
                    "normal law ({mean}, {sd}) essentially never exceeds {lower}"
                )))
            }
        }
    }
}

/// Growth injected into every impression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSpec {
    pub gamma: f64,
    pub tau: Law,
    pub lambda: Law,
}

impl GrowthSpec {
    /// Fixed anisotropy `(γ, τ)` without isotropic growth.
    pub fn fixed(gamma: f64, tau: f64) -> Self {
        Self {
            gamma,
            tau: Law::Fixed(tau),
            lambda: Law::Fixed(1.0),
        }
    }

    /// Draws a realized `(τ, λ)` with `τ ≥ 0` and `λ > 0`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let tau = self.tau.sample(rng)?;
        let lambda = self.lambda.sample(rng)?;
        if tau < 0.0 || !(lambda > 0.0) {
            return Err(invalid(format!("growth law realized τ={tau}, λ={lambda}")));
        }
        Ok((tau, lambda))
    }
}

/// Simulates finger `p` (1-based): a centered template in its rectangle and
/// `K` impressions under the null model, each with `λ` from the list and `β`
/// uniform on `[−π, π)`.
pub fn simulate_finger<R: Rng + ?Sized>(config: &SimConfig, finger: u32, rng: &mut R) -> Result<Vec<MatchedPair>> {
    let rect = config.rectangle_for(finger);
    let z0 = simulate_pattern(&rect, config.intensity, finger, 0, rng)?.centered();
    let noise = config.noise();
    (1..=config.impressions)
        .map(|k| {
            let lambda = config.lambda_values[rng.random_range(0..config.lambda_values.len())];
            let beta = rng.random_range(-PI..PI);
            let mut zk = apply_null_model(&z0, lambda, beta, &noise, rng);
            zk.impression_id = k;
            MatchedPair::new(z0.clone(), zk)
        })
        .collect()
}

/// A whole null-model study, fingers simulated in order from one stream.
pub fn simulate_study<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<StudyDataset> {
    config.validate()?;
    let mut study = StudyDataset::new();
    for p in 1..=config.fingers {
        for pair in simulate_finger(config, p, rng)? {
            study.insert(pair)?;
        }
    }
    Ok(study)
}

/// [`simulate_study`] with finger `p` drawn from ChaCha8 stream `p` of
/// `config.seed`, so fingers can be generated in any order or in parallel.
pub fn simulate_study_seeded(config: &SimConfig) -> Result<StudyDataset> {
    config.validate()?;
    let mut study = StudyDataset::new();
    for p in 1..=config.fingers {
        for pair in simulate_finger(config, p, &mut finger_rng(config.seed, p))? {
            study.insert(pair)?;
        }
    }
    Ok(study)
}

/// Generator of finger `p` under master `seed`.
pub fn finger_rng(seed: u64, finger: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(finger));
    rng
}

/// Replaces every query by its grown version; templates are kept.
/// Returns the grown study and the realized `(τ, λ)` per pair in key order.
pub fn grow_study<R: Rng + ?Sized>(
    study: &StudyDataset,
    spec: &GrowthSpec,
    rng: &mut R,
) -> Result<(StudyDataset, Vec<(f64, f64)>)> {
    let mut grown = StudyDataset::new();
    let mut realized = Vec::with_capacity(study.len());
    for pair in study.pairs() {
        let (tau, lambda) = spec.draw(rng)?;
        let z0 = pair.template.centered();
        let zk = pair.query.centered();
        let q = inject_growth(&z0, &zk, spec.gamma, tau, lambda)?;
        grown.insert(MatchedPair::new(z0, q)?)?;
        realized.push((tau, lambda));
    }
    Ok((grown, realized))
}

/// `τ̂` of a simulated null study, pairs whose estimate did not converge
/// left out.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample {
    pub taus: Vec<f64>,
    pub excluded: usize,
}

/// Reference distribution of `τ̂` under the null model.
pub fn reference_tau_sample<R: Rng + ?Sized>(
    config: &SimConfig,
    solver: &SolverConfig,
    rng: &mut R,
) -> Result<ReferenceSample> {
    let study = simulate_study(config, rng)?;
    let mut taus = Vec::with_capacity(study.len());
    let mut excluded = 0;
    for pair in study.pairs() {
        let est = estimate(pair, solver)?;
        if est.converged {
            taus.push(est.params.tau);
        } else {
            excluded += 1;
        }
    }
    Ok(ReferenceSample { taus, excluded })
}

/// Quantile by linear interpolation between order statistics at
/// `h = (n − 1) q` (the default rule of R and NumPy).
pub fn quantile_linear(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(invalid("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("quantile level must lie in [0, 1], got {q}")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Minimum, quartiles and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample contains a non-finite value"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Self {
            min: quantile_linear(&v, 0.0)?,
            q1: quantile_linear(&v, 0.25)?,
            median: quantile_linear(&v, 0.5)?,
            q3: quantile_linear(&v, 0.75)?,
            max: quantile_linear(&v, 1.0)?,
        })
    }
}

/// Alignment precision `η = max(|Q1|, |Q3|)` of estimated rotations.
pub fn estimate_alignment_precision(beta_hats: &[f64]) -> Result<f64> {
    let f = FiveNumber::of(beta_hats)?;
    Ok(f.q1.abs().max(f.q3.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn poisson_count_and_support() {
        let rect = Rectangle::new(95.0, 160.0).unwrap();
        let mut r = rng(1);
        let mut total = 0;
        for _ in 0..10_000 {
            let p = simulate_pattern(&rect, 22.0, 1, 0, &mut r).unwrap();
            assert!(p.points().iter().all(|&z| rect.contains(z)));
            total += p.len();
        }
        let mean = total as f64 / 10_000.0;
        assert!((mean - 22.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn truncated_noise() {
        let noise = NoiseModel::new(7.0).unwrap();
        let mut r = rng(2);
        let n = 100_000;
        let mut ss = 0.0;
        for _ in 0..n {
            let e = noise.sample(&mut r);
            assert!(e.re.abs() <= 35.0 && e.im.abs() <= 35.0);
            ss += e.re * e.re;
        }
        let sd = libm::sqrt(ss / n as f64);
        assert!((sd / 7.0 - 1.0).abs() < 0.02, "{sd}");
        let p = MinutiaPattern::from_xy(&[(1.0, 2.0), (3.0, -1.0)], 1, 1).unwrap();
        assert_eq!(perturb(&p, &NoiseModel::new(0.0).unwrap(), &mut r), p);
    }

    #[test]
    fn null_model_without_noise() {
        let z0 = MinutiaPattern::from_xy(&[(1.0, 0.0), (-1.0, 2.0), (0.0, -2.0)], 1, 0).unwrap();
        let quiet = NoiseModel::new(0.0).unwrap();
        let same = apply_null_model(&z0, 1.0, 0.0, &quiet, &mut rng(0));
        assert_eq!(same.points(), z0.points());
        let turned = apply_null_model(&z0, 2.0, PI / 2.0, &quiet, &mut rng(0));
        for (a, b) in turned.points().iter().zip(z0.points()) {
            assert!((a - Complex64::new(-2.0 * b.im, 2.0 * b.re)).norm() < 1e-12);
        }
    }

    #[test]
    fn horizontal_stretch() {
        let z0 = MinutiaPattern::from_xy(&[(1.0, 3.0), (-2.0, 1.0), (1.0, -4.0)], 1, 0).unwrap();
        let grown = inject_growth(&z0, &z0, 0.0, 0.1, 1.0).unwrap();
        for (a, b) in grown.points().iter().zip(z0.points()) {
            assert!((a - Complex64::new(1.1 * b.re, b.im)).norm() < 1e-12);
        }
        assert!(inject_growth(&z0, &z0, 0.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn laws() {
        let mut r = rng(3);
        let law = Law::TruncatedNormal {
            mean: 0.0,
            sd: 1.0,
            lower: 0.0,
            inclusive: true,
        };
        assert!((0..1000).all(|_| law.sample(&mut r).unwrap() >= 0.0));
        let hopeless = Law::TruncatedNormal {
            mean: -100.0,
            sd: 1.0,
            lower: 0.0,
            inclusive: false,
        };
        assert!(hopeless.sample(&mut r).is_err());
    }

    #[test]
    fn study_shape_and_determinism() {
        let cfg = SimConfig::stand_in();
        let a = simulate_study(&cfg, &mut rng(7)).unwrap();
        let b = simulate_study(&cfg, &mut rng(7)).unwrap();
        assert_eq!(a.len(), 56);
        assert_eq!(a, b);
        assert!(a.pairs().all(|p| p.template.is_centered()));
    }

    #[test]
    fn quantiles_and_precision() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_linear(&v, 0.25).unwrap(), 1.75);
        assert_eq!(quantile_linear(&v, 0.5).unwrap(), 2.5);
        assert_eq!(estimate_alignment_precision(&[0.0; 6]).unwrap(), 0.0);
        assert!(estimate_alignment_precision(&[]).is_err());
        let sym: Vec<f64> = (1..=10)
            .flat_map(|k| [-0.0075 * k as f64, 0.0075 * k as f64])
            .collect();
        // sorted positions 4.75 and 14.25 of 20 values
        assert!((estimate_alignment_precision(&sym).unwrap() - 0.039_375).abs() < 1e-15);
    }
}
