//! Procrustes-type estimation of rotation, isotropic and anisotropic growth.
//!
//! The query pattern `Z'` is modelled from the template `Z` as
//!
//! ```text
//! z'_j = λ e^{iβ} ( (2+τ)/2 · z_j + τ/2 · e^{2iγ} conj(z_j) )
//! ```
//!
//! i.e. a stretch by `1 + τ` along the axis `w = e^{iγ}`, followed by isotropic
//! scaling by `λ` and a rotation by `β`. [`estimate`] minimises the squared
//! distance between both sides by cycling through the exact conditional
//! minimisers of each coordinate in the order rotation, scale, axis, rate.
//!
//! Every conditional minimiser is a closed form in five sufficient moments of
//! the pair, so one sweep costs O(1) after an O(n) set-up.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::{wrap_axis, wrap_pi};
use crate::error::{invalid, Error, Result};
use crate::pattern::{MatchedPair, MIN_ESTIMATION_POINTS};

/// Below this magnitude a unit-value numerator is treated as zero and the
/// previous unit value is kept.
pub const UNIT_TIE_THRESHOLD: f64 = 1e-14;

/// Below this τ̂ the axis estimate carries no information.
pub const GAMMA_MEANINGLESS_TAU: f64 = 1e-8;

/// Smallest isotropic rate returned by the λ update when the unconstrained
/// minimiser is not positive.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Growth and nuisance parameters `(γ, β, τ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    /// Anisotropy axis in `[0, π)`.
    pub gamma: f64,
    /// Rotation in `[-π, π)`.
    pub beta: f64,
    /// Anisotropy rate, `≥ 0`.
    pub tau: f64,
    /// Isotropic rate, `> 0`.
    pub lambda: f64,
}

impl GrowthParams {
    /// Validates and reduces the angles to their canonical ranges.
    pub fn new(gamma: f64, beta: f64, tau: f64, lambda: f64) -> Result<Self> {
        if ![gamma, beta, tau, lambda].iter().all(|v| v.is_finite()) {
            return Err(invalid("growth parameters must be finite"));
        }
        if tau < 0.0 {
            return Err(invalid(format!("anisotropy rate {tau} is negative")));
        }
        if lambda <= 0.0 {
            return Err(invalid(format!("isotropic rate {lambda} is not positive")));
        }
        Ok(Self {
            gamma: wrap_axis(gamma),
            beta: wrap_pi(beta),
            tau,
            lambda,
        })
    }

    pub fn identity() -> Self {
        Self {
            gamma: 0.0,
            beta: 0.0,
            tau: 0.0,
            lambda: 1.0,
        }
    }

    /// `e^{2iγ}`, the axis as a point on the doubled-angle circle.
    pub fn axis_unit(&self) -> Complex64 {
        Complex64::cis(2.0 * self.gamma)
    }

    pub fn rotation_unit(&self) -> Complex64 {
        Complex64::cis(self.beta)
    }

    /// Forward model applied to one template location.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let a = (2.0 + self.tau) / 2.0;
        let b = self.tau / 2.0;
        self.lambda * self.rotation_unit() * (a * z + b * self.axis_unit() * z.conj())
    }

    pub(crate) fn coordinates(&self) -> Coordinates {
        Coordinates {
            axis: self.axis_unit(),
            rotation: self.rotation_unit(),
            tau: self.tau,
            lambda: self.lambda,
        }
    }
}

/// The iteration state: `(e^{2iγ}, e^{iβ}, τ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinates {
    pub axis: Complex64,
    pub rotation: Complex64,
    pub tau: f64,
    pub lambda: f64,
}

impl Coordinates {
    /// The fixed starting point `e^{iβ} = e^{2iγ} = 1`, `λ = 1`, `τ = 0`.
    pub fn initial() -> Self {
        Self {
            axis: Complex64::new(1.0, 0.0),
            rotation: Complex64::new(1.0, 0.0),
            tau: 0.0,
            lambda: 1.0,
        }
    }

    pub fn to_params(&self) -> GrowthParams {
        GrowthParams {
            gamma: wrap_axis(self.axis.arg() / 2.0),
            beta: wrap_pi(self.rotation.arg()),
            tau: self.tau,
            lambda: self.lambda,
        }
    }

    fn squared_step(&self, other: &Self) -> f64 {
        (self.axis - other.axis).norm_sqr()
            + (self.rotation - other.rotation).norm_sqr()
            + (self.tau - other.tau).powi(2)
            + (self.lambda - other.lambda).powi(2)
    }
}

/// Convergence controls for [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Break when the summed squared parameter increments fall below this.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-20,
            max_iterations: 1000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("solver epsilon must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Sufficient moments of a centered pair.
#[derive(Debug, Clone, Copy)]
struct Moments {
    /// Σ |z|²
    zz: f64,
    /// Σ z²
    z_sq: Complex64,
    /// Σ z' conj(z)
    qz_conj: Complex64,
    /// Σ z' z
    qz: Complex64,
}

impl Moments {
    fn of(template: &[Complex64], query: &[Complex64]) -> Result<Self> {
        let mut m = Moments {
            zz: 0.0,
            z_sq: Complex64::new(0.0, 0.0),
            qz_conj: Complex64::new(0.0, 0.0),
            qz: Complex64::new(0.0, 0.0),
        };
        for (&z, &q) in template.iter().zip(query) {
            m.zz += z.norm_sqr();
            m.z_sq += z * z;
            m.qz_conj += q * z.conj();
            m.qz += q * z;
        }
        if m.zz == 0.0 {
            return Err(Error::Degenerate("all template minutiae coincide".into()));
        }
        Ok(m)
    }

    /// Σ z' conj(w_j) with w_j = a z_j + b u conj(z_j).
    fn cross(&self, axis: Complex64, tau: f64) -> Complex64 {
        let a = (2.0 + tau) / 2.0;
        let b = tau / 2.0;
        a * self.qz_conj + b * axis.conj() * self.qz
    }

    /// Σ |w_j|².
    fn model_energy(&self, axis: Complex64, tau: f64) -> f64 {
        let a = (2.0 + tau) / 2.0;
        let b = tau / 2.0;
        (a * a + b * b) * self.zz + 2.0 * a * b * (axis.conj() * self.z_sq).re
    }
}

fn unit_or(previous: Complex64, numerator: Complex64) -> Complex64 {
    let r = numerator.norm();
    if r < UNIT_TIE_THRESHOLD {
        previous
    } else {
        numerator / r
    }
}

fn rotation_step(m: &Moments, c: &Coordinates) -> Complex64 {
    unit_or(c.rotation, m.cross(c.axis, c.tau))
}

fn lambda_step(m: &Moments, c: &Coordinates) -> f64 {
    let num = (c.rotation * m.cross(c.axis, c.tau).conj()).re;
    let den = m.model_energy(c.axis, c.tau);
    if den <= 0.0 {
        return c.lambda;
    }
    (num / den).max(LAMBDA_FLOOR)
}

fn axis_step(m: &Moments, c: &Coordinates) -> Complex64 {
    let a = (2.0 + c.tau) / 2.0;
    // Σ (z' − λ e^{iβ} a z) z, rotated back by e^{-iβ}
    let s = c.rotation.conj() * (m.qz - c.lambda * c.rotation * a * m.z_sq);
    unit_or(c.axis, s)
}

fn tau_step(m: &Moments, c: &Coordinates) -> f64 {
    // minimise Σ |d_j − τ v_j|² with d_j = z'_j − λ r z_j, v_j = λ r (z_j + u conj z_j)/2
    let u = c.axis;
    let inner = c.rotation.conj()
        * (m.qz_conj + u.conj() * m.qz - c.lambda * c.rotation * (m.zz + u.conj() * m.z_sq));
    let num = 0.5 * c.lambda * inner.re;
    let den = 0.25 * c.lambda * c.lambda * (2.0 * m.zz + 2.0 * (u.conj() * m.z_sq).re);
    if den <= 0.0 {
        return 0.0;
    }
    (num / den).max(0.0)
}

/// Centered slices of a pair, with moments precomputed.
struct Problem {
    template: Vec<Complex64>,
    query: Vec<Complex64>,
    moments: Moments,
}

impl Problem {
    fn new(pair: &MatchedPair) -> Result<Self> {
        let c = pair.centered();
        let template = c.template.points().to_vec();
        let query = c.query.points().to_vec();
        let moments = Moments::of(&template, &query)?;
        Ok(Self {
            template,
            query,
            moments,
        })
    }

    fn objective(&self, c: &Coordinates) -> f64 {
        objective(&self.template, &self.query, c)
    }
}

fn objective(template: &[Complex64], query: &[Complex64], c: &Coordinates) -> f64 {
    let a = (2.0 + c.tau) / 2.0;
    let b = c.tau / 2.0;
    let scale = c.lambda * c.rotation;
    template
        .iter()
        .zip(query)
        .map(|(&z, &q)| (q - scale * (a * z + b * c.axis * z.conj())).norm_sqr())
        .sum()
}

/// Distance functional `F(Z, Z'; γ, β, τ, λ)` on the pair as given.
///
/// The pair is expected to be centered; it is not re-centered here.
pub fn distance_functional(pair: &MatchedPair, params: &GrowthParams) -> f64 {
    distance_at(pair, &params.coordinates())
}

/// [`distance_functional`] at raw iteration coordinates.
pub fn distance_at(pair: &MatchedPair, coords: &Coordinates) -> f64 {
    objective(pair.template.points(), pair.query.points(), coords)
}

/// Conditional minimiser of `F` over `e^{2iγ}` with the other coordinates of
/// `current` held fixed. `current.axis` is returned on a numerical tie.
pub fn update_gamma(pair: &MatchedPair, current: &Coordinates) -> Result<Complex64> {
    let m = moments_of(pair)?;
    Ok(axis_step(&m, current))
}

/// Conditional minimiser over `e^{iβ}`.
pub fn update_beta(pair: &MatchedPair, current: &Coordinates) -> Result<Complex64> {
    let m = moments_of(pair)?;
    Ok(rotation_step(&m, current))
}

/// Conditional minimiser over `τ ∈ [0, ∞)`; negative stationary points are
/// projected to zero.
pub fn update_tau(pair: &MatchedPair, current: &Coordinates) -> Result<f64> {
    let m = moments_of(pair)?;
    Ok(tau_step(&m, current))
}

/// Conditional minimiser over `λ > 0`, floored at [`LAMBDA_FLOOR`].
pub fn update_lambda(pair: &MatchedPair, current: &Coordinates) -> Result<f64> {
    let m = moments_of(pair)?;
    Ok(lambda_step(&m, current))
}

fn moments_of(pair: &MatchedPair) -> Result<Moments> {
    Moments::of(pair.template.points(), pair.query.points())
}

/// Result of [`estimate`] with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub params: GrowthParams,
    pub iterations: usize,
    /// Distance functional at the returned parameters.
    pub objective: f64,
    pub converged: bool,
    /// Set when τ̂ is below [`GAMMA_MEANINGLESS_TAU`].
    pub gamma_meaningless: bool,
    /// Set when the template is collinear and γ is weakly identified.
    pub collinear: bool,
}

/// Hook observing every single-coordinate update: `(coordinate index, F before, F after)`.
pub type StepObserver<'a> = &'a mut dyn FnMut(usize, f64, f64);

/// Alternating minimisation starting from [`Coordinates::initial`].
pub fn estimate(pair: &MatchedPair, config: &SolverConfig) -> Result<Estimate> {
    estimate_observed(pair, config, None)
}

/// [`estimate`] with an optional observer for per-update objective values.
/// Coordinate indices: 0 rotation, 1 scale, 2 axis, 3 rate.
pub fn estimate_observed(
    pair: &MatchedPair,
    config: &SolverConfig,
    mut observer: Option<StepObserver<'_>>,
) -> Result<Estimate> {
    config.validate()?;
    if pair.n() < MIN_ESTIMATION_POINTS {
        return Err(invalid(format!(
            "estimation needs at least {MIN_ESTIMATION_POINTS} minutiae, got {}",
            pair.n()
        )));
    }
    let problem = Problem::new(pair)?;
    let m = &problem.moments;
    if m.qz_conj.norm() == 0.0 && m.qz.norm() == 0.0 {
        return Err(Error::Degenerate(
            "query carries no signal correlated with the template".into(),
        ));
    }

    let mut state = Coordinates::initial();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let prev = state;
        match observer.as_deref_mut() {
            None => {
                state.rotation = rotation_step(m, &state);
                state.lambda = lambda_step(m, &state);
                state.axis = axis_step(m, &state);
                state.tau = tau_step(m, &state);
            }
            Some(obs) => {
                let mut before = problem.objective(&state);
                for k in 0..4 {
                    match k {
                        0 => state.rotation = rotation_step(m, &state),
                        1 => state.lambda = lambda_step(m, &state),
                        2 => state.axis = axis_step(m, &state),
                        _ => state.tau = tau_step(m, &state),
                    }
                    let after = problem.objective(&state);
                    obs(k, before, after);
                    before = after;
                }
            }
        }
        if state.squared_step(&prev) < config.epsilon {
            converged = true;
            break;
        }
    }

    let params = state.to_params();
    Ok(Estimate {
        params,
        iterations,
        objective: problem.objective(&state),
        converged,
        gamma_meaningless: params.tau < GAMMA_MEANINGLESS_TAU,
        collinear: pair.template.is_collinear(),
    })
}

/// Rotation-only alignment of the query onto the template's frame:
/// the `β` minimising `Σ |z'_j − e^{iβ} z_j|²` over centered patterns.
pub fn partial_procrustes(pair: &MatchedPair) -> Result<f64> {
    let c = pair.centered();
    let m = Moments::of(c.template.points(), c.query.points())?;
    if m.qz_conj.norm() < UNIT_TIE_THRESHOLD {
        return Err(Error::Degenerate("optimal rotation is undefined".into()));
    }
    Ok(wrap_pi(m.qz_conj.arg()))
}

/// Rotation and scale `(β, λ)` minimising `Σ |z'_j − λ e^{iβ} z_j|²`.
pub fn full_procrustes(pair: &MatchedPair) -> Result<(f64, f64)> {
    let c = pair.centered();
    let m = Moments::of(c.template.points(), c.query.points())?;
    if m.qz_conj.norm() < UNIT_TIE_THRESHOLD {
        return Err(Error::Degenerate("optimal rotation is undefined".into()));
    }
    Ok((wrap_pi(m.qz_conj.arg()), m.qz_conj.norm() / m.zz))
}

/// Residual displacements `z'_j − λ̂ e^{iβ̂} z_j` after a full Procrustes fit.
pub fn full_procrustes_residuals(pair: &MatchedPair) -> Result<Vec<Complex64>> {
    let (beta, lambda) = full_procrustes(pair)?;
    let c = pair.centered();
    let s = lambda * Complex64::cis(beta);
    Ok(c.template
        .points()
        .iter()
        .zip(c.query.points())
        .map(|(&z, &q)| q - s * z)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::MinutiaPattern;
    use core::f64::consts::PI;

    fn pair_from(z: &[Complex64], q: &[Complex64]) -> MatchedPair {
        MatchedPair::new(
            MinutiaPattern::new(z.to_vec(), 1, 0).unwrap(),
            MinutiaPattern::new(q.to_vec(), 1, 1).unwrap(),
        )
        .unwrap()
    }

    fn heptagon() -> Vec<Complex64> {
        [
            (12.0, 3.0),
            (-40.0, 17.0),
            (25.0, -31.0),
            (-8.0, -22.0),
            (33.0, 41.0),
            (-19.0, 36.0),
            (5.0, -50.0),
        ]
        .iter()
        .map(|&(x, y)| Complex64::new(x, y))
        .collect()
    }

    fn centered(z: Vec<Complex64>) -> Vec<Complex64> {
        let m = z.iter().sum::<Complex64>() / z.len() as f64;
        z.into_iter().map(|p| p - m).collect()
    }

    #[test]
    fn identity_has_zero_distance() {
        let z = centered(heptagon());
        let pair = pair_from(&z, &z);
        let p = GrowthParams::new(1.1, 0.0, 0.0, 1.0).unwrap();
        assert!(distance_functional(&pair, &p) < 1e-20);
    }

    #[test]
    fn pure_scaling_has_zero_distance() {
        let z = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let q = [Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0)];
        let pair = pair_from(&z, &q);
        let p = GrowthParams::new(0.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(distance_functional(&pair, &p), 0.0);
    }

    #[test]
    fn beta_update_on_exact_similarity() {
        let z = centered(heptagon());
        let (l0, b0) = (1.3, -0.8);
        let q: Vec<_> = z.iter().map(|&p| l0 * Complex64::cis(b0) * p).collect();
        let pair = pair_from(&z, &q);
        let c = Coordinates {
            lambda: l0,
            ..Coordinates::initial()
        };
        let r = update_beta(&pair, &c).unwrap();
        assert!((r - Complex64::cis(b0)).norm() < 1e-12);
    }

    #[test]
    fn lambda_update_on_identity() {
        let z = centered(heptagon());
        let pair = pair_from(&z, &z);
        let l = update_lambda(&pair, &Coordinates::initial()).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
    }

    #[test]
    fn estimate_identity() {
        let z = heptagon();
        let est = estimate(&pair_from(&z, &z), &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert!(est.params.beta.abs() < 1e-8);
        assert!((est.params.lambda - 1.0).abs() < 1e-8);
        assert!(est.params.tau < 1e-8);
        assert!(est.gamma_meaningless);
    }

    #[test]
    fn estimate_recovers_forward_model() {
        let z = centered(heptagon());
        let truth = GrowthParams::new(PI / 6.0, 0.3, 0.1, 1.2).unwrap();
        let q: Vec<_> = z.iter().map(|&p| truth.apply(p)).collect();
        let est = estimate(&pair_from(&z, &q), &SolverConfig::default()).unwrap();
        assert!(est.converged);
        let p = est.params;
        assert!((p.gamma - truth.gamma).abs() < 1e-6, "{p:?}");
        assert!((p.beta - truth.beta).abs() < 1e-6, "{p:?}");
        assert!((p.tau - truth.tau).abs() < 1e-6, "{p:?}");
        assert!((p.lambda - truth.lambda).abs() < 1e-6, "{p:?}");
        assert!(!est.gamma_meaningless);
    }

    #[test]
    fn too_few_points() {
        let z = &heptagon()[..2];
        assert!(matches!(
            estimate(&pair_from(z, z), &SolverConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn degenerate_template() {
        let z = [Complex64::new(0.0, 0.0); 4];
        let q = heptagon();
        assert!(matches!(
            estimate(&pair_from(&z, &q[..4]), &SolverConfig::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(partial_procrustes(&pair_from(&z, &q[..4])).is_err());
    }

    #[test]
    fn collinear_is_flagged() {
        let z: Vec<_> = (0..5).map(|k| Complex64::new(k as f64, 2.0 * k as f64)).collect();
        let est = estimate(&pair_from(&z, &z), &SolverConfig::default()).unwrap();
        assert!(est.collinear);
    }

    #[test]
    fn procrustes_closed_forms() {
        let z = centered(heptagon());
        let q: Vec<_> = z.iter().map(|&p| Complex64::cis(0.7) * p).collect();
        assert!((partial_procrustes(&pair_from(&z, &q)).unwrap() - 0.7).abs() < 1e-10);
        let q2: Vec<_> = q.iter().map(|&p| 2.0 * p).collect();
        let (b, l) = full_procrustes(&pair_from(&z, &q2)).unwrap();
        assert!((b - 0.7).abs() < 1e-10 && (l - 2.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GrowthParams::new(0.0, 0.0, -0.1, 1.0).is_err());
        assert!(GrowthParams::new(0.0, 0.0, 0.1, 0.0).is_err());
        assert!(SolverConfig { epsilon: 0.0, max_iterations: 3 }.validate().is_err());
        assert!(SolverConfig { epsilon: 1e-3, max_iterations: 0 }.validate().is_err());
    }
}
