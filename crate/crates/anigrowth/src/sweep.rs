//! Sensitivity sweeps over injected growth.

use std::f64::consts::PI;

use anigrowth_core::angle::wrap_pi;
use anigrowth_core::circular::AngleSample;
use anigrowth_core::error::Error;
use anigrowth_core::hypothesis::{test_distal_boot, test_distal_vm, test_rayleigh, test_tau_ks, DistalTestConfig};
use anigrowth_core::pattern::StudyDataset;
use anigrowth_core::sim::{finger_rng, grow_study, GrowthSpec};
use anigrowth_core::study::estimate_study;
use anigrowth_core::{Result, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::derive_seed;

/// `{kπ/steps : k = 0, …, steps − 1}`; π is the same axis as 0.
pub fn gamma_grid(steps: usize) -> Vec<f64> {
    (0..steps).map(|k| k as f64 * PI / steps as f64).collect()
}

/// `{step, 2·step, …}` up to and including `max` (within rounding).
pub fn tau_grid(step: f64, max: f64) -> Vec<f64> {
    let count = (max / step + 1e-9).floor() as usize;
    (1..=count).map(|k| k as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTest {
    Rayleigh,
    TauKs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub gamma_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub test: SweepTest,
    pub alpha: f64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if self.gamma_grid.is_empty() || self.tau_grid.is_empty() {
            return bad("sweep grids must be non-empty");
        }
        if self.tau_grid[0] <= 0.0 || self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("rate grid must be positive and strictly increasing");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    /// Smallest rejecting rate on the grid, `None` above the grid.
    pub tau_min: Option<f64>,
}

/// Summary written next to the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub reference_size: Option<usize>,
    pub min_tau: Option<f64>,
    /// `sup_γ τ(γ)`: every direction is detected from this rate on.
    pub max_tau: Option<f64>,
    pub mean_tau: Option<f64>,
    pub above_grid: usize,
    pub note: String,
}

fn rejects_at(
    study: &StudyDataset,
    gamma: f64,
    tau: f64,
    spec: &SweepSpec,
    reference: Option<&[f64]>,
    solver: &SolverConfig,
) -> Result<bool> {
    let (grown, _) = grow_study(study, &GrowthSpec::fixed(gamma, tau), &mut finger_rng(spec.seed, 0))?;
    let est = estimate_study(&grown, solver)?;
    match spec.test {
        SweepTest::Rayleigh => Ok(test_rayleigh(&AngleSample::new(est.table.doubled_angles())?, spec.alpha)?.rejects()),
        SweepTest::TauKs => {
            let reference = reference.ok_or_else(|| Error::InvalidInput("rate test needs a reference sample".into()))?;
            Ok(test_tau_ks(&est.table.taus(), reference, spec.alpha)?.rejects())
        }
    }
}

/// For each direction, the smallest grid rate at which the test rejects.
/// Rates are scanned upwards rather than bisected since rejection need not be
/// monotone in τ.
pub fn run_sweep(
    study: &StudyDataset,
    spec: &SweepSpec,
    reference: Option<&[f64]>,
    solver: &SolverConfig,
) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    spec.gamma_grid
        .par_iter()
        .map(|&gamma| {
            for &tau in &spec.tau_grid {
                if rejects_at(study, gamma, tau, spec, reference, solver)? {
                    return Ok(SweepPoint {
                        gamma,
                        tau_min: Some(tau),
                    });
                }
            }
            Ok(SweepPoint { gamma, tau_min: None })
        })
        .collect()
}

pub fn sweep_metadata(spec: &SweepSpec, points: &[SweepPoint], reference_size: Option<usize>) -> SweepMetadata {
    let found: Vec<f64> = points.iter().filter_map(|p| p.tau_min).collect();
    let (min, max, mean) = if found.is_empty() {
        (None, None, None)
    } else {
        (
            Some(found.iter().cloned().fold(f64::INFINITY, f64::min)),
            Some(found.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            Some(found.iter().sum::<f64>() / found.len() as f64),
        )
    };
    SweepMetadata {
        spec: spec.clone(),
        reference_size,
        min_tau: min,
        max_tau: max,
        mean_tau: mean,
        above_grid: points.len() - found.len(),
        note: "grid-ascending search: tau_min is the first rejecting grid rate; rejection is not guaranteed \
               monotone in tau at finite sample size"
            .into(),
    }
}

/// Mean `τ(γ)` over directions within π/4 of the horizontal axis and within
/// π/4 of the vertical one; directions above the grid are skipped.
pub fn axis_means(points: &[SweepPoint]) -> (Option<f64>, Option<f64>) {
    let mut near_h = Vec::new();
    let mut near_v = Vec::new();
    for p in points {
        let Some(t) = p.tau_min else { continue };
        // distance of the axis γ from the horizontal, in [0, π/2]
        let d = wrap_pi(2.0 * p.gamma).abs() / 2.0;
        if d < PI / 4.0 {
            near_h.push(t);
        } else if d > PI / 4.0 {
            near_v.push(t);
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    (mean(&near_h), mean(&near_v))
}

/// Decisions of both axis tests for growth of rate `tau` along each `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistalPoint {
    pub gamma: f64,
    /// `2γ` reduced to `[−π, π)`.
    pub doubled: f64,
    pub vm_reject: bool,
    pub boot_reject: bool,
}

pub fn distal_sweep(
    study: &StudyDataset,
    gammas: &[f64],
    tau: f64,
    cfg: &DistalTestConfig,
    seed: u64,
    solver: &SolverConfig,
) -> Result<Vec<DistalPoint>> {
    gammas
        .par_iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let (grown, _) = grow_study(study, &GrowthSpec::fixed(gamma, tau), &mut finger_rng(seed, 0))?;
            let est = estimate_study(&grown, solver)?;
            let sample = AngleSample::new(est.table.doubled_angles())?;
            Ok(DistalPoint {
                gamma,
                doubled: wrap_pi(2.0 * gamma),
                vm_reject: test_distal_vm(&sample, cfg)?.rejects(),
                boot_reject: test_distal_boot(&sample, cfg, derive_seed(seed, i as u64))?.rejects(),
            })
        })
        .collect()
}

/// Smallest and largest rejecting `2γ`, or `None` when nothing is rejected.
pub fn rejection_interval(points: &[DistalPoint], parametric: bool) -> Option<(f64, f64)> {
    let hits: Vec<f64> = points
        .iter()
        .filter(|p| if parametric { p.vm_reject } else { p.boot_reject })
        .map(|p| p.doubled)
        .collect();
    if hits.is_empty() {
        return None;
    }
    Some((
        hits.iter().cloned().fold(f64::INFINITY, f64::min),
        hits.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ))
}
