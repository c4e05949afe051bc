//! Whole-study estimation and the growth studies built on it.

use alloc::vec::Vec;

use rand::Rng;

use crate::circular::{resultant_length, AngleSample};
use crate::error::Result;
use crate::estimator::{estimate, SolverConfig};
use crate::hypothesis::{
    pair_sphericity, test_distal_boot_with_rng, test_distal_vm, test_rayleigh, test_tau_ks, DistalTestConfig,
    TestReport,
};
use crate::pattern::StudyDataset;
use crate::sim::{grow_study, GrowthSpec};
use crate::table::{EstimateRow, EstimateTable};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyEstimates {
    /// One row per pair, best-so-far parameters for non-converged pairs.
    pub table: EstimateTable,
    pub nonconverged: Vec<(u32, u32)>,
}

pub fn estimate_study(study: &StudyDataset, solver: &SolverConfig) -> Result<StudyEstimates> {
    let mut table = EstimateTable::new();
    let mut nonconverged = Vec::new();
    for pair in study.pairs() {
        let est = estimate(pair, solver)?;
        let (p, k) = (pair.finger_id(), pair.impression_id());
        if !est.converged {
            nonconverged.push((p, k));
        }
        table.insert(EstimateRow::from_estimate(p, k, pair.n(), &est))?;
    }
    Ok(StudyEstimates { table, nonconverged })
}

/// `θ̂ = (R̂, Σρ)`: resultant length of the doubled axes and the summed
/// sphericity statistics of all pairs.
pub fn joint_theta(study: &StudyDataset, table: &EstimateTable) -> Result<[f64; 2]> {
    let r = resultant_length(&AngleSample::new(table.doubled_angles())?);
    let mut rho = 0.0;
    for pair in study.pairs() {
        rho += pair_sphericity(pair)?.rho;
    }
    Ok([r, rho])
}

/// Model values next to their estimates, one entry per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthComparison {
    pub finger_id: u32,
    pub impression_id: u32,
    pub tau: f64,
    pub lambda: f64,
    pub tau_hat: f64,
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableGrowthOutcome {
    pub comparisons: Vec<GrowthComparison>,
    pub estimates: StudyEstimates,
    /// Rayleigh, `τ̂` against the reference, parametric and bootstrap axis tests.
    pub reports: Vec<TestReport>,
}

/// Grows every pair of `study` by a freshly drawn `(τ, λ)`, estimates, and
/// runs the four tests that need no replicates.
pub fn variable_growth_study<R: Rng + ?Sized>(
    study: &StudyDataset,
    spec: &GrowthSpec,
    reference_taus: &[f64],
    distal: &DistalTestConfig,
    solver: &SolverConfig,
    rng: &mut R,
) -> Result<VariableGrowthOutcome> {
    let (grown, realized) = grow_study(study, spec, rng)?;
    let estimates = estimate_study(&grown, solver)?;
    let comparisons = estimates
        .table
        .rows()
        .zip(&realized)
        .map(|(row, &(tau, lambda))| GrowthComparison {
            finger_id: row.finger_id,
            impression_id: row.impression_id,
            tau,
            lambda,
            tau_hat: row.params.tau,
            lambda_hat: row.params.lambda,
        })
        .collect();
    let doubled = AngleSample::new(estimates.table.doubled_angles())?;
    let reports = alloc::vec![
        test_rayleigh(&doubled, distal.alpha)?,
        test_tau_ks(&estimates.table.taus(), reference_taus, distal.alpha)?,
        test_distal_vm(&doubled, distal)?,
        test_distal_boot_with_rng(&doubled, distal, rng)?,
    ];
    Ok(VariableGrowthOutcome {
        comparisons,
        estimates,
        reports,
    })
}
