//! Parallel Monte Carlo drivers. Every task owns a generator derived from
//! the master seed and its task index, so results do not depend on the
//! number of worker threads.

use anigrowth_core::circular::AngleSample;
use anigrowth_core::hypothesis::test_rayleigh;
use anigrowth_core::pattern::StudyDataset;
use anigrowth_core::sim::{simulate_study_seeded, ReferenceSample, SimConfig};
use anigrowth_core::study::{joint_theta, StudyEstimates};
use anigrowth_core::{estimate, EstimateRow, EstimateTable, Result, SolverConfig};
use rayon::prelude::*;

/// Seed of task `index` under `seed` (SplitMix64 finalizer of the pair).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Estimates every pair in parallel.
pub fn estimate_study_par(study: &StudyDataset, solver: &SolverConfig) -> Result<StudyEstimates> {
    let pairs: Vec<_> = study.pairs().collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|pair| estimate(pair, solver).map(|e| (*pair, e)))
        .collect::<Result<_>>()?;
    let mut table = EstimateTable::new();
    let mut nonconverged = Vec::new();
    for (pair, est) in results {
        let (p, k) = (pair.finger_id(), pair.impression_id());
        if !est.converged {
            nonconverged.push((p, k));
        }
        table.insert(EstimateRow::from_estimate(p, k, pair.n(), &est))?;
    }
    Ok(StudyEstimates { table, nonconverged })
}

/// Null study of replicate `r`.
pub fn replicate_study(config: &SimConfig, r: u64) -> Result<StudyDataset> {
    simulate_study_seeded(&SimConfig {
        seed: derive_seed(config.seed, r),
        ..config.clone()
    })
}

/// Reference sample `τ̃` of the study simulated from `config.seed`.
pub fn reference_sample(config: &SimConfig, solver: &SolverConfig) -> Result<ReferenceSample> {
    let study = simulate_study_seeded(config)?;
    let est = estimate_study_par(&study, solver)?;
    let taus = est
        .table
        .rows()
        .filter(|r| !est.nonconverged.contains(&(r.finger_id, r.impression_id)))
        .map(|r| r.params.tau)
        .collect();
    Ok(ReferenceSample {
        taus,
        excluded: est.nonconverged.len(),
    })
}

/// Runs `f` on replicates `0..replicates` in parallel, in replicate order.
pub fn map_replicates<T, F>(config: &SimConfig, replicates: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, StudyDataset) -> Result<T> + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|r| f(r, replicate_study(config, r)?))
        .collect()
}

/// Rayleigh rejection counts at each level over null replicates, and the
/// number of non-converged estimates met on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionCounts {
    pub alphas: Vec<f64>,
    pub rejections: Vec<usize>,
    pub replicates: u64,
    pub nonconverged: usize,
}

impl RejectionCounts {
    pub fn rate(&self, i: usize) -> f64 {
        self.rejections[i] as f64 / self.replicates as f64
    }
}

pub fn rayleigh_null_rates(
    config: &SimConfig,
    replicates: u64,
    alphas: &[f64],
    solver: &SolverConfig,
) -> Result<RejectionCounts> {
    let per: Vec<(Vec<bool>, usize)> = map_replicates(config, replicates, |_, study| {
        let est = anigrowth_core::study::estimate_study(&study, solver)?;
        let sample = AngleSample::new(est.table.doubled_angles())?;
        let rejects = alphas
            .iter()
            .map(|&a| test_rayleigh(&sample, a).map(|r| r.rejects()))
            .collect::<Result<Vec<_>>>()?;
        Ok((rejects, est.nonconverged.len()))
    })?;
    let mut rejections = vec![0; alphas.len()];
    let mut nonconverged = 0;
    for (rej, nc) in per {
        for (count, r) in rejections.iter_mut().zip(rej) {
            *count += usize::from(r);
        }
        nonconverged += nc;
    }
    Ok(RejectionCounts {
        alphas: alphas.to_vec(),
        rejections,
        replicates,
        nonconverged,
    })
}

/// `(R̂, Σρ)` of null replicates, the input of the joint confidence rectangle.
pub fn joint_replicates(config: &SimConfig, replicates: u64, solver: &SolverConfig) -> Result<Vec<[f64; 2]>> {
    map_replicates(config, replicates, |_, study| {
        let est = anigrowth_core::study::estimate_study(&study, solver)?;
        joint_theta(&study, &est.table)
    })
}

/// `τ̂` samples of null replicates with non-converged pairs left out.
pub fn reference_replicates(config: &SimConfig, replicates: u64, solver: &SolverConfig) -> Result<Vec<Vec<f64>>> {
    map_replicates(config, replicates, |_, study| {
        let est = anigrowth_core::study::estimate_study(&study, solver)?;
        Ok(est
            .table
            .rows()
            .filter(|r| !est.nonconverged.contains(&(r.finger_id, r.impression_id)))
            .map(|r| r.params.tau)
            .collect())
    })
}
