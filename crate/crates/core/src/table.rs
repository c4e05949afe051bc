//! Per-pair estimates of a study, keyed by `(finger, impression)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimator::{Estimate, GrowthParams};

/// One estimated pair. Mirrors a row of the estimate CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub finger_id: u32,
    pub impression_id: u32,
    pub params: GrowthParams,
    pub n: usize,
    pub iterations: usize,
    pub objective: f64,
}

impl EstimateRow {
    pub fn from_estimate(finger_id: u32, impression_id: u32, n: usize, est: &Estimate) -> Self {
        Self {
            finger_id,
            impression_id,
            params: est.params,
            n,
            iterations: est.iterations,
            objective: est.objective,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateTable {
    rows: BTreeMap<(u32, u32), EstimateRow>,
}

impl EstimateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, row: EstimateRow) -> Result<()> {
        if !(row.objective >= 0.0) {
            return Err(invalid(format!(
                "objective of ({}, {}) must be non-negative, got {}",
                row.finger_id, row.impression_id, row.objective
            )));
        }
        let key = (row.finger_id, row.impression_id);
        if self.rows.contains_key(&key) {
            return Err(invalid(format!("duplicate estimate for finger {} impression {}", key.0, key.1)));
        }
        self.rows.insert(key, row);
        Ok(())
    }

    pub fn get(&self, finger: u32, impression: u32) -> Option<&EstimateRow> {
        self.rows.get(&(finger, impression))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in `(finger, impression)` order.
    pub fn rows(&self) -> impl Iterator<Item = &EstimateRow> {
        self.rows.values()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.rows().map(|r| r.params.gamma).collect()
    }

    /// `2γ̂` for every row, the input of the axis tests.
    pub fn doubled_angles(&self) -> Vec<f64> {
        self.rows().map(|r| 2.0 * r.params.gamma).collect()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.rows().map(|r| r.params.tau).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.rows().map(|r| r.params.beta).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.rows().map(|r| r.params.lambda).collect()
    }
}

impl FromIterator<EstimateRow> for Result<EstimateTable> {
    fn from_iter<I: IntoIterator<Item = EstimateRow>>(iter: I) -> Self {
        let mut table = EstimateTable::new();
        for row in iter {
            table.insert(row)?;
        }
        Ok(table)
    }
}
