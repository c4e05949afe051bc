use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestId {
    Rayleigh,
    TauKs,
    Joint,
    DistalVm,
    DistalBoot,
}

impl TestId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestId::Rayleigh => "rayleigh",
            TestId::TauKs => "tau_ks",
            TestId::Joint => "joint",
            TestId::DistalVm => "distal_vm",
            TestId::DistalBoot => "distal_boot",
        }
    }
}

impl core::fmt::Display for TestId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for TestId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "rayleigh" => Ok(TestId::Rayleigh),
            "tau_ks" => Ok(TestId::TauKs),
            "joint" => Ok(TestId::Joint),
            "distal_vm" => Ok(TestId::DistalVm),
            "distal_boot" => Ok(TestId::DistalBoot),
            other => Err(crate::error::invalid(alloc::format!("unknown test '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    Retain,
}

impl Decision {
    pub fn from_reject(reject: bool) -> Self {
        if reject {
            Decision::Reject
        } else {
            Decision::Retain
        }
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, Decision::Reject)
    }
}

/// Outcome of one test. Serializes to the report JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_id: TestId,
    pub statistic: f64,
    /// Critical value or quantile the statistic is compared against.
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub decision: Decision,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    /// Numeric configuration snapshot (sample sizes, axis, intermediate values).
    pub config: BTreeMap<String, f64>,
}

impl TestReport {
    pub(crate) fn new(test_id: TestId, statistic: f64, threshold: f64, reject: bool, alpha: f64) -> Self {
        Self {
            test_id,
            statistic,
            threshold,
            p_value: None,
            decision: Decision::from_reject(reject),
            alpha,
            epsilon: None,
            seed: None,
            config: BTreeMap::new(),
        }
    }

    pub(crate) fn with(mut self, key: &str, value: f64) -> Self {
        self.config.insert(key.to_string(), value);
        self
    }

    pub fn rejects(&self) -> bool {
        self.decision.is_reject()
    }
}
