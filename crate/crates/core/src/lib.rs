//! Estimation and hypothesis tests for anisotropic growth between matched
//! minutiae patterns.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the parallel
//! Monte Carlo harness and the command line live in the `anigrowth` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod angle;
pub mod circular;
pub mod error;
pub mod estimator;
pub mod hypothesis;
pub mod pattern;
pub mod sim;
#[allow(clippy::excessive_precision)]
pub mod special;
pub mod study;
pub mod table;

pub use error::{Error, Result};
pub use estimator::{
    distance_functional, estimate, full_procrustes, partial_procrustes, Coordinates, Estimate,
    GrowthParams, SolverConfig,
};
pub use pattern::{center_pattern, MatchedPair, MinutiaPattern, StudyDataset};
pub use table::{EstimateRow, EstimateTable};
