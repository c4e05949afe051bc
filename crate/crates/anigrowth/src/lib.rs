//! File formats, parallel Monte Carlo drivers and the command line of the
//! `anigrowth` tool. The estimators and tests live in `anigrowth-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod harness;
pub mod io;
pub mod sweep;
