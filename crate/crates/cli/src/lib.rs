//! Std companion of `pentomo-core`: the JSON config, record and report file
//! formats, the parallel experiment driver and the `pentomo` CLI.
//!
//! A run goes `simulate` (records) → `reconstruct` (report) → `wigner` /
//! `report` (Wigner grids, comparison against the true state).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
mod error;
pub mod fsio;
pub mod pipeline;
pub mod records;
pub mod report;
pub mod wigner_out;

pub use compare::{compare, ComparisonReport};
pub use config::{TomographyConfig, PAPER_SCALE_EVENTS};
pub use error::{Error, Result};
pub use pipeline::{reconstruct, simulate};
pub use records::RecordSet;
pub use report::ReportDoc;
