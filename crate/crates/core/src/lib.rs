//! Workload-aware planning of on-chip power delivery networks.
//!
//! The pipeline turns per-component architectural power traces into tile
//! power maps, classifies tiles by relative activity, instantiates an
//! adaptive power grid from a uniform skeleton of candidate wires, and checks
//! the result for IR drop and electromigration by solving the resistive
//! network. A uniform worst-case grid is built alongside as the baseline for
//! the metal-area comparison.
//!
//! ```text
//! trace_io ──► floorplan ──► classify ──► gridgen ──► electrical ──► report
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod electrical;
pub mod error;
pub mod floorplan;
pub mod gridgen;
pub mod report;
pub mod trace_io;

pub use error::{Error, Result};
