//! Scheduling for reconfigurable datacenter networks: a single-switch model where a
//! spine holds one matching at a time, served either by demand-aware BvN
//! configurations, by a demand-oblivious round-robin cycle, or by a composite of both.

pub mod analytics;
pub mod bvn;
pub mod error;
mod matching;
pub mod matrix;
pub mod schedule;
pub mod sweep;
pub mod systems;
pub mod traffic;

pub use error::{Error, Result};
pub use matrix::{DemandMatrix, Permutation};
