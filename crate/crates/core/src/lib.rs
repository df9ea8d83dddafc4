//! Outcome statistics of a qubit that precesses between repeated weak
//! measurements: exact distributions, independent oracles, counting
//! statistics and the resulting phase diagram.

pub mod cli;
pub mod config;
pub mod dp;
pub mod error;
pub mod fcs;
pub mod oracle;
pub mod phase;
pub mod qubit;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
