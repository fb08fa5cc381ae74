//! Command-line front end for `rankmod`: RMP problem files, inversion,
//! identity checks, determinants, instance generation and benchmarks.

pub mod bench;
pub mod commands;
pub mod rmp;
