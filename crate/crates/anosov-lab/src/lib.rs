//! IO companion for `anosov-core`: JSON experiment configs, CSV/JSON
//! artifact emission, and the `lab` command-line surface. Identical
//! config and seed always reproduce byte-identical outputs.

pub mod config;
pub mod emit;
pub mod error;
pub mod par;
pub mod run;
