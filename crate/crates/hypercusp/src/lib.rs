//! File formats, run configuration, the command-line driver and the
//! acceptance runner for `hypercusp-core`.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod formats;

pub use hypercusp_core as core;
