//! Command-line front end for the cavity-EIT phase-gate simulator.
//!
//! Scenarios are described by strict JSON configuration documents; every
//! run writes CSV data files, a summary JSON with all scalar outcomes and
//! residual diagnostics, and a gnuplot script. Identical configurations
//! produce byte-identical artifacts.

pub mod config;
pub mod emit;
pub mod figures;
pub mod run;

use std::path::PathBuf;

/// Output directory precedence: `--out` flag, then the `CAVITY_EIT_OUT`
/// environment variable, then the configuration's `output_dir`.
pub fn resolve_out_dir(flag: Option<PathBuf>, config_dir: &std::path::Path) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Ok(dir) = std::env::var("CAVITY_EIT_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    config_dir.to_path_buf()
}
