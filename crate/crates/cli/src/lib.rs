//! Batch front end of the laboratory: loads a run configuration, runs the
//! requested pipelines over the grid and writes machine-readable reports
//! and plot-ready data.

// Negated comparisons are deliberate: they treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{CheckSet, RunConfig};
pub use error::{CliError, Result};
pub use pipeline::{run, RunOutcome, Summary};

/// File names inside an output directory.
pub mod artifacts {
    pub const PROFILE_CSV: &str = "profile.csv";
    pub const PROFILE_JSON: &str = "profile.json";
    pub const EXCEPTIONAL_JSON: &str = "exceptional.json";
    pub const EXCEPTIONAL_CSV: &str = "exceptional.csv";
    pub const VERIFICATION_JSONL: &str = "verification.jsonl";
    pub const VERIFICATION_SUMMARY_CSV: &str = "verification_summary.csv";
    pub const SUMMARY_JSON: &str = "summary.json";
    pub const SUMMARY_TXT: &str = "summary.txt";
    pub const CLASSICAL_JSON: &str = "classical.json";
    pub const REPORT_CSV: &str = "report.csv";
    pub const PLOT_DATA_CSV: &str = "plot_data.csv";
}
