//! Experiment harness: key/value configs, semiaxis family diagnostics,
//! deterministic tabular reports, and the suite runner.
//!
//! The contract across the module is reproducibility: a suite's report is
//! a pure function of its config and master seed. Worker counts only move
//! wall-clock time, never a byte of output.

mod config;
mod family;
mod report;
mod suites;

pub use config::Config;
pub use family::{
    check_criteria, CriteriaReport, FamilyChecks, FamilyGenerator, Perturbation, SequenceFamily,
};
pub use report::{emit_report, CellValue, ExperimentReport, ReportFormat};
pub use suites::{run_suite, SUITES};
