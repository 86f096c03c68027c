//! Scenario configs, runs, manifests and reports.

mod config;
mod report;
mod run;
mod seeds;

pub use config::{ModelParams, ScenarioConfig, ScenarioKind};
pub use report::{emit_report, Report, ReportFormat};
pub use run::{output_root, run_scenario, OutputEntry, RunManifest, Verdict, MANIFEST_FILE, OUT_ENV};
pub use seeds::member_rng;
