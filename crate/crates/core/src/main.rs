use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use attractorlab::lab::{emit_report, run_scenario, ReportFormat, RunManifest, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "attractorlab", version, about = "Attractor experiments for polycycle flows and their products")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set model.mu=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a scenario kind with default parameters and print its checks.
    Check {
        kind: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write a verdict report for a finished run.
    Report {
        manifest: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Directory for the report files (default: next to the manifest).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_run(m: &RunManifest) {
    for v in &m.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if let Some(e) = &m.error {
        println!("ERROR {e}");
    }
    println!("manifest {}", m.manifest_path().display());
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let m = match cli.cmd {
        Cmd::Run { config, set } => {
            let c = ScenarioConfig::load(&config, &set)?;
            run_scenario(&c)?
        }
        Cmd::Check { kind, set } => {
            let kind: ScenarioKind = kind.parse()?;
            run_scenario(&ScenarioConfig::for_kind(kind, &set)?)?
        }
        Cmd::Report { manifest, format, out } => {
            let m = RunManifest::load(&manifest)?;
            let format: ReportFormat = format.parse()?;
            let dir = out.unwrap_or_else(|| manifest.parent().map(PathBuf::from).unwrap_or_default());
            for f in emit_report(&m, format, &dir).with_context(|| format!("writing report to {}", dir.display()))? {
                println!("{}", f.display());
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    print_run(&m);
    Ok(if m.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
