use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmtnum::g12;

use super::run::write_atomic;
use super::{OutputEntry, RunManifest, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(LabError::Config(format!("unknown report format {s:?}"))),
        }
    }
}

/// What a JSON report holds; parses back to the same value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub config_hash: String,
    pub version: String,
    pub passed: bool,
    pub error: Option<String>,
    pub wall_clock_s: String,
    pub verdicts: Vec<Verdict>,
    pub outputs: Vec<OutputEntry>,
}

impl Report {
    pub fn of(m: &RunManifest) -> Self {
        Report {
            kind: m.kind.to_string(),
            config_hash: m.config_hash.clone(),
            version: m.version.clone(),
            passed: m.passed(),
            error: m.error.clone(),
            wall_clock_s: g12(m.wall_clock_s),
            verdicts: m.verdicts.clone(),
            outputs: m.outputs.clone(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the verdict summary into `dir` and returns the files written.
///
/// CSV gives `verdicts.csv` and `outputs.csv` (header-only when empty);
/// JSON gives `report.json`.
pub fn emit_report(m: &RunManifest, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match format {
        ReportFormat::Csv => {
            let mut v = String::from("name,pass,detail\n");
            for x in &m.verdicts {
                v.push_str(&format!("{},{},{}\n", csv_field(&x.name), x.pass, csv_field(&x.detail)));
            }
            let mut o = String::from("name,file,rows\n");
            for x in &m.outputs {
                o.push_str(&format!("{},{},{}\n", csv_field(&x.name), csv_field(&x.file), x.rows));
            }
            let (pv, po) = (dir.join("verdicts.csv"), dir.join("outputs.csv"));
            write_atomic(&pv, v.as_bytes())?;
            write_atomic(&po, o.as_bytes())?;
            Ok(vec![pv, po])
        }
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&Report::of(m)).map_err(|e| LabError::Io(e.to_string()))?;
            text.push('\n');
            let p = dir.join("report.json");
            write_atomic(&p, text.as_bytes())?;
            Ok(vec![p])
        }
    }
}
