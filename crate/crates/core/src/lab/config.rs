use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::RngExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::maps::{PolycycleModel, SaddleNodeParams, SaddleParams};

use super::member_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    BiangleSquare,
    MbeSquare,
    LoopSquare,
    MbeTimesMbe,
    MbeTimesBiangle,
    Cylinder,
    CylinderSquare,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::BiangleSquare,
        ScenarioKind::MbeSquare,
        ScenarioKind::LoopSquare,
        ScenarioKind::MbeTimesMbe,
        ScenarioKind::MbeTimesBiangle,
        ScenarioKind::Cylinder,
        ScenarioKind::CylinderSquare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::BiangleSquare => "biangle-square",
            ScenarioKind::MbeSquare => "mbe-square",
            ScenarioKind::LoopSquare => "loop-square",
            ScenarioKind::MbeTimesMbe => "mbe-times-mbe",
            ScenarioKind::MbeTimesBiangle => "mbe-times-biangle",
            ScenarioKind::Cylinder => "cylinder",
            ScenarioKind::CylinderSquare => "cylinder-square",
        }
    }

    fn default_count(&self) -> usize {
        match self {
            ScenarioKind::BiangleSquare | ScenarioKind::MbeTimesBiangle => 1,
            ScenarioKind::MbeSquare => 50,
            ScenarioKind::MbeTimesMbe => 40,
            ScenarioKind::LoopSquare | ScenarioKind::CylinderSquare => 20,
            ScenarioKind::Cylinder => 100,
        }
    }

    /// Seed band: transversal coordinate for maps, ζ for the loop,
    /// angular offset from θ_l for the cylinder.
    fn default_band(&self) -> [f64; 2] {
        match self {
            ScenarioKind::BiangleSquare => [0.05, 0.5],
            ScenarioKind::MbeSquare | ScenarioKind::MbeTimesMbe | ScenarioKind::MbeTimesBiangle => [0.02, 0.5],
            ScenarioKind::LoopSquare => [3.0, 8.0],
            ScenarioKind::Cylinder | ScenarioKind::CylinderSquare => [-1.2, 1.2],
        }
    }

    fn default_turns(&self) -> usize {
        match self {
            ScenarioKind::BiangleSquare => 2000,
            ScenarioKind::MbeSquare | ScenarioKind::MbeTimesMbe => 6,
            ScenarioKind::LoopSquare => 14,
            ScenarioKind::MbeTimesBiangle => 3,
            ScenarioKind::Cylinder | ScenarioKind::CylinderSquare => 0,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown scenario kind {s:?}")))
    }
}

/// Model parameters shared by all kinds; each kind reads the ones it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub mu: f64,
    pub lambda: f64,
    /// Saddle monodromy coefficient.
    pub c: f64,
    /// Saddle-node normal form `a`, `b`.
    pub a: f64,
    pub b: f64,
    /// Second saddle of the second factor (biangle or MBE).
    pub mu2: f64,
    pub lambda2: f64,
    /// Loop transit constant K.
    pub k_transit: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { mu: 2.0, lambda: 1.0, c: 1.0, a: 0.0, b: 1.0, mu2: 3.0, lambda2: 1.0, k_transit: 1.0 }
    }
}

impl ModelParams {
    fn saddle(&self) -> Result<SaddleParams> {
        SaddleParams::new(self.mu, self.lambda, self.c)
    }

    fn saddle2(&self) -> Result<SaddleParams> {
        SaddleParams::new(self.mu2, self.lambda2, self.c)
    }

    pub fn biangle(&self) -> Result<PolycycleModel> {
        PolycycleModel::biangle(self.saddle()?, self.saddle()?)
    }

    /// The second biangle has one saddle replaced by `(mu2, lambda2)`.
    pub fn biangle2(&self) -> Result<PolycycleModel> {
        PolycycleModel::biangle(self.saddle()?, self.saddle2()?)
    }

    pub fn mbe(&self) -> Result<PolycycleModel> {
        PolycycleModel::modified_bowen(SaddleNodeParams::new(self.a, self.b)?, self.saddle()?)
    }

    pub fn mbe2(&self) -> Result<PolycycleModel> {
        PolycycleModel::modified_bowen(SaddleNodeParams::new(self.a, self.b)?, self.saddle2()?)
    }

    pub fn loop_model(&self) -> Result<PolycycleModel> {
        PolycycleModel::loop_model(self.saddle()?, self.k_transit)
    }
}

fn d_root() -> u64 {
    1
}
fn d_xi_max() -> f64 {
    400.0
}
fn d_eps() -> f64 {
    0.1
}
fn d_tol() -> f64 {
    1e-9
}
fn d_threshold() -> f64 {
    crate::measures::DEFAULT_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Every random draw of the run derives from this.
    #[serde(default = "d_root")]
    pub root_seed: u64,
    /// Explicit seeds; override `seed_band` and `count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_band: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<usize>,
    /// Arrival indices `k` of the horizon schedule `T_{k,A}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<Vec<usize>>,
    #[serde(default = "d_xi_max")]
    pub xi_max: f64,
    #[serde(default = "d_eps")]
    pub epsilon: f64,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        ScenarioConfig {
            kind,
            root_seed: d_root(),
            seeds: None,
            seed_band: None,
            count: None,
            model: ModelParams::default(),
            turns: None,
            arrivals: None,
            xi_max: d_xi_max(),
            epsilon: d_eps(),
            tol: d_tol(),
            threshold: d_threshold(),
            output_dir: None,
        }
    }

    /// Parses TOML, applies `key=value` overrides (dotted keys reach into
    /// tables) and validates.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let c: ScenarioConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    /// Default config for `kind` with overrides applied.
    pub fn for_kind(kind: ScenarioKind, overrides: &[String]) -> Result<Self> {
        Self::parse(&format!("kind = \"{kind}\""), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn count(&self) -> usize {
        match &self.seeds {
            Some(s) => s.len(),
            None => self.count.unwrap_or(self.kind.default_count()),
        }
    }

    pub fn band(&self) -> [f64; 2] {
        self.seed_band.unwrap_or(self.kind.default_band())
    }

    pub fn turns(&self) -> usize {
        self.turns.unwrap_or(self.kind.default_turns())
    }

    pub fn arrivals(&self) -> Vec<usize> {
        self.arrivals.clone().unwrap_or_else(|| vec![1, 2, 3, 4])
    }

    /// Seed `i`: explicit, or a uniform draw from the band on stream `i`.
    pub fn seed(&self, i: usize) -> f64 {
        match &self.seeds {
            Some(s) => s[i],
            None => {
                let [lo, hi] = self.band();
                member_rng(self.root_seed, i as u64).random_range(lo..hi)
            }
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.count() == 0 {
            return bad("seed count must be at least 1".into());
        }
        let [lo, hi] = self.band();
        if !(lo < hi) {
            return bad(format!("seed band [{lo}, {hi}] is empty"));
        }
        if !(self.threshold > 0.0 && self.threshold < 0.5) {
            return bad(format!("threshold {} outside (0, 0.5)", self.threshold));
        }
        if !(self.epsilon > 0.0 && self.tol > 0.0 && self.xi_max > 0.0) {
            return bad("epsilon, tol and xi_max must be positive".into());
        }
        let arr = self.arrivals();
        if arr.is_empty() || arr.windows(2).any(|w| w[1] <= w[0]) || arr[0] == 0 {
            return bad("arrivals must be increasing and start at 1 or later".into());
        }
        let m = &self.model;
        let check = |r: Result<PolycycleModel>| r.map(|_| ()).map_err(|e| LabError::Config(e.to_string()));
        match self.kind {
            ScenarioKind::BiangleSquare => {
                check(m.biangle())?;
                check(m.biangle2())
            }
            ScenarioKind::MbeSquare => check(m.mbe()),
            ScenarioKind::MbeTimesMbe => {
                check(m.mbe())?;
                check(m.mbe2())
            }
            ScenarioKind::MbeTimesBiangle => {
                check(m.mbe())?;
                check(m.biangle2())
            }
            ScenarioKind::LoopSquare => check(m.loop_model()),
            ScenarioKind::Cylinder | ScenarioKind::CylinderSquare => {
                if self.xi_max < 8.0 {
                    return bad(format!("xi_max {} too short for block statistics (need ≥ 8)", self.xi_max));
                }
                Ok(())
            }
        }
    }
}

fn apply_override(table: &mut toml::Table, o: &str) -> Result<()> {
    let (key, raw) = o.split_once('=').ok_or_else(|| LabError::Config(format!("override {o:?} is not key=value")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry.as_table_mut().ok_or_else(|| LabError::Config(format!("{key}: {p} is not a table")))?;
    }
    t.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
