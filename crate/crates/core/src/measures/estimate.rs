use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::VerticalProfile;
use crate::error::{LabError, Result};
use crate::fmtnum::g12;
use crate::numeric::EventTime;

use super::{accumulate, OrbitSource, RegionSystem};

/// Share of recorded segments treated as the orbit's tail.
pub const MILNOR_TAIL: f64 = 0.25;

/// Horizons at which occupancies are read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HorizonSchedule {
    /// The same times for every source, measured from each source's start.
    Common(Vec<EventTime>),
    /// Each source's own arrivals `T_{k,A}`; products merge both factors' arrivals.
    Arrivals(Vec<usize>),
}

impl HorizonSchedule {
    /// Elapsed times at depths `xi0 + blocks`, for a cylinder orbit seeded at `xi0`.
    pub fn block_ends(profile: &VerticalProfile, xi0: f64, ends: impl IntoIterator<Item = u64>) -> Self {
        HorizonSchedule::Common(ends.into_iter().map(|n| EventTime::Plain(profile.elapsed(xi0, n as f64))).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            HorizonSchedule::Common(h) => h.len() >= 4 && h.windows(2).all(|w| w[0].cmp_time(&w[1]).is_lt()),
            HorizonSchedule::Arrivals(k) => k.len() >= 4 && k[0] >= 1 && k.windows(2).all(|w| w[0] < w[1]),
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::Domain("horizon schedule must be increasing with at least 4 entries".into()))
        }
    }

    /// Concrete horizons for one source, ascending.
    pub fn resolve(&self, src: &OrbitSource) -> Result<Vec<EventTime>> {
        let mut out = match self {
            HorizonSchedule::Common(h) => h.clone(),
            HorizonSchedule::Arrivals(ks) => arrivals(src, ks)?,
        };
        out.sort_by(|a, b| a.cmp_time(b));
        out.dedup_by(|a, b| a.cmp_time(b) == Ordering::Equal);
        let max = src.horizon_max();
        if out.iter().any(|h| h.cmp_time(&max).is_gt()) {
            return Err(LabError::Range("scheduled horizon beyond the source's range".into()));
        }
        if out.is_empty() {
            return Err(LabError::Range("empty horizon schedule".into()));
        }
        Ok(out)
    }
}

fn arrivals(src: &OrbitSource, ks: &[usize]) -> Result<Vec<EventTime>> {
    match src {
        OrbitSource::Timeline(t) => {
            ks.iter().map(|&k| t.t_a(k).ok_or_else(|| LabError::Range(format!("no arrival T_{{{k},A}}")))).collect()
        }
        OrbitSource::Product(a, b) => {
            let max = src.horizon_max();
            let mut v = arrivals(a, ks)?;
            v.extend(arrivals(b, ks)?);
            Ok(v.into_iter().filter(|h| h.cmp_time(&max).is_le()).collect())
        }
        OrbitSource::Cylinder { .. } => Err(LabError::Domain("arrival horizons need a polycycle timeline".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorEstimate {
    pub regions: Vec<String>,
    pub milnor_cells: Vec<String>,
    pub statistical_cells: Vec<String>,
    pub minimal_cells: Vec<String>,
    pub threshold: f64,
    pub schedule: HorizonSchedule,
    pub ensemble: usize,
    /// Per region: sources whose tail limsup exceeded the threshold.
    pub statistical_support: Vec<usize>,
    /// Per region: ensemble-mean occupancy at `common_horizon`.
    pub minimal_mean: Vec<f64>,
    pub common_horizon: EventTime,
}

struct SourceStats {
    limsup: Vec<f64>,
    tail_labels: Vec<bool>,
    last: EventTime,
}

fn source_stats(src: &OrbitSource, regions: &RegionSystem, schedule: &HorizonSchedule) -> Result<SourceStats> {
    let hs = schedule.resolve(src)?;
    let start = hs.len() / 2;
    let mut limsup = vec![0.0f64; regions.len()];
    for h in &hs[start..] {
        let hist = accumulate(src, regions, h)?;
        for (m, w) in limsup.iter_mut().zip(&hist.weights) {
            *m = m.max(*w);
        }
    }
    let last = *hs.last().unwrap();
    let sw = src.switches(&last)?;
    let k = ((sw.len() as f64 * MILNOR_TAIL).ceil() as usize).clamp(1, sw.len());
    let tail_labels = (0..regions.len() as u32).map(|l| sw[sw.len() - k..].iter().any(|s| s.1 == l)).collect();
    Ok(SourceStats { limsup, tail_labels, last })
}

/// Milnor, statistical and minimal cell estimates of an ensemble.
///
/// Statistical cells: per-source limsup over the last half of the schedule
/// above `threshold` for at least half the ensemble. Minimal cells:
/// ensemble-mean occupancy above `threshold` at the earliest final horizon.
/// Milnor cells: visited in the last quarter of some source's legs.
pub fn estimate_attractors(
    ensemble: &[OrbitSource],
    regions: &RegionSystem,
    schedule: &HorizonSchedule,
    threshold: f64,
) -> Result<AttractorEstimate> {
    if ensemble.len() < 30 {
        return Err(LabError::Domain(format!("ensemble of {} below 30", ensemble.len())));
    }
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(LabError::Domain(format!("threshold {threshold} outside (0, 0.5)")));
    }
    schedule.validate()?;
    let stats: Vec<SourceStats> =
        ensemble.par_iter().map(|s| source_stats(s, regions, schedule)).collect::<Result<_>>()?;
    let n = ensemble.len();
    let m = regions.len();

    let common = stats.iter().map(|s| s.last).min_by(|a, b| a.cmp_time(b)).unwrap();
    let hists: Vec<Vec<f64>> =
        ensemble.par_iter().map(|s| accumulate(s, regions, &common).map(|h| h.weights)).collect::<Result<_>>()?;
    let minimal_mean: Vec<f64> = (0..m).map(|r| hists.iter().map(|h| h[r]).sum::<f64>() / n as f64).collect();
    let statistical_support: Vec<usize> =
        (0..m).map(|r| stats.iter().filter(|s| s.limsup[r] > threshold).count()).collect();

    let stat: Vec<bool> = statistical_support.iter().map(|&c| 2 * c >= n).collect();
    let min: Vec<bool> = minimal_mean.iter().map(|&w| w > threshold).collect();
    let mil: Vec<bool> = (0..m).map(|r| stats.iter().any(|s| s.tail_labels[r])).collect();

    let pick = |v: &[bool]| -> Vec<String> {
        v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| regions.names[i].clone()).collect()
    };
    for r in 0..m {
        if min[r] && !stat[r] {
            return Err(LabError::Hierarchy(format!("{} is minimal but not statistical", regions.names[r])));
        }
        if stat[r] && !mil[r] {
            return Err(LabError::Hierarchy(format!("{} is statistical but not Milnor", regions.names[r])));
        }
    }
    Ok(AttractorEstimate {
        regions: regions.names.clone(),
        milnor_cells: pick(&mil),
        statistical_cells: pick(&stat),
        minimal_cells: pick(&min),
        threshold,
        schedule: schedule.clone(),
        ensemble: n,
        statistical_support,
        minimal_mean,
        common_horizon: common,
    })
}

/// Weights of selected atoms along a horizon schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalWeights {
    pub atoms: Vec<String>,
    pub horizons: Vec<EventTime>,
    /// `weights[i][j]`: atom `j` at horizon `i`.
    pub weights: Vec<Vec<f64>>,
    /// Largest spread of any atom's weight over the last half of the schedule.
    pub oscillation: f64,
}

impl PhysicalWeights {
    pub fn last(&self) -> &[f64] {
        self.weights.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `ln_horizon,<atom>...` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "ln_horizon,{}", self.atoms.join(","))?;
        for (h, row) in self.horizons.iter().zip(&self.weights) {
            let cells: Vec<String> = row.iter().map(|x| g12(*x)).collect();
            writeln!(w, "{},{}", g12(h.ln_f64()), cells.join(","))?;
        }
        Ok(())
    }
}

pub fn physical_weights(
    source: &OrbitSource,
    regions: &RegionSystem,
    atoms: &[&str],
    schedule: &HorizonSchedule,
) -> Result<PhysicalWeights> {
    let idx: Vec<usize> = atoms
        .iter()
        .map(|a| regions.index(a).ok_or_else(|| LabError::Domain(format!("unknown atom {a}"))))
        .collect::<Result<_>>()?;
    let mut uniq = idx.clone();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != idx.len() {
        return Err(LabError::Domain("atoms must be distinct regions".into()));
    }
    let horizons = schedule.resolve(source)?;
    let weights: Vec<Vec<f64>> = horizons
        .iter()
        .map(|h| accumulate(source, regions, h).map(|hist| idx.iter().map(|&i| hist.weights[i]).collect()))
        .collect::<Result<_>>()?;
    let start = weights.len() / 2;
    let oscillation = (0..idx.len())
        .map(|j| {
            let col = weights[start..].iter().map(|r| r[j]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            hi - lo
        })
        .fold(0.0, f64::max);
    Ok(PhysicalWeights { atoms: atoms.iter().map(|s| s.to_string()).collect(), horizons, weights, oscillation })
}
