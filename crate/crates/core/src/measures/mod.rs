//! Occupancy histograms and attractor estimators over finite region systems.

mod estimate;
mod oscillation;

pub use estimate::{estimate_attractors, physical_weights, AttractorEstimate, HorizonSchedule, PhysicalWeights};
pub use oscillation::{ensemble_occupancy, oscillation_detect, EnsembleOccupancy, Oscillation, StripRegion};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cylinder::{strip_partition_at, strip_segments, OrbitSample};
use crate::error::{LabError, Result};
use crate::fmtnum::g12;
use crate::numeric::EventTime;
use crate::partition::{ticks_to_fraction, Partition};
use crate::timelines::{EventTimeline, LEG_A};

pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Named, pairwise disjoint regions indexed by partition label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSystem {
    pub names: Vec<String>,
    /// Factor sizes for a product system (`label = a·m + b`).
    pub factors: Option<(usize, usize)>,
}

impl RegionSystem {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(LabError::Domain("region system needs at least one region".into()));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(LabError::Domain("region names must be distinct".into()));
        }
        Ok(RegionSystem { names, factors: None })
    }

    /// `{U_A, U_B}` with a suffix for the second factor (`"~"` gives `U_Ã`-style names).
    pub fn legs(suffix: &str) -> Self {
        RegionSystem { names: vec![format!("U_A{suffix}"), format!("U_B{suffix}")], factors: None }
    }

    /// Cylinder strips and their complement.
    pub fn strips(suffix: &str) -> Self {
        RegionSystem {
            names: vec![format!("S_L{suffix}"), format!("S_R{suffix}"), format!("OUT{suffix}")],
            factors: None,
        }
    }

    pub fn product(a: &RegionSystem, b: &RegionSystem) -> Self {
        let mut names = Vec::with_capacity(a.len() * b.len());
        for x in &a.names {
            for y in &b.names {
                names.push(format!("({x},{y})"));
            }
        }
        RegionSystem { names, factors: Some((a.len(), b.len())) }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Anything that yields a labelled time partition up to a horizon.
#[derive(Clone, Debug)]
pub enum OrbitSource {
    /// Leg labels of a polycycle timeline.
    Timeline(EventTimeline),
    /// Strip labels of a cylinder orbit; time is elapsed from the seed.
    Cylinder { orbit: OrbitSample, eps: f64 },
    /// Joint labels of two sources on common time.
    Product(Box<OrbitSource>, Box<OrbitSource>),
}

impl OrbitSource {
    pub fn product(a: OrbitSource, b: OrbitSource) -> Self {
        OrbitSource::Product(Box::new(a), Box::new(b))
    }

    pub fn n_labels(&self) -> usize {
        match self {
            OrbitSource::Timeline(_) => 2,
            OrbitSource::Cylinder { .. } => 3,
            OrbitSource::Product(a, b) => a.n_labels() * b.n_labels(),
        }
    }

    /// Last horizon the source can answer for.
    pub fn horizon_max(&self) -> EventTime {
        match self {
            OrbitSource::Timeline(t) => t.horizon_max(),
            OrbitSource::Cylinder { orbit, .. } => {
                EventTime::Plain(orbit.flow.profile.elapsed(orbit.xi0(), orbit.xi_end()))
            }
            OrbitSource::Product(a, b) => {
                let (x, y) = (a.horizon_max(), b.horizon_max());
                if x.cmp_time(&y).is_le() {
                    x
                } else {
                    y
                }
            }
        }
    }

    pub fn partition(&self, horizon: &EventTime) -> Result<Partition> {
        match self {
            OrbitSource::Timeline(t) => t.leg_partition(horizon),
            OrbitSource::Cylinder { orbit, eps } => strip_partition_at(orbit, *eps, horizon.to_f64()),
            OrbitSource::Product(a, b) => {
                let (pa, pb) = (a.partition(horizon)?, b.partition(horizon)?);
                Ok(pa.product(&pb, b.n_labels() as u32))
            }
        }
    }

    /// Label switches up to `horizon`, starting with the label at time 0.
    pub fn switches(&self, horizon: &EventTime) -> Result<Vec<(EventTime, u32)>> {
        match self {
            OrbitSource::Timeline(t) => {
                let mut v = vec![(EventTime::ZERO, LEG_A)];
                v.extend(t.crossings().into_iter().take_while(|(c, _)| c.cmp_time(horizon).is_lt()));
                Ok(v)
            }
            OrbitSource::Cylinder { orbit, eps } => {
                let prof = orbit.flow.profile;
                let x0 = orbit.xi0();
                let xi_h = prof.xi_after(x0, horizon.to_f64());
                Ok(strip_segments(orbit, *eps)?
                    .into_iter()
                    .take_while(|s| s.0 < xi_h)
                    .map(|(a, _, l)| (EventTime::Plain(prof.elapsed(x0, a)), l))
                    .collect())
            }
            OrbitSource::Product(a, b) => {
                let (sa, sb) = (a.switches(horizon)?, b.switches(horizon)?);
                let m = b.n_labels() as u32;
                let (mut i, mut j) = (0, 0);
                let mut out: Vec<(EventTime, u32)> = vec![(EventTime::ZERO, sa[0].1 * m + sb[0].1)];
                while i + 1 < sa.len() || j + 1 < sb.len() {
                    let next_a = sa.get(i + 1).map(|x| x.0);
                    let next_b = sb.get(j + 1).map(|x| x.0);
                    let t = match (next_a, next_b) {
                        (Some(x), Some(y)) if x.cmp_time(&y).is_le() => {
                            i += 1;
                            if x.cmp_time(&y).is_eq() {
                                j += 1;
                            }
                            x
                        }
                        (Some(x), None) => {
                            i += 1;
                            x
                        }
                        (_, Some(y)) => {
                            j += 1;
                            y
                        }
                        (None, None) => unreachable!(),
                    };
                    let l = sa[i].1 * m + sb[j].1;
                    if out.last().unwrap().1 != l {
                        out.push((t, l));
                    }
                }
                Ok(out)
            }
        }
    }

    fn check_regions(&self, regions: &RegionSystem) -> Result<()> {
        if regions.len() != self.n_labels() {
            return Err(LabError::Domain(format!(
                "region system has {} regions, source has {} labels",
                regions.len(),
                self.n_labels()
            )));
        }
        Ok(())
    }
}

/// Fractions of `[0, horizon]` spent in each region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyHistogram {
    pub horizon: EventTime,
    pub names: Vec<String>,
    pub weights: Vec<f64>,
    /// Exact tick totals behind `weights`.
    pub ticks: Vec<u64>,
}

impl OccupancyHistogram {
    fn from_ticks(horizon: EventTime, names: Vec<String>, ticks: Vec<u64>) -> Self {
        let weights = ticks.iter().map(|&t| ticks_to_fraction(t)).collect();
        OccupancyHistogram { horizon, names, weights, ticks }
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.weights[i])
    }

    /// Projection of a product histogram onto factor 0 or 1.
    pub fn marginal(&self, regions: &RegionSystem, factor: usize, factor_names: &[String]) -> Result<Self> {
        let (ma, mb) = regions.factors.ok_or_else(|| LabError::Domain("marginal of a non-product system".into()))?;
        let m = if factor == 0 { ma } else { mb };
        if factor > 1 || factor_names.len() != m {
            return Err(LabError::Domain("factor index or names do not match the product".into()));
        }
        let mut ticks = vec![0u64; m];
        for (l, &t) in self.ticks.iter().enumerate() {
            let i = if factor == 0 { l / mb } else { l % mb };
            ticks[i] += t;
        }
        Ok(Self::from_ticks(self.horizon, factor_names.to_vec(), ticks))
    }

    /// `region,weight` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "region,weight")?;
        for (n, x) in self.names.iter().zip(&self.weights) {
            writeln!(w, "{n},{}", g12(*x))?;
        }
        Ok(())
    }
}

/// Time-average occupancy `(1/T)∫₀ᵀ 1_U` of every region.
pub fn accumulate(source: &OrbitSource, regions: &RegionSystem, horizon: &EventTime) -> Result<OccupancyHistogram> {
    source.check_regions(regions)?;
    if horizon.cmp_time(&source.horizon_max()).is_gt() {
        return Err(LabError::Range("horizon beyond the source's range".into()));
    }
    let p = source.partition(horizon)?;
    Ok(OccupancyHistogram::from_ticks(*horizon, regions.names.clone(), p.tick_totals(regions.len())))
}
