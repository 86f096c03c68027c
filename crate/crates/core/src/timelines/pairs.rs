use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::maps::{loop_zeta_step, PolycycleModel};
use crate::numeric::EventTime;
use crate::partition::{ticks_to_fraction, Partition};

use super::EventTimeline;

pub const LEG_A: u32 = 0;
pub const LEG_B: u32 = 1;

/// Which leg each of the two orbits is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionPair {
    AA,
    AB,
    BA,
    BB,
}

impl RegionPair {
    pub const ALL: [RegionPair; 4] = [RegionPair::AA, RegionPair::AB, RegionPair::BA, RegionPair::BB];

    pub fn legs(&self) -> (u32, u32) {
        match self {
            RegionPair::AA => (LEG_A, LEG_A),
            RegionPair::AB => (LEG_A, LEG_B),
            RegionPair::BA => (LEG_B, LEG_A),
            RegionPair::BB => (LEG_B, LEG_B),
        }
    }

    /// Label in the product partition.
    pub fn label(&self) -> u32 {
        let (a, b) = self.legs();
        a * 2 + b
    }
}

/// Joint leg partition of two timelines over `[0, horizon]`.
pub fn pair_partition(first: &EventTimeline, second: &EventTimeline, horizon: &EventTime) -> Result<Partition> {
    Ok(first.leg_partition(horizon)?.product(&second.leg_partition(horizon)?, 2))
}

/// Share of `[0, horizon]` with orbit 1 in the first leg and orbit 2 in the second.
pub fn simultaneous_fraction(
    first: &EventTimeline,
    second: &EventTimeline,
    pair: RegionPair,
    horizon: &EventTime,
) -> Result<f64> {
    let p = pair_partition(first, second, horizon)?;
    Ok(ticks_to_fraction(p.tick_totals(4)[pair.label() as usize]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopDivergence {
    /// `T_{n,B}(slow) − T_{n,B}(fast)` for `n = 0..`, where the slow orbit has the larger ζ.
    pub gaps: Vec<f64>,
    /// Last turn index at which the U_B windows `[T_{n,B}, T_{n,B} + K]` of the
    /// two orbits intersect, or `None` if they never do.
    pub last_simultaneous: Option<usize>,
}

/// Wind-time divergence of two loop orbits.
pub fn loop_divergence(first: &EventTimeline, second: &EventTimeline, k: f64) -> Result<LoopDivergence> {
    let p = match first.model {
        PolycycleModel::Loop { saddle, .. } => saddle,
        _ => return Err(LabError::WrongModel { expected: "loop" }),
    };
    if second.model != first.model {
        return Err(LabError::WrongModel { expected: "loop with the same parameters" });
    }
    if !(k > 0.0) {
        return Err(LabError::Domain(format!("window length {k} must be positive")));
    }
    let (zx, zy) = (first.zetas[0], second.zetas[0]);
    let (lo, hi) = if zx < zy { (zx, zy) } else { (zy, zx) };
    let next = loop_zeta_step(lo, &p)?;
    if !(lo < hi && hi < next) {
        return Err(LabError::Interleaving(format!(
            "ζ seeds {zx} and {zy} are not interleaved (need ζ < ζ' < {next})"
        )));
    }
    let (slow, fast) = if zx > zy { (first, second) } else { (second, first) };
    let n = slow.events.len().min(fast.events.len());
    let tb = |t: &EventTimeline, j: usize| t.t_b(j).unwrap().to_f64();
    let gaps: Vec<f64> = (0..=n).map(|j| tb(slow, j) - tb(fast, j)).collect();

    // closed windows; two-pointer over both sorted window lists
    let wins = |t: &EventTimeline| (0..=n).map(|j| tb(t, j)).collect::<Vec<_>>();
    let (wx, wy) = (wins(first), wins(second));
    let mut last = None;
    let (mut i, mut j) = (0, 0);
    while i < wx.len() && j < wy.len() {
        let (a, b) = (wx[i], wy[j]);
        if a.max(b) <= a.min(b) + k {
            last = Some(last.unwrap_or(0).max(i.max(j)));
        }
        if a < b || (a == b && i <= j) {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(LoopDivergence { gaps, last_simultaneous: last })
}
