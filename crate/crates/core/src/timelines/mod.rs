//! Per-turn crossing times of the three return systems and their analyses.
//!
//! A timeline starts on Σ_A at `t = 0`. Turn `j` first spends time in U_A
//! (saddle A, saddle-node, or the loop saddle), crosses Σ_B at `T_{j,B}`,
//! then spends time in U_B and returns to Σ_A at `T_{j+1,A}`. Events
//! `k = 1..=n` record `(T_{k,A}, T_{k,B})`; `T_{0,B}` and `T_{n+1,A}` are kept
//! alongside so that the leg partition covers `[0, T_{n+1,A}]`.

mod generate;
mod intervals;
mod pairs;
mod separation;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmtnum::{g12, tower_g12};
use crate::maps::PolycycleModel;
use crate::numeric::{EventTime, TowerValue};
use crate::partition::Partition;

pub use generate::generate_timeline;
pub use intervals::{
    classify_log_ratio, color_intervals, gamma_hat_ln, integer_offset_seed, overlap_report, write_intervals_csv, Color,
    ColorInterval, ColorIntervalSet, LogRatio, Overlap,
};
pub use pairs::{loop_divergence, simultaneous_fraction, LoopDivergence, RegionPair, LEG_A, LEG_B};
pub use separation::{separation_analysis, Separation, SeparationCertificate, SeparationMode};

pub const MAX_TURNS: usize = 1_000_000;

/// How a time was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Plain reals (loop).
    Plain,
    /// Log domain (biangle).
    Log,
    /// Closed-form MBE arithmetic.
    Exact,
    /// MBE τ-recurrence on towers.
    Asymptotic,
}

impl Tier {
    pub fn name(&self) -> &'static str {
        match self {
            Tier::Plain => "plain",
            Tier::Log => "log",
            Tier::Exact => "exact",
            Tier::Asymptotic => "asymptotic",
        }
    }
}

/// Logarithmic time coordinate attached to a timeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeScale {
    /// `τ = log_Λ t`.
    LogLambda(f64),
    /// `τ = ln ln t`.
    LnLn,
    /// `τ = t`; loop wind times are already linear in ζ.
    Zeta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub k: usize,
    pub t_a: EventTime,
    pub t_b: EventTime,
    pub tier_a: Tier,
    pub tier_b: Tier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventTimeline {
    pub model: PolycycleModel,
    pub z0: f64,
    /// `T_{0,B}`.
    pub initial_b: EventTime,
    pub events: Vec<Event>,
    /// `T_{n+1,A}`, end of the last U_B leg.
    pub final_a: EventTime,
    pub scale: TimeScale,
    /// Loop only: ζ_0..ζ_n.
    pub zetas: Vec<f64>,
}

/// τ-images of one event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledEvent {
    pub k: usize,
    pub tau_a: TowerValue,
    pub tau_b: TowerValue,
}

impl EventTimeline {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `T_{k,A}` for `k = 0..=n+1`.
    pub fn t_a(&self, k: usize) -> Option<EventTime> {
        match k {
            0 => Some(EventTime::ZERO),
            _ if k <= self.events.len() => Some(self.events[k - 1].t_a),
            _ if k == self.events.len() + 1 => Some(self.final_a),
            _ => None,
        }
    }

    /// `T_{k,B}` for `k = 0..=n`.
    pub fn t_b(&self, k: usize) -> Option<EventTime> {
        match k {
            0 => Some(self.initial_b),
            _ if k <= self.events.len() => Some(self.events[k - 1].t_b),
            _ => None,
        }
    }

    /// Last recorded time.
    pub fn horizon_max(&self) -> EventTime {
        self.final_a
    }

    /// All Σ crossings in order: `T_{0,B}, T_{1,A}, T_{1,B}, …, T_{n+1,A}`,
    /// each with the leg it opens (`LEG_A` after Σ_A, `LEG_B` after Σ_B).
    pub fn crossings(&self) -> Vec<(EventTime, u32)> {
        let mut out = Vec::with_capacity(2 * self.events.len() + 2);
        out.push((self.initial_b, LEG_B));
        for e in &self.events {
            out.push((e.t_a, LEG_A));
            out.push((e.t_b, LEG_B));
        }
        out.push((self.final_a, LEG_A));
        out
    }

    /// Leg membership over `[0, horizon]` (labels `LEG_A`, `LEG_B`).
    pub fn leg_partition(&self, horizon: &EventTime) -> Result<Partition> {
        if horizon.is_zero() {
            return Err(LabError::Horizon("horizon must be positive".into()));
        }
        if horizon.cmp_time(&self.final_a).is_gt() {
            return Err(LabError::Horizon(format!(
                "horizon beyond the recorded range (last crossing at ln t = {})",
                self.final_a.ln_f64()
            )));
        }
        let switches = self
            .crossings()
            .into_iter()
            .take_while(|(t, _)| t.cmp_time(horizon).is_lt())
            .map(|(t, leg)| (t.ratio(horizon), leg))
            .collect::<Vec<_>>();
        Ok(Partition::from_switches(LEG_A, switches))
    }

    /// `τ_n = ln ln T_{n+1,A}` for `n = 0..n_events-1` (MBE recurrence coordinate).
    pub fn tau_sequence(&self) -> Result<Vec<TowerValue>> {
        self.events
            .iter()
            .map(|e| e.t_a.ln_ln().ok_or_else(|| LabError::Domain(format!("ln ln undefined at T_{{{},A}}", e.k))))
            .collect()
    }

    /// Writes `k, logT_kA, logT_kB, tier`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,logT_kA,logT_kB,tier")?;
        for e in &self.events {
            let tier = if e.tier_a == e.tier_b {
                e.tier_a.name().to_string()
            } else {
                format!("{}>{}", e.tier_a.name(), e.tier_b.name())
            };
            writeln!(w, "{},{},{},{}", e.k, ln_text(&e.t_a), ln_text(&e.t_b), tier)?;
        }
        Ok(())
    }
}

fn ln_text(t: &EventTime) -> String {
    match t.ln() {
        Some(l) => tower_g12(&l),
        None => g12(f64::NEG_INFINITY),
    }
}

fn scale_time(t: &EventTime, scale: TimeScale) -> Result<TowerValue> {
    match scale {
        TimeScale::LogLambda(base) => {
            if !(base > 1.0) {
                return Err(LabError::Domain(format!("log base {base} must exceed 1")));
            }
            let l = t.ln().ok_or_else(|| LabError::Domain("log of a non-positive time".into()))?;
            let f = l.to_f64();
            if f.is_finite() {
                Ok(TowerValue::from_f64(f / base.ln()))
            } else {
                Ok(l.mul_const(1.0 / base.ln()))
            }
        }
        TimeScale::LnLn => t.ln_ln().ok_or_else(|| LabError::Domain("ln ln needs times above 1".into())),
        TimeScale::Zeta => match *t {
            EventTime::Plain(x) => Ok(TowerValue::from_f64(x)),
            _ => {
                let l = t.ln().ok_or_else(|| LabError::Domain("zero time".into()))?;
                Ok(l.exp())
            }
        },
    }
}

/// τ-images of all events under `scale`.
pub fn rescale(t: &EventTimeline, scale: TimeScale) -> Result<Vec<ScaledEvent>> {
    t.events
        .iter()
        .map(|e| Ok(ScaledEvent { k: e.k, tau_a: scale_time(&e.t_a, scale)?, tau_b: scale_time(&e.t_b, scale)? }))
        .collect()
}

/// Scale a single time.
pub fn rescale_time(t: &EventTime, scale: TimeScale) -> Result<TowerValue> {
    scale_time(t, scale)
}

/// `(T_{k+1,A}/T_{k,A}, T_{k,B}/T_{k,A})` for `k = 1..n-1` (biangle).
pub fn geometric_ratios(t: &EventTimeline) -> Result<Vec<(f64, f64)>> {
    if !matches!(t.model, PolycycleModel::Biangle { .. }) {
        return Err(LabError::WrongModel { expected: "biangle" });
    }
    if t.events.len() < 2 {
        return Err(LabError::InsufficientEvents { needed: 2, have: t.events.len() });
    }
    Ok(t.events.windows(2).map(|w| (w[1].t_a.ratio(&w[0].t_a), w[0].t_b.ratio(&w[0].t_a))).collect())
}

/// One recurrence residual `r_n = τ_{n+1} − e^{τ_n} − C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub n: usize,
    pub value: f64,
    /// True when both τ's come from the τ-recurrence, where r is zero by construction.
    pub asymptotic: bool,
}

/// Residuals of the MBE τ-recurrence, computed from `ln T` directly so no
/// precision is lost exponentiating τ.
pub fn recurrence_residuals(t: &EventTimeline) -> Result<Vec<Residual>> {
    let c = match t.model {
        PolycycleModel::ModifiedBowen { .. } => t.model.constants().recurrence_c.unwrap(),
        _ => return Err(LabError::WrongModel { expected: "modified-bowen" }),
    };
    let exact = t.events.iter().filter(|e| e.tier_a == Tier::Exact).count();
    if exact < 3 {
        return Err(LabError::InsufficientEvents { needed: 3, have: exact });
    }
    let mut out = Vec::new();
    for (n, w) in t.events.windows(2).enumerate() {
        if w[1].tier_a == Tier::Exact {
            let l_now = w[0].t_a.ln_f64();
            let l_next = w[1].t_a.ln_f64();
            out.push(Residual { n, value: l_next.ln() - l_now - c, asymptotic: false });
        } else {
            out.push(Residual { n, value: 0.0, asymptotic: true });
        }
    }
    Ok(out)
}

/// `τ(T_{k+1,A}) − τ(T_{k,B})` in `τ = ln ln t` for `k = 0..` while both
/// crossings are exact-tier (MBE).
pub fn mbe_tau_gaps(t: &EventTimeline) -> Result<Vec<f64>> {
    if !matches!(t.model, PolycycleModel::ModifiedBowen { .. }) {
        return Err(LabError::WrongModel { expected: "modified-bowen" });
    }
    let mut out = Vec::new();
    for k in 0..=t.events.len() {
        let exact_b = k == 0 || t.events[k - 1].tier_b == Tier::Exact;
        let exact_a = match t.events.get(k) {
            Some(e) => e.tier_a == Tier::Exact,
            None => false,
        };
        if !(exact_a && exact_b) {
            break;
        }
        let (tb, ta) = (t.t_b(k).unwrap(), t.t_a(k + 1).unwrap());
        if tb.cmp_time(&EventTime::Plain(1.0)).is_le() {
            continue;
        }
        out.push(ta.ln_ln_gap(&tb).ok_or_else(|| LabError::Domain("ln ln undefined".into()))?);
    }
    Ok(out)
}
