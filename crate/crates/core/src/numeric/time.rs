use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{LogValue, TowerValue};

/// A non-negative crossing time in whichever representation its model needs.
///
/// `Anchored` stores `factor · anchor`. Times that share an anchor keep their
/// exact ratio even when the anchor itself is a tower far beyond f64.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EventTime {
    Plain(f64),
    Log(LogValue),
    Anchored { anchor: TowerValue, factor: f64 },
}

impl EventTime {
    pub const ZERO: EventTime = EventTime::Plain(0.0);

    pub fn anchored(anchor: TowerValue, factor: f64) -> Self {
        EventTime::Anchored { anchor, factor }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            EventTime::Plain(x) => x == 0.0,
            EventTime::Log(l) => l.is_zero(),
            EventTime::Anchored { factor, .. } => factor == 0.0,
        }
    }

    /// Natural log as a tower; `None` for zero.
    pub fn ln(&self) -> Option<TowerValue> {
        match *self {
            EventTime::Plain(x) if x > 0.0 => Some(TowerValue::from_f64(x.ln())),
            EventTime::Plain(_) => None,
            EventTime::Log(l) if l.is_zero() => None,
            EventTime::Log(l) => Some(TowerValue::from_f64(l.log)),
            EventTime::Anchored { factor, .. } if factor <= 0.0 => None,
            EventTime::Anchored { anchor, factor } => Some(anchor.ln()?.add_const(factor.ln())),
        }
    }

    /// `ln t` as a plain real; `-inf` at zero, `inf` past the f64 range.
    pub fn ln_f64(&self) -> f64 {
        match *self {
            EventTime::Plain(x) => x.ln(),
            EventTime::Log(l) => l.log,
            EventTime::Anchored { .. } => match self.ln() {
                Some(l) => l.to_f64(),
                None => f64::NEG_INFINITY,
            },
        }
    }

    /// `ln ln t` as a tower; `None` unless `t > 1`.
    pub fn ln_ln(&self) -> Option<TowerValue> {
        let l = self.ln()?;
        if l <= TowerValue::ZERO {
            return None;
        }
        l.ln()
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            EventTime::Plain(x) => x,
            EventTime::Log(l) => l.to_f64(),
            EventTime::Anchored { anchor, factor } => anchor.to_f64() * factor,
        }
    }

    fn same_anchor(&self, other: &EventTime) -> Option<(f64, f64, TowerValue)> {
        match (*self, *other) {
            (EventTime::Anchored { anchor: a, factor: f }, EventTime::Anchored { anchor: b, factor: g }) if a == b => {
                Some((f, g, a))
            }
            _ => None,
        }
    }

    pub fn cmp_time(&self, other: &EventTime) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        if let Some((f, g, _)) = self.same_anchor(other) {
            return f.total_cmp(&g);
        }
        match (*self, *other) {
            (EventTime::Plain(x), EventTime::Plain(y)) => x.total_cmp(&y),
            (EventTime::Log(x), EventTime::Log(y)) => x.log.total_cmp(&y.log),
            _ => self.ln().unwrap().cmp(&other.ln().unwrap()),
        }
    }

    /// `self / other` as a plain real (saturating to 0 or inf).
    pub fn ratio(&self, other: &EventTime) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if other.is_zero() {
            return f64::INFINITY;
        }
        if let Some((f, g, _)) = self.same_anchor(other) {
            return f / g;
        }
        if let (EventTime::Plain(x), EventTime::Plain(y)) = (*self, *other) {
            return x / y;
        }
        let (a, b) = (self.ln_f64(), other.ln_f64());
        if a.is_finite() && b.is_finite() {
            return (a - b).exp();
        }
        match self.cmp_time(other) {
            Ordering::Less => 0.0,
            Ordering::Equal => 1.0,
            Ordering::Greater => f64::INFINITY,
        }
    }

    /// `ln ln self − ln ln other` for times above 1, keeping precision when
    /// both share an anchor (the gap is then far below f64 resolution of
    /// either double log).
    pub fn ln_ln_gap(&self, other: &EventTime) -> Option<f64> {
        if let Some((f, g, anchor)) = self.same_anchor(other) {
            let big_l = anchor.ln()?.to_f64();
            let lo = big_l + g.ln();
            if !lo.is_finite() {
                return Some(if f > g { 0.0 } else { -0.0 });
            }
            return Some(((f / g).ln() / lo).ln_1p());
        }
        let (a, b) = (self.ln_f64(), other.ln_f64());
        if a.is_finite() && b.is_finite() {
            return Some(((a - b) / b).ln_1p());
        }
        let (x, y) = (self.ln_ln()?, other.ln_ln()?);
        let d = x.abs_diff(&y).to_f64();
        Some(if x >= y { d } else { -d })
    }
}
