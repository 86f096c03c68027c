use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Past this log-gap the smaller term no longer changes the larger one in f64.
const ABSORB_GAP: f64 = 745.0;

/// A non-negative quantity stored as its natural logarithm.
///
/// Zero is `log = -inf`. Products are sums of logs; sums use log-sum-exp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log: f64,
}

// add/sub saturate below the float floor, so they stay inherent methods.
#[allow(clippy::should_implement_trait)]
impl LogValue {
    pub const ZERO: LogValue = LogValue { log: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { log: 0.0 };

    pub fn from_log(log: f64) -> Self {
        LogValue { log }
    }

    /// Panics in debug builds on negative input; NaN propagates.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(!(x < 0.0), "LogValue of negative {x}");
        LogValue { log: x.ln() }
    }

    pub fn ln(self) -> f64 {
        self.log
    }

    /// The plain value, `inf` once it leaves the f64 range.
    pub fn to_f64(self) -> f64 {
        self.log.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        LogValue { log: self.log + other.log }
    }

    pub fn div(self, other: LogValue) -> LogValue {
        LogValue { log: self.log - other.log }
    }

    pub fn powf(self, p: f64) -> LogValue {
        if self.is_zero() {
            return if p > 0.0 { LogValue::ZERO } else { LogValue::ONE };
        }
        LogValue { log: self.log * p }
    }

    /// Stable `x + y`.
    pub fn add(self, other: LogValue) -> LogValue {
        let (hi, lo) = if self.log >= other.log { (self, other) } else { (other, self) };
        if lo.is_zero() || hi.log - lo.log > ABSORB_GAP {
            return hi;
        }
        LogValue { log: hi.log + (lo.log - hi.log).exp().ln_1p() }
    }

    /// `x - y` for `x >= y`; returns zero when they coincide.
    pub fn sub(self, other: LogValue) -> LogValue {
        debug_assert!(self.log >= other.log, "LogValue subtraction would go negative");
        if other.is_zero() || self.log - other.log > ABSORB_GAP {
            return self;
        }
        let d = other.log - self.log;
        if d >= 0.0 {
            return LogValue::ZERO;
        }
        LogValue { log: self.log + (-d.exp_m1()).ln() }
    }

    /// `x + c` for a plain real `c`; the result must stay non-negative.
    pub fn add_f64(self, c: f64) -> LogValue {
        if c >= 0.0 {
            self.add(LogValue::from_f64(c))
        } else {
            self.sub(LogValue::from_f64(-c))
        }
    }

    /// `self / other` as a plain real.
    pub fn ratio(self, other: LogValue) -> f64 {
        (self.log - other.log).exp()
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log.partial_cmp(&other.log)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.log)
    }
}

/// `ln(sum exp(l_i))` over a slice, stable for any spread of magnitudes.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}
