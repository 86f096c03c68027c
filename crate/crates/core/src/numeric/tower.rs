use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

/// `exp^(level)(mantissa)`: an iterated exponential.
///
/// Normal form: level 0 holds any real below `e`; for level ≥ 1 the mantissa
/// lies in `[1, e)`. Every value has exactly one normal form, so ordering by
/// `(level, mantissa)` agrees with the order of the denoted reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerValue {
    level: u32,
    mantissa: f64,
}

impl TowerValue {
    pub const ZERO: TowerValue = TowerValue { level: 0, mantissa: 0.0 };

    /// Build and normalize `exp^(level)(mantissa)`.
    pub fn new(level: u32, mantissa: f64) -> Self {
        debug_assert!(!mantissa.is_nan(), "NaN tower mantissa");
        let (mut m, mut r) = (level, mantissa);
        while m > 0 && r < 1.0 {
            r = r.exp();
            m -= 1;
        }
        while r >= E && r.is_finite() {
            r = r.ln();
            m += 1;
        }
        TowerValue { level: m, mantissa: r }
    }

    pub fn from_f64(x: f64) -> Self {
        TowerValue::new(0, x)
    }

    /// The value `e^l`.
    pub fn from_ln(l: f64) -> Self {
        TowerValue::new(1, l)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    /// Plain real, `inf` past the f64 range.
    pub fn to_f64(&self) -> f64 {
        let mut x = self.mantissa;
        for _ in 0..self.level {
            x = x.exp();
            if x.is_infinite() {
                return x;
            }
        }
        x
    }

    pub fn is_finite_f64(&self) -> bool {
        self.to_f64().is_finite()
    }

    pub fn exp(&self) -> TowerValue {
        TowerValue::new(self.level + 1, self.mantissa)
    }

    /// Natural log; `None` for non-positive values.
    pub fn ln(&self) -> Option<TowerValue> {
        if self.level == 0 {
            if self.mantissa > 0.0 {
                Some(TowerValue::from_f64(self.mantissa.ln()))
            } else {
                None
            }
        } else {
            Some(TowerValue::new(self.level - 1, self.mantissa))
        }
    }

    /// `ln` as a plain real (`inf` when even the log is too large).
    pub fn ln_f64(&self) -> f64 {
        match self.ln() {
            Some(l) => l.to_f64(),
            None => f64::NAN,
        }
    }

    /// `self + c`. Beyond the f64 range the constant enters through
    /// `ln(1 + c·e^{-ln v})` one level down and vanishes once that underflows.
    pub fn add_const(&self, c: f64) -> TowerValue {
        if c == 0.0 {
            return *self;
        }
        let x = self.to_f64();
        if x.is_finite() {
            let y = x + c;
            if y.is_finite() {
                return TowerValue::from_f64(y);
            }
        }
        let l = match self.ln() {
            Some(l) => l,
            None => return *self,
        };
        let lf = l.to_f64();
        if !lf.is_finite() {
            return *self;
        }
        let rel = c * (-lf).exp();
        if rel == 0.0 {
            return *self;
        }
        l.add_const(rel.ln_1p()).exp()
    }

    /// `self · k` for positive `self` and `k`.
    pub fn mul_const(&self, k: f64) -> TowerValue {
        debug_assert!(k > 0.0);
        let x = self.to_f64();
        if x.is_finite() && (x * k).is_finite() {
            return TowerValue::from_f64(x * k);
        }
        match self.ln() {
            Some(l) => l.add_const(k.ln()).exp(),
            None => *self,
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &TowerValue) -> TowerValue {
        let (big, small) = match self.cmp(other) {
            Ordering::Less => (other, self),
            Ordering::Equal => return TowerValue::ZERO,
            Ordering::Greater => (self, other),
        };
        let (bf, sf) = (big.to_f64(), small.to_f64());
        if bf.is_finite() {
            return TowerValue::from_f64(bf - sf);
        }
        if sf.is_finite() {
            return big.add_const(-sf);
        }
        // both beyond f64, both positive
        let (lb, ls) = (big.ln().unwrap(), small.ln().unwrap());
        let d = lb.abs_diff(&ls).to_f64();
        if d.is_infinite() {
            return *big;
        }
        lb.add_const((-(-d).exp_m1()).ln()).exp()
    }
}

impl Eq for TowerValue {}

impl Ord for TowerValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level.cmp(&other.level).then_with(|| self.mantissa.total_cmp(&other.mantissa))
    }
}

impl PartialOrd for TowerValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.to_f64();
        if x.is_finite() {
            write!(f, "{x}")
        } else {
            write!(f, "exp^{}({})", self.level, self.mantissa)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_form() {
        let t = TowerValue::from_f64(100.0);
        assert_eq!(t.level(), 2);
        assert!(t.mantissa() >= 1.0 && t.mantissa() < E);
        assert!((t.to_f64() - 100.0).abs() < 1e-12);
        let small = TowerValue::from_f64(-3.5);
        assert_eq!((small.level(), small.mantissa()), (0, -3.5));
        assert_eq!(TowerValue::from_f64(E).level(), 1);
    }

    #[test]
    fn unnormalized_inputs_collapse() {
        // exp(exp(3)) written two ways
        assert_eq!(TowerValue::new(2, 3.0), TowerValue::new(3, 3f64.ln()));
        assert_eq!(TowerValue::new(1, 0.5), TowerValue::from_f64(0.5f64.exp()));
    }

    #[test]
    fn round_trip_to_1e9() {
        for &x in &[0.1, 1.0, 2.0, 3.0, 17.5, 1e3, 12345.678, 1e9] {
            let back = TowerValue::from_f64(x).to_f64();
            assert!(((back - x) / x).abs() < 1e-12, "{x} -> {back}");
        }
    }

    #[test]
    fn add_const_absorbs_at_scale() {
        let t = TowerValue::new(5, 2.0);
        assert_eq!(t.add_const(1e10), t);
        let m = TowerValue::from_ln(800.0);
        let bumped = m.add_const(1.0);
        assert_eq!(bumped, m);
        assert!((TowerValue::from_f64(3.0).add_const(2.5).to_f64() - 5.5).abs() < 1e-14);
    }

    #[test]
    fn mul_const_in_log_domain() {
        let t = TowerValue::from_ln(1000.0);
        let twice = t.mul_const(2.0);
        assert!((twice.ln_f64() - (1000.0 + 2f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn abs_diff_cases() {
        let a = TowerValue::from_f64(10.0);
        let b = TowerValue::from_f64(4.0);
        assert!((a.abs_diff(&b).to_f64() - 6.0).abs() < 1e-13);
        assert_eq!(a.abs_diff(&a), TowerValue::ZERO);
        // e^1000 - e^999 = e^1000 (1 - 1/e)
        let x = TowerValue::from_ln(1000.0);
        let y = TowerValue::from_ln(999.0);
        let d = x.abs_diff(&y).ln_f64();
        assert!((d - (1000.0 + (1.0 - (-1f64).exp()).ln())).abs() < 1e-9);
        // towers far apart
        let big = TowerValue::new(6, 1.5);
        assert_eq!(big.abs_diff(&x), big);
    }

    #[test]
    fn ln_exp_inverse() {
        let t = TowerValue::new(4, 1.7);
        assert_eq!(t.exp().ln().unwrap(), t);
        assert!(TowerValue::from_f64(-1.0).ln().is_none());
    }
}
