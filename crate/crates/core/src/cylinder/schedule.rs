use serde::{Deserialize, Serialize};

use super::smooth::step;

/// Sink target `h(η)`: `theta_l` above `η = 0`, then plateaus alternating
/// `theta_l, theta_r, …` on blocks `ξ ∈ [n−1, n]`, `ξ = √(−η)`. Block `n ≥ 2`
/// opens with a unit-`η` transition from the previous plateau value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentSchedule {
    pub theta_l: f64,
    pub theta_r: f64,
}

impl DescentSchedule {
    /// Plateau value of block `n ≥ 1` (odd blocks left).
    pub fn plateau(&self, n: u64) -> f64 {
        if n % 2 == 1 {
            self.theta_l
        } else {
            self.theta_r
        }
    }

    /// `h` as a function of the descent depth `s = −η`.
    pub fn at_depth(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return self.theta_l;
        }
        let n = block_of_depth(s);
        let start = ((n - 1) * (n - 1)) as f64;
        let u = s - start;
        if n >= 2 && u < 1.0 {
            let (from, to) = (self.plateau(n - 1), self.plateau(n));
            from + (to - from) * step(u)
        } else {
            self.plateau(n)
        }
    }

    /// Transition `[start, end]` in depth `s` for block `n ≥ 2`.
    pub fn transition(n: u64) -> (f64, f64) {
        let a = ((n - 1) * (n - 1)) as f64;
        (a, a + 1.0)
    }

    /// Transition boundaries strictly inside `(s0, s1)`, in order.
    pub fn breakpoints(s0: f64, s1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let first = (s0.max(0.0).sqrt().floor() as u64).max(1);
        let mut n = first + 1;
        loop {
            let (a, b) = Self::transition(n);
            if a >= s1 {
                break;
            }
            for x in [a, b] {
                if x > s0 && x < s1 {
                    out.push(x);
                }
            }
            n += 1;
        }
        out
    }

    pub fn in_transition(s: f64) -> bool {
        if s <= 1.0 {
            return false;
        }
        let n = block_of_depth(s);
        n >= 2 && s - (((n - 1) * (n - 1)) as f64) < 1.0
    }
}

/// Block index `n` with `ξ = √s ∈ [n−1, n)`; depth 0 is in block 1.
pub fn block_of_depth(s: f64) -> u64 {
    let mut n = s.max(0.0).sqrt().floor() as u64 + 1;
    // guard sqrt rounding at perfect squares
    while ((n - 1) * (n - 1)) as f64 > s {
        n -= 1;
    }
    while (n * n) as f64 <= s {
        n += 1;
    }
    n
}

/// `h(η)`.
pub fn h_eval(eta: f64, s: &DescentSchedule) -> f64 {
    if eta >= 0.0 {
        s.theta_l
    } else {
        s.at_depth(-eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sch() -> DescentSchedule {
        DescentSchedule { theta_l: -PI / 3.0, theta_r: PI / 3.0 }
    }

    #[test]
    fn plateaus_and_transitions() {
        let s = sch();
        assert_eq!(h_eval(0.5, &s), s.theta_l);
        assert_eq!(h_eval(-0.5, &s), s.theta_l);
        // block 2 transition spans depth [1, 2]; midpoint mixes by step(1/2) = 1/2
        assert!((h_eval(-1.5, &s) - 0.0).abs() < 1e-15);
        assert_eq!(h_eval(-3.0, &s), s.theta_r);
        // ξ = 2.5 is block 3 past its transition [4, 5]
        assert_eq!(h_eval(-6.25, &s), s.theta_l);
        let mut prev = h_eval(-1.0, &s);
        for i in 1..=100 {
            let v = h_eval(-(1.0 + i as f64 / 100.0), &s);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn blocks() {
        assert_eq!(block_of_depth(0.0), 1);
        assert_eq!(block_of_depth(0.99), 1);
        assert_eq!(block_of_depth(1.0), 2);
        assert_eq!(block_of_depth(4.0), 3);
        assert_eq!(block_of_depth(3.99), 2);
        assert_eq!(DescentSchedule::breakpoints(0.0, 10.0), vec![1.0, 2.0, 4.0, 5.0, 9.0]);
        assert!(DescentSchedule::in_transition(4.5) && !DescentSchedule::in_transition(5.5));
    }
}
