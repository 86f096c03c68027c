use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::smooth::{step, wrap};

/// North-south circle fields `w_α`, one sink per `α ∈ arc_I`, shared source at `theta_north`.
///
/// Outside the northern arc `N = {|θ − θ_north| < δ_N}` the field is
/// `−slope·wrap(θ − α)`. Inside `N` it is blended into `slope·wrap(θ − θ_north)`
/// over the outer `blend_width` of the arc; on the inner core only the source
/// term is left, which also hides the wrap jump at the antipode of `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleFieldFamily {
    pub theta_north: f64,
    /// Claimed uniform contraction outside `N`.
    pub kappa: f64,
    /// Actual slope of the sink branch.
    pub slope: f64,
    pub delta_n: f64,
    /// Sink parameter arc `[lo, hi]`, measured from the south point `θ_north − π`.
    pub arc_i: (f64, f64),
    pub blend_width: f64,
}

impl CircleFieldFamily {
    /// Family with `slope = 2κ`.
    pub fn new(theta_north: f64, kappa: f64, delta_n: f64, arc_i: (f64, f64), blend_width: f64) -> Result<Self> {
        let f = CircleFieldFamily { theta_north, kappa, slope: 2.0 * kappa, delta_n, arc_i, blend_width };
        f.validate_shape()?;
        Ok(f)
    }

    pub fn south(&self) -> f64 {
        wrap(self.theta_north - PI)
    }

    fn validate_shape(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Invariant(m));
        if !(self.kappa > 0.0 && self.slope > 0.0) {
            return bad("kappa and slope must be positive".into());
        }
        if !(self.delta_n > 0.0 && self.delta_n < PI) {
            return bad(format!("delta_N = {} outside (0, π)", self.delta_n));
        }
        if !(self.blend_width > 0.0 && self.blend_width < self.delta_n) {
            return bad(format!("blend width {} must lie in (0, δ_N)", self.blend_width));
        }
        let (lo, hi) = self.arc_i;
        if !(lo <= hi) {
            return bad("arc_I endpoints out of order".into());
        }
        // arc_I must miss closure(N) and its antipodes must sit in the core of N
        let outside_n = PI - self.delta_n;
        let core = self.delta_n - self.blend_width;
        for u in [lo, hi] {
            if u.abs() >= outside_n {
                return bad(format!("arc_I reaches the northern arc N (|u| = {} ≥ {outside_n})", u.abs()));
            }
            if u.abs() >= core {
                return bad(format!("antipode of arc_I endpoint {u} falls outside the core of N (half-width {core})"));
            }
        }
        Ok(())
    }

    /// Angle relative to the south point.
    fn rel(&self, theta: f64) -> f64 {
        wrap(theta - self.south())
    }

    pub fn in_arc(&self, alpha: f64) -> bool {
        let u = self.rel(alpha);
        u >= self.arc_i.0 - 1e-12 && u <= self.arc_i.1 + 1e-12
    }

    pub fn in_north(&self, theta: f64) -> bool {
        wrap(theta - self.theta_north).abs() < self.delta_n
    }

    /// `w_α(θ)` without the arc check (hot path).
    pub(crate) fn w(&self, alpha: f64, theta: f64) -> f64 {
        let v = wrap(theta - self.theta_north);
        let sink = -self.slope * wrap(theta - alpha);
        let d = v.abs();
        if d >= self.delta_n {
            return sink;
        }
        let source = self.slope * v;
        let core = self.delta_n - self.blend_width;
        if d <= core {
            return source;
        }
        let beta = 1.0 - step((d - core) / self.blend_width);
        (1.0 - beta) * sink + beta * source
    }
}

/// Angular velocity of `w_α` at `θ`.
pub fn w_eval(alpha: f64, theta: f64, f: &CircleFieldFamily) -> Result<f64> {
    if !f.in_arc(alpha) {
        let s = f.south();
        return Err(LabError::OutOfArc { value: alpha, lo: s + f.arc_i.0, hi: s + f.arc_i.1 });
    }
    Ok(f.w(alpha, theta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyViolation {
    /// Numbered property (1 north-south, 4 uniform contraction).
    pub property: u8,
    pub alpha: f64,
    pub theta: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub grid: usize,
    pub alphas: usize,
    pub violations: Vec<FamilyViolation>,
}

impl FamilyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Grid check of the north-south and contraction properties for 20 sinks.
pub fn family_validate(f: &CircleFieldFamily, grid: usize) -> Result<FamilyReport> {
    if grid < 1000 {
        return Err(LabError::Domain(format!("grid {grid} below 1000")));
    }
    const N_ALPHA: usize = 20;
    let s = f.south();
    let (lo, hi) = f.arc_i;
    let fd = |a: f64, th: f64| {
        let h = 1e-6;
        (f.w(a, th + h) - f.w(a, th - h)) / (2.0 * h)
    };
    let mut violations = Vec::new();
    for i in 0..N_ALPHA {
        let alpha = s + lo + (hi - lo) * i as f64 / (N_ALPHA - 1) as f64;
        // half-cell phase keeps grid points off the two zeros
        let thetas: Vec<f64> = (0..grid).map(|j| 2.0 * PI * (j as f64 + 0.5) / grid as f64 - PI).collect();
        let mut worst: Option<(f64, f64)> = None;
        for &th in &thetas {
            if wrap(th - f.theta_north).abs() >= f.delta_n {
                let d = fd(alpha, th);
                if d >= -f.kappa && worst.is_none_or(|(_, v)| d > v) {
                    worst = Some((th, d));
                }
            }
        }
        if let Some((theta, value)) = worst {
            violations.push(FamilyViolation { property: 4, alpha, theta, value });
        }
        let vals: Vec<f64> = thetas.iter().map(|&th| f.w(alpha, th)).collect();
        let changes = (0..grid).filter(|&j| (vals[j] > 0.0) != (vals[(j + 1) % grid] > 0.0)).count();
        if changes != 2 {
            violations.push(FamilyViolation { property: 1, alpha, theta: f64::NAN, value: changes as f64 });
        }
        let src = fd(alpha, f.theta_north);
        if !(src > 0.0) {
            violations.push(FamilyViolation { property: 1, alpha, theta: f.theta_north, value: src });
        }
        let sink = fd(alpha, alpha);
        if !(sink < 0.0) {
            violations.push(FamilyViolation { property: 1, alpha, theta: alpha, value: sink });
        }
    }
    Ok(FamilyReport { grid, alphas: N_ALPHA, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CircleFieldFamily {
        CircleFieldFamily::new(PI, 1.0, 0.5, (-0.3, 0.3), 0.15).unwrap()
    }

    #[test]
    fn zeros_and_linear_branch() {
        let f = small();
        let a = 0.2;
        assert_eq!(w_eval(a, a, &f).unwrap(), 0.0);
        assert!(w_eval(a, PI, &f).unwrap().abs() < 1e-15);
        assert!((w_eval(a, a + 0.1, &f).unwrap() + 0.2).abs() < 1e-12);
        assert!(w_eval(1.0, 0.0, &f).is_err());
    }

    #[test]
    fn validate_passes_and_fails() {
        let f = small();
        assert!(family_validate(&f, 4000).unwrap().ok());
        let mut g = f;
        g.kappa = 10.0 * g.slope;
        let r = family_validate(&g, 4000).unwrap();
        assert!(r.violations.iter().any(|v| v.property == 4));
        assert!(family_validate(&f, 10).is_err());
    }

    #[test]
    fn arc_overlapping_n_rejected() {
        assert!(CircleFieldFamily::new(PI, 1.0, 0.5, (-0.3, 2.8), 0.15).is_err());
        // antipodes must land in the core of N
        assert!(CircleFieldFamily::new(PI, 1.0, 0.6, (-PI / 3.0, PI / 3.0), 0.1).is_err());
        assert!(CircleFieldFamily::new(PI, 1.0, 1.5, (-PI / 3.0, PI / 3.0), 0.4).is_ok());
    }
}
