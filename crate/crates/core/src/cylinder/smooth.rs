//! Flat-ended smooth building blocks.

use std::f64::consts::PI;

/// `e^{-1/s}` for `s > 0`, else 0.
fn flat(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn flat_d(s: f64) -> f64 {
    if s > 0.0 {
        flat(s) / (s * s)
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `s ≤ 0`, 1 for `s ≥ 1`, all derivatives
/// vanishing at both ends. The primitive of a bump supported on `[0, 1]`.
pub fn step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let (a, b) = (flat(s), flat(1.0 - s));
    a / (a + b)
}

/// Derivative of [`step`], the bump itself.
pub fn step_d(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let (a, b) = (flat(s), flat(1.0 - s));
    let (da, db) = (flat_d(s), flat_d(1.0 - s));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Angle to `(-π, π]`.
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_shape() {
        assert_eq!(step(0.0), 0.0);
        assert_eq!(step(1.0), 1.0);
        assert!((step(0.5) - 0.5).abs() < 1e-15);
        assert!(step(1e-3) < 1e-300);
        let h = 1e-6;
        for s in [0.1, 0.3, 0.5, 0.77] {
            let fd = (step(s + h) - step(s - h)) / (2.0 * h);
            assert!((fd - step_d(s)).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(PI), PI);
        assert!((wrap(-PI) - PI).abs() < 1e-15);
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap(0.25), 0.25);
    }
}
