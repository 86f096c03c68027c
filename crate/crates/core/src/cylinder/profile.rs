use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::smooth::{step, step_d};

/// Vertical speed profile. Elapsed time from depth 0 is
/// `t(ξ) = (1 − β)·ξ² + β·(e^{√ξ} − 1)` with `β` a flat step on `[a, b] ⊂ (0, 1)`:
/// `ρ ≡ 1` above `ξ = a`, the closed form `e^{√ξ} − 1` from `ξ = b` on, and
/// `∫₀¹ dξ/σ = t(1) = e − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalProfile {
    pub blend_start: f64,
    pub blend_end: f64,
}

impl Default for VerticalProfile {
    fn default() -> Self {
        VerticalProfile { blend_start: 0.2, blend_end: 0.6 }
    }
}

/// `(σ, ρ, t)` at one depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub sigma: f64,
    pub rho: f64,
    pub t: f64,
}

impl VerticalProfile {
    pub fn new(blend_start: f64, blend_end: f64) -> Result<Self> {
        if !(0.0 < blend_start && blend_start < blend_end && blend_end <= 1.0) {
            return Err(LabError::Domain(format!("blend [{blend_start}, {blend_end}] must sit in (0, 1]")));
        }
        Ok(VerticalProfile { blend_start, blend_end })
    }

    fn beta(&self, xi: f64) -> (f64, f64) {
        let w = self.blend_end - self.blend_start;
        let u = (xi - self.blend_start) / w;
        (step(u), step_d(u) / w)
    }

    /// Elapsed time from depth 0 to depth `ξ`.
    pub fn t(&self, xi: f64) -> f64 {
        if xi <= self.blend_start {
            return xi * xi;
        }
        let g = xi.sqrt().exp_m1();
        if xi >= self.blend_end {
            return g;
        }
        let (b, _) = self.beta(xi);
        (1.0 - b) * xi * xi + b * g
    }

    /// `dt/dξ = 1/σ`.
    pub fn dt_dxi(&self, xi: f64) -> f64 {
        let gp = |x: f64| x.sqrt().exp() / (2.0 * x.sqrt());
        if xi <= self.blend_start {
            return 2.0 * xi;
        }
        if xi >= self.blend_end {
            return gp(xi);
        }
        let (b, db) = self.beta(xi);
        let g = xi.sqrt().exp_m1();
        (1.0 - b) * 2.0 * xi + b * gp(xi) + db * (g - xi * xi)
    }

    /// `ρ(η)` for `η ≤ 0`: `−dη/dt = 2ξ·σ(ξ)`; `ρ ≡ 1` for `η ≥ 0`.
    pub fn rho(&self, eta: f64) -> f64 {
        if eta >= 0.0 {
            return 1.0;
        }
        let xi = (-eta).sqrt();
        if xi <= self.blend_start {
            return 1.0;
        }
        2.0 * xi / self.dt_dxi(xi)
    }

    /// `t(b) − t(a)` without cancellation deep in the closed-form range.
    pub fn elapsed(&self, a: f64, b: f64) -> f64 {
        if a >= self.blend_end && b >= self.blend_end {
            let (ra, rb) = (a.sqrt(), b.sqrt());
            return ra.exp() * (rb - ra).exp_m1();
        }
        self.t(b) - self.t(a)
    }

    /// Depth reached after time `t` from depth 0.
    pub fn xi_at_time(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t <= self.blend_start * self.blend_start {
            return t.sqrt();
        }
        if t >= self.t(self.blend_end) {
            let l = t.ln_1p();
            return l * l;
        }
        let (mut lo, mut hi) = (self.blend_start, self.blend_end);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.t(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Depth reached after `elapsed` time from depth `xi0`.
    pub fn xi_after(&self, xi0: f64, elapsed: f64) -> f64 {
        self.xi_at_time(self.t(xi0) + elapsed)
    }
}

/// `(σ, ρ, t)` at depth `ξ ≥ 0`.
pub fn profile_eval(xi: f64, v: &VerticalProfile) -> Result<ProfilePoint> {
    if !(xi >= 0.0) {
        return Err(LabError::Domain(format!("depth {xi} must be non-negative")));
    }
    Ok(ProfilePoint { sigma: 1.0 / v.dt_dxi(xi), rho: v.rho(-xi * xi), t: v.t(xi) })
}

/// `ρ̃(ζ) = ρ(−1/ζ) = 4ζ^{−3/4}e^{−ζ^{−1/4}}`, the profile near the lower boundary.
pub fn rho_tilde(zeta: f64) -> f64 {
    4.0 * zeta.powf(-0.75) * (-zeta.powf(-0.25)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flatness {
    pub zeta: f64,
    pub value: f64,
    /// `|dᵏρ̃/dζᵏ|` for `k = 1..=order`, central differences with step `ζ/100`.
    pub derivatives: Vec<f64>,
}

/// Finite-difference derivatives of `ρ̃` at `ζ`.
pub fn flatness_check(zeta: f64, order: usize) -> Result<Flatness> {
    if !(zeta > 0.0 && zeta <= 1e-4) {
        return Err(LabError::Domain(format!("ζ = {zeta} outside (0, 1e-4]")));
    }
    if !(1..=4).contains(&order) {
        return Err(LabError::Domain(format!("order {order} outside 1..=4")));
    }
    let h = zeta / 100.0;
    let f = |k: i32| rho_tilde(zeta + k as f64 * h);
    let d = [
        (f(1) - f(-1)) / (2.0 * h),
        (f(1) - 2.0 * f(0) + f(-1)) / (h * h),
        (f(2) - 2.0 * f(1) + 2.0 * f(-1) - f(-2)) / (2.0 * h.powi(3)),
        (f(2) - 4.0 * f(1) + 6.0 * f(0) - 4.0 * f(-1) + f(-2)) / h.powi(4),
    ];
    Ok(Flatness { zeta, value: rho_tilde(zeta), derivatives: d[..order].iter().map(|x| x.abs()).collect() })
}
