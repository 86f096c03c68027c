use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

use super::family::CircleFieldFamily;
use super::profile::VerticalProfile;
use super::schedule::DescentSchedule;

/// Field family, schedule and profile together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderFlow {
    pub family: CircleFieldFamily,
    pub schedule: DescentSchedule,
    pub profile: VerticalProfile,
}

impl CylinderFlow {
    /// North at π, sinks at ∓π/3, κ = 1, δ_N = 1.5, blend width 0.4.
    pub fn default_geometry() -> CylinderFlow {
        let third = PI / 3.0;
        CylinderFlow {
            family: CircleFieldFamily::new(PI, 1.0, 1.5, (-third, third), 0.4).expect("default family"),
            schedule: DescentSchedule { theta_l: -third, theta_r: third },
            profile: VerticalProfile::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for th in [self.schedule.theta_l, self.schedule.theta_r] {
            if !self.family.in_arc(th) {
                let s = self.family.south();
                return Err(LabError::OutOfArc { value: th, lo: s + self.family.arc_i.0, hi: s + self.family.arc_i.1 });
            }
        }
        Ok(())
    }

    /// `dθ/ds` at depth `s = −η`.
    pub fn slope(&self, s: f64, theta: f64) -> f64 {
        self.family.w(self.schedule.at_depth(s), theta)
    }
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// One DOPRI5 step; returns the 5th-order solution and the error estimate.
pub(crate) fn dopri_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    for i in 0..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            for d in 0..N {
                yi[d] += h * A[i][j] * kj[d];
            }
        }
        k[i] = f(x + C[i] * h, &yi);
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for i in 0..7 {
        for d in 0..N {
            y5[d] += h * B[i] * k[i][d];
            err[d] += h * E[i] * k[i][d];
        }
    }
    (y5, err)
}

fn err_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], tol: f64) -> f64 {
    let mut m: f64 = 0.0;
    for d in 0..N {
        let sc = tol * (1.0 + y0[d].abs().max(y1[d].abs()));
        m = m.max((err[d] / sc).abs());
    }
    m
}

/// Adaptive integration over `[x0, x1]` without crossing `stops`; each
/// accepted step is reported through `on_step(x, y, h)` (state at its start).
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_adaptive<const N: usize, F, S, G>(
    f: &F,
    x0: f64,
    y0: [f64; N],
    x1: f64,
    stops: &[f64],
    tol: f64,
    h_cap: S,
    mut on_step: G,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(f64, f64) -> f64,
    G: FnMut(f64, &[f64; N], f64),
{
    let mut x = x0;
    let mut y = y0;
    let mut bounds: Vec<f64> = stops.iter().copied().filter(|&s| s > x0 && s < x1).collect();
    bounds.push(x1);
    let mut h = 1e-3_f64.min(x1 - x0);
    for &b in &bounds {
        while x < b {
            let cap = h_cap(x, b);
            let hh = h.min(cap).min(b - x);
            let (yn, e) = dopri_step(f, x, &y, hh);
            let en = err_norm(&y, &yn, &e, tol);
            if en <= 1.0 {
                on_step(x, &y, hh);
                let xn = x + hh;
                x = if b - xn <= 1e-14 * b.abs().max(1.0) { b } else { xn };
                y = yn;
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                h = hh * fac;
            } else {
                h = hh * (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h < 1e-13 * x.abs().max(1.0) {
                return Err(LabError::StepFailure { xi: x.abs().sqrt() });
            }
        }
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    /// Depth `s = −η = ξ²`.
    pub s: f64,
    pub xi: f64,
    /// Unwrapped angle.
    pub theta: f64,
}

/// Accepted integrator steps of one orbit, from `ξ0` to `ξ_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub flow: CylinderFlow,
    pub seed: (f64, f64),
    pub tol: f64,
    pub points: Vec<OrbitPoint>,
}

const TRANSITION_STEP: f64 = 0.05;

impl OrbitSample {
    pub fn xi0(&self) -> f64 {
        self.points[0].xi
    }

    pub fn xi_end(&self) -> f64 {
        self.points.last().unwrap().xi
    }

    /// θ at depth `s` inside step `k` by re-stepping from its start.
    pub(crate) fn theta_in_step(&self, k: usize, s: f64) -> f64 {
        let p = self.points[k];
        let h = s - p.s;
        if h <= 0.0 {
            return p.theta;
        }
        let flow = self.flow;
        let f = move |x: f64, y: &[f64; 1]| [flow.slope(x, y[0])];
        dopri_step(&f, p.s, &[p.theta], h).0[0]
    }

    /// Index of the step containing depth `s`.
    pub(crate) fn step_index(&self, s: f64) -> usize {
        let i = self.points.partition_point(|p| p.s <= s);
        i.saturating_sub(1).min(self.points.len().saturating_sub(2))
    }

    /// θ at depth `ξ`.
    pub fn theta_at(&self, xi: f64) -> Result<f64> {
        if xi < self.xi0() || xi > self.xi_end() * (1.0 + 1e-15) {
            return Err(LabError::Range(format!("ξ = {xi} outside [{}, {}]", self.xi0(), self.xi_end())));
        }
        let s = xi * xi;
        Ok(self.theta_in_step(self.step_index(s), s))
    }

    /// `(xi, theta, t)` rows, `t` elapsed since the seed.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        use crate::fmtnum::g12;
        writeln!(w, "xi,theta,t")?;
        let x0 = self.xi0();
        for p in &self.points {
            writeln!(w, "{},{},{}", g12(p.xi), g12(p.theta), g12(self.flow.profile.elapsed(x0, p.xi)))?;
        }
        Ok(())
    }
}

/// Orbit of `(θ0, ξ0)` in the geometric form `dθ/ds = w_{h(−s)}(θ)`.
pub fn integrate_orbit(theta0: f64, xi0: f64, xi_end: f64, flow: &CylinderFlow, tol: f64) -> Result<OrbitSample> {
    if !(xi0 >= 0.0 && xi_end > xi0) {
        return Err(LabError::Domain(format!("need 0 ≤ ξ0 < ξ_end, got {xi0}, {xi_end}")));
    }
    if !(tol > 0.0) {
        return Err(LabError::Domain("tolerance must be positive".into()));
    }
    flow.validate()?;
    let (s0, s1) = (xi0 * xi0, xi_end * xi_end);
    let fl = *flow;
    let f = move |x: f64, y: &[f64; 1]| [fl.slope(x, y[0])];
    let stops = DescentSchedule::breakpoints(s0, s1);
    let cap = |x: f64, b: f64| {
        if DescentSchedule::in_transition(x) {
            TRANSITION_STEP
        } else {
            b - x
        }
    };
    let mut points = Vec::new();
    let last = integrate_adaptive(&f, s0, [theta0], s1, &stops, tol, cap, |x, y, _| {
        points.push(OrbitPoint { s: x, xi: x.sqrt(), theta: y[0] });
    })?;
    points.push(OrbitPoint { s: s1, xi: xi_end, theta: last[0] });
    Ok(OrbitSample { flow: *flow, seed: (theta0, xi0), tol, points })
}

/// Integrates the full field `ρ(η)·(w_{h(η)} ∂_θ − ∂_η)` in time and reports
/// `(ξ, θ)` at the requested elapsed times (ascending).
pub fn integrate_full_field(
    theta0: f64,
    xi0: f64,
    times: &[f64],
    flow: &CylinderFlow,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[0] > w[1]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(LabError::Domain("sample times must be ascending and non-negative".into()));
    }
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    let fl = *flow;
    let pr = flow.profile;
    let f = move |_t: f64, y: &[f64; 2]| {
        let rho = fl.profile.rho(y[1]);
        [rho * fl.family.w(fl.schedule.at_depth(-y[1]), y[0]), -rho]
    };
    let xi_end = pr.xi_after(xi0, t_end);
    let to_time = |s: f64| pr.elapsed(xi0, s.sqrt());
    let mut windows = Vec::new();
    let mut stops: Vec<f64> =
        DescentSchedule::breakpoints(xi0 * xi0, xi_end * xi_end).into_iter().map(to_time).collect();
    let mut n = (xi0.floor() as u64).max(1) + 1;
    loop {
        let (a, b) = DescentSchedule::transition(n);
        if a > xi_end * xi_end {
            break;
        }
        windows.push((to_time(a.max(xi0 * xi0)), to_time(b)));
        n += 1;
    }
    stops.extend(times.iter().copied());
    stops.sort_by(f64::total_cmp);
    let cap = |t: f64, _b: f64| {
        windows.iter().find(|(a, b)| t >= *a && t < *b).map_or(f64::INFINITY, |(a, b)| (b - a) / 20.0)
    };
    let mut out = Vec::with_capacity(times.len());
    let mut y = [theta0, -xi0 * xi0];
    let mut t = 0.0;
    for &tt in times {
        if tt > t {
            let inner: Vec<f64> = stops.iter().copied().filter(|&s| s > t && s < tt).collect();
            y = integrate_adaptive(&f, t, y, tt, &inner, tol, cap, |_, _, _| {})?;
            t = tt;
        }
        out.push(((-y[1]).max(0.0).sqrt(), y[0]));
    }
    Ok(out)
}

/// Largest disagreement between the time-parametrized full field and the
/// geometric orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoIndependence {
    pub tol: f64,
    /// Relative error of ξ against the closed-form descent.
    pub max_xi_err: f64,
    pub max_theta_err: f64,
}

impl RhoIndependence {
    pub fn within(&self, factor: f64) -> bool {
        self.max_xi_err <= factor * self.tol && self.max_theta_err <= factor * self.tol
    }
}

/// Integrates the same seed with the true `ρ` (in time) and with `ρ ≡ 1`
/// (in depth) and compares `(ξ, θ)` at `samples` evenly spaced depths.
pub fn rho_independence(
    theta0: f64,
    xi0: f64,
    xi_end: f64,
    flow: &CylinderFlow,
    tol: f64,
    samples: usize,
) -> Result<RhoIndependence> {
    if samples == 0 {
        return Err(LabError::Domain("need at least one sample".into()));
    }
    let geo = integrate_orbit(theta0, xi0, xi_end, flow, tol)?;
    let xis: Vec<f64> = (1..=samples).map(|i| xi0 + (xi_end - xi0) * i as f64 / samples as f64).collect();
    let times: Vec<f64> = xis.iter().map(|&x| flow.profile.elapsed(xi0, x)).collect();
    let full = integrate_full_field(theta0, xi0, &times, flow, tol)?;
    let mut r = RhoIndependence { tol, max_xi_err: 0.0, max_theta_err: 0.0 };
    for (&want, &(xi, th)) in xis.iter().zip(&full) {
        r.max_xi_err = r.max_xi_err.max((xi - want).abs() / want.max(1.0));
        let g = geo.theta_at(xi.clamp(geo.xi0(), geo.xi_end()))?;
        r.max_theta_err = r.max_theta_err.max((th - g).abs());
    }
    Ok(r)
}
