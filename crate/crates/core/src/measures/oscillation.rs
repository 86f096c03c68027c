use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::smooth::wrap;
use crate::cylinder::OrbitSample;
use crate::error::{LabError, Result};

/// Angular band `|θ − center| < eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripRegion {
    pub center: f64,
    pub eps: f64,
}

impl StripRegion {
    pub fn contains(&self, theta: f64) -> bool {
        wrap(theta - self.center).abs() < self.eps
    }
}

/// Share of an ensemble inside `U_L` and `U_R` at common elapsed times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOccupancy {
    pub size: usize,
    pub times: Vec<f64>,
    /// Depth of the first orbit at each time.
    pub xi: Vec<f64>,
    pub in_l: Vec<f64>,
    pub in_r: Vec<f64>,
}

/// Pushforward proxy: each orbit is read at `t` elapsed from its own seed.
pub fn ensemble_occupancy(
    orbits: &[OrbitSample],
    u_l: StripRegion,
    u_r: StripRegion,
    times: &[f64],
) -> Result<EnsembleOccupancy> {
    if orbits.is_empty() {
        return Err(LabError::Domain("empty ensemble".into()));
    }
    let rows: Vec<Vec<(f64, u8)>> = orbits
        .par_iter()
        .map(|o| {
            let prof = o.flow.profile;
            times
                .iter()
                .map(|&t| {
                    let xi = prof.xi_after(o.xi0(), t);
                    let th = o.theta_at(xi.min(o.xi_end()))?;
                    if xi > o.xi_end() * (1.0 + 1e-12) {
                        return Err(LabError::Range(format!("time {t} beyond an orbit's range")));
                    }
                    Ok((xi, u8::from(u_l.contains(th)) | (u8::from(u_r.contains(th)) << 1)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = orbits.len() as f64;
    let share = |bit: u8, i: usize| rows.iter().filter(|r| r[i].1 & bit != 0).count() as f64 / n;
    Ok(EnsembleOccupancy {
        size: orbits.len(),
        times: times.to_vec(),
        xi: rows[0].iter().map(|r| r.0).collect(),
        in_l: (0..times.len()).map(|i| share(1, i)).collect(),
        in_r: (0..times.len()).map(|i| share(2, i)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Oscillation {
    /// Peak times of the runs above `1 − δ`, interleaved `L, R, L, …` or `R, L, …`.
    Found {
        l_times: Vec<f64>,
        r_times: Vec<f64>,
        l_xi: Vec<f64>,
        r_xi: Vec<f64>,
    },
    Refused {
        reason: String,
    },
}

fn peaks(occ: &[f64], level: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < occ.len() {
        if occ[i] > level {
            let mut best = i;
            while i < occ.len() && occ[i] > level {
                if occ[i] > occ[best] {
                    best = i;
                }
                i += 1;
            }
            out.push(best);
        } else {
            i += 1;
        }
    }
    out
}

/// Finds moments where the ensemble sits in `U_L` (resp. `U_R`) with share above `1 − δ`.
pub fn oscillation_detect(occ: &EnsembleOccupancy, delta: f64) -> Oscillation {
    let refuse = |r: String| Oscillation::Refused { reason: r };
    if occ.size < 100 {
        return refuse(format!("ensemble of {} below 100", occ.size));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return refuse(format!("delta {delta} outside (0, 0.5)"));
    }
    let (l, r) = (peaks(&occ.in_l, 1.0 - delta), peaks(&occ.in_r, 1.0 - delta));
    if l.is_empty() || r.is_empty() {
        return refuse(format!("occupancy above {} reached by L {} times, R {} times", 1.0 - delta, l.len(), r.len()));
    }
    let mut merged: Vec<(usize, bool)> = l.iter().map(|&i| (i, true)).chain(r.iter().map(|&i| (i, false))).collect();
    merged.sort_unstable();
    if merged.windows(2).any(|w| w[0].1 == w[1].1) {
        return refuse("L and R moments do not interleave".into());
    }
    Oscillation::Found {
        l_times: l.iter().map(|&i| occ.times[i]).collect(),
        r_times: r.iter().map(|&i| occ.times[i]).collect(),
        l_xi: l.iter().map(|&i| occ.xi[i]).collect(),
        r_xi: r.iter().map(|&i| occ.xi[i]).collect(),
    }
}
