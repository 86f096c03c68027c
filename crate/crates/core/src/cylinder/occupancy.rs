use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmtnum::g12;
use crate::partition::Partition;

use super::integrate::OrbitSample;
use super::schedule::DescentSchedule;
use super::smooth::wrap;

pub const STRIP_L: u32 = 0;
pub const STRIP_R: u32 = 1;
pub const STRIP_OUT: u32 = 2;

const BISECT_XI: f64 = 1e-10;
const SUBSAMPLES: usize = 4;

/// Label of angle `theta` against the two strips.
pub fn strip_label(theta: f64, s: &DescentSchedule, eps: f64) -> u32 {
    if wrap(theta - s.theta_l).abs() < eps {
        STRIP_L
    } else if wrap(theta - s.theta_r).abs() < eps {
        STRIP_R
    } else {
        STRIP_OUT
    }
}

fn check_epsilon(orbit: &OrbitSample, eps: f64) -> Result<()> {
    let s = orbit.flow.schedule;
    let fam = orbit.flow.family;
    if !(eps > 0.0) {
        return Err(LabError::StripOverlap(format!("epsilon {eps} must be positive")));
    }
    let half_lr = 0.5 * wrap(s.theta_r - s.theta_l).abs();
    if eps >= half_lr {
        return Err(LabError::StripOverlap(format!("epsilon {eps} ≥ half the l-r distance {half_lr}")));
    }
    for th in [s.theta_l, s.theta_r] {
        let to_n = 0.5 * (wrap(th - fam.theta_north).abs() - fam.delta_n);
        if eps >= to_n {
            return Err(LabError::StripOverlap(format!("epsilon {eps} ≥ half the distance {to_n} from {th} to N")));
        }
    }
    Ok(())
}

/// Maximal `(ξ_a, ξ_b, label)` runs covering the orbit's depth range.
pub fn strip_segments(orbit: &OrbitSample, eps: f64) -> Result<Vec<(f64, f64, u32)>> {
    check_epsilon(orbit, eps)?;
    let sch = orbit.flow.schedule;
    let bounds = [sch.theta_l - eps, sch.theta_l + eps, sch.theta_r - eps, sch.theta_r + eps];
    let mut cuts: Vec<f64> = Vec::new();
    let n = orbit.points.len();
    for k in 0..n - 1 {
        let (sa, sb) = (orbit.points[k].s, orbit.points[k + 1].s);
        // far from every boundary relative to the step's own motion: no crossing
        let (ta, tb) = (orbit.points[k].theta, orbit.points[k + 1].theta);
        let margin = 4.0 * (tb - ta).abs() + 1e-6;
        if bounds.iter().all(|&b| wrap(ta - b).abs() > margin && wrap(tb - b).abs() > margin) {
            continue;
        }
        let grid: Vec<(f64, f64)> = (0..=SUBSAMPLES)
            .map(|i| {
                let s = if i == SUBSAMPLES { sb } else { sa + (sb - sa) * i as f64 / SUBSAMPLES as f64 };
                let th = if i == SUBSAMPLES { orbit.points[k + 1].theta } else { orbit.theta_in_step(k, s) };
                (s, th)
            })
            .collect();
        for w in grid.windows(2) {
            let ((s0, t0), (s1, t1)) = (w[0], w[1]);
            for &b in &bounds {
                let (d0, d1) = (wrap(t0 - b), wrap(t1 - b));
                if (d0 > 0.0) == (d1 > 0.0) || d0.abs() >= 1.5 || d1.abs() >= 1.5 {
                    continue;
                }
                // bisection in s, stopping on ξ resolution
                let (mut lo, mut hi) = (s0, s1);
                while hi.sqrt() - lo.sqrt() > BISECT_XI {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (wrap(orbit.theta_in_step(k, mid) - b) > 0.0) == (d0 > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                cuts.push((0.5 * (lo + hi)).sqrt());
            }
        }
    }
    let (x0, x1) = (orbit.xi0(), orbit.xi_end());
    cuts.push(x0);
    cuts.push(x1);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out: Vec<(f64, f64, u32)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let th = orbit.theta_at(mid.clamp(x0, x1))?;
        let l = strip_label(th, &sch, eps);
        match out.last_mut() {
            Some(last) if last.2 == l => last.1 = b,
            _ => out.push((a, b, l)),
        }
    }
    Ok(out)
}

/// Time-weighted strip fractions of one orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripOccupancy {
    pub epsilon: f64,
    /// Evaluation depths: block ends inside the range, then `ξ_end`.
    pub xi: Vec<f64>,
    pub chi_l: Vec<f64>,
    pub chi_r: Vec<f64>,
    /// Elapsed time from the seed at each `xi`.
    pub t_grid: Vec<f64>,
    /// Per-block share of time outside the block's target strip.
    pub alpha: Vec<f64>,
    /// Per-block share of time in the opposite strip.
    pub cross: Vec<f64>,
}

impl StripOccupancy {
    pub fn final_chi(&self) -> (f64, f64) {
        (*self.chi_l.last().unwrap(), *self.chi_r.last().unwrap())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "xi,chi_l,chi_r")?;
        for i in 0..self.xi.len() {
            writeln!(w, "{},{},{}", g12(self.xi[i]), g12(self.chi_l[i]), g12(self.chi_r[i]))?;
        }
        Ok(())
    }
}

fn eval_points(x0: f64, x1: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = ((x0.floor() as u64 + 1)..).map(|n| n as f64).take_while(|&n| n < x1).collect();
    xs.push(x1);
    xs
}

/// `χ_l`, `χ_r` at block ends and per-block `α_n`.
pub fn occupancy(orbit: &OrbitSample, eps: f64) -> Result<StripOccupancy> {
    let segs = strip_segments(orbit, eps)?;
    let prof = orbit.flow.profile;
    let sch = orbit.flow.schedule;
    let x0 = orbit.xi0();
    let xs = eval_points(x0, orbit.xi_end());

    // running strip time up to each eval point, and per-block label time
    let mut chi_l = Vec::with_capacity(xs.len());
    let mut chi_r = Vec::with_capacity(xs.len());
    let mut t_grid = Vec::with_capacity(xs.len());
    let mut alpha = Vec::new();
    let mut cross = Vec::new();
    let (mut tl, mut tr) = (0.0, 0.0);
    let mut seg = 0usize;
    let mut prev = x0;
    for &x in &xs {
        let mut block = [0.0f64; 3];
        while seg < segs.len() && segs[seg].0 < x {
            let (a, b, l) = segs[seg];
            let (a, b) = (a.max(prev), b.min(x));
            if b > a {
                block[l as usize] += prof.elapsed(a, b);
            }
            if segs[seg].1 <= x {
                seg += 1;
            } else {
                break;
            }
        }
        tl += block[0];
        tr += block[1];
        let total = prof.elapsed(x0, x);
        t_grid.push(total);
        chi_l.push(if total > 0.0 { tl / total } else { 0.0 });
        chi_r.push(if total > 0.0 { tr / total } else { 0.0 });
        let bt: f64 = block.iter().sum();
        if bt > 0.0 {
            let n = x.ceil().max(1.0) as u64;
            let (target, other) = if sch.plateau(n) == sch.theta_l { (0, 1) } else { (1, 0) };
            alpha.push(1.0 - block[target] / bt);
            cross.push(block[other] / bt);
        }
        prev = x;
    }
    Ok(StripOccupancy { epsilon: eps, xi: xs, chi_l, chi_r, t_grid, alpha, cross })
}

/// Labelled time partition of the whole orbit.
pub fn strip_partition(orbit: &OrbitSample, eps: f64) -> Result<Partition> {
    let t = orbit.flow.profile.elapsed(orbit.xi0(), orbit.xi_end());
    strip_partition_at(orbit, eps, t)
}

/// Labelled partition of `[0, t]`, `t` elapsed from the seed.
pub fn strip_partition_at(orbit: &OrbitSample, eps: f64, t: f64) -> Result<Partition> {
    let prof = orbit.flow.profile;
    let x0 = orbit.xi0();
    let total = prof.elapsed(x0, orbit.xi_end());
    if !(t > 0.0) || t > total * (1.0 + 1e-12) {
        return Err(LabError::Range(format!("horizon {t} outside (0, {total}]")));
    }
    let segs = strip_segments(orbit, eps)?;
    Ok(Partition::from_switches(segs[0].2, segs.iter().skip(1).map(|&(a, _, l)| (prof.elapsed(x0, a) / t, l))))
}

/// Joint strip fractions of two orbits against common elapsed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOccupancy {
    pub epsilon: f64,
    /// Depth of the first orbit at each evaluation point.
    pub xi: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub s_ll: Vec<f64>,
    pub s_rr: Vec<f64>,
    pub s_lr: Vec<f64>,
    pub s_rl: Vec<f64>,
    /// Final 3×3 joint fractions, index `3·label1 + label2`.
    pub joint: [f64; 9],
}

impl PairOccupancy {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "xi,s_ll,s_rr,s_lr,s_rl")?;
        for i in 0..self.xi.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                g12(self.xi[i]),
                g12(self.s_ll[i]),
                g12(self.s_rr[i]),
                g12(self.s_lr[i]),
                g12(self.s_rl[i])
            )?;
        }
        Ok(())
    }
}

fn timed_segments(orbit: &OrbitSample, eps: f64) -> Result<Vec<(f64, f64, u32)>> {
    let prof = orbit.flow.profile;
    let x0 = orbit.xi0();
    Ok(strip_segments(orbit, eps)?.into_iter().map(|(a, b, l)| (prof.elapsed(x0, a), prof.elapsed(x0, b), l)).collect())
}

/// Fractions of common time in `S_L×S_L`, `S_R×S_R`, `S_L×S_R`, `S_R×S_L`,
/// up to the first orbit's horizon.
pub fn pair_occupancy(o1: &OrbitSample, o2: &OrbitSample, eps: f64) -> Result<PairOccupancy> {
    let s1 = timed_segments(o1, eps)?;
    let s2 = timed_segments(o2, eps)?;
    let horizon = s1.last().unwrap().1;
    let cover = s2.last().unwrap().1;
    if cover < horizon * (1.0 - 1e-12) {
        return Err(LabError::Range(format!("second orbit covers time {cover}, first orbit needs {horizon}")));
    }
    let prof = o1.flow.profile;
    let x0 = o1.xi0();
    let xs = eval_points(x0, o1.xi_end());
    let marks: Vec<f64> = xs.iter().map(|&x| prof.elapsed(x0, x).min(horizon)).collect();

    let mut joint = [0.0f64; 9];
    let mut out = PairOccupancy {
        epsilon: eps,
        xi: xs,
        t_grid: marks.clone(),
        s_ll: Vec::new(),
        s_rr: Vec::new(),
        s_lr: Vec::new(),
        s_rl: Vec::new(),
        joint,
    };
    let (mut i, mut j, mut m) = (0usize, 0usize, 0usize);
    let mut t = 0.0f64;
    let push = |joint: &[f64; 9], t: f64, out: &mut PairOccupancy| {
        let f = |k: usize| if t > 0.0 { joint[k] / t } else { 0.0 };
        out.s_ll.push(f(0));
        out.s_rr.push(f(4));
        out.s_lr.push(f(1));
        out.s_rl.push(f(3));
    };
    while t < horizon && i < s1.len() && j < s2.len() {
        let end = s1[i].1.min(s2[j].1).min(marks[m]);
        if end > t {
            joint[(3 * s1[i].2 + s2[j].2) as usize] += end - t;
            t = end;
        }
        if t >= marks[m] {
            push(&joint, t, &mut out);
            m += 1;
            if m == marks.len() {
                break;
            }
        }
        if s1[i].1 <= t {
            i += 1;
        }
        if j < s2.len() && s2[j].1 <= t {
            j += 1;
        }
    }
    while out.s_ll.len() < marks.len() {
        push(&joint, t, &mut out);
    }
    let total: f64 = joint.iter().sum();
    for v in &mut joint {
        *v /= total;
    }
    out.joint = joint;
    Ok(out)
}

/// `t_k = e^{√k} − 1`.
pub fn block_time(k: u64) -> f64 {
    (k as f64).sqrt().exp_m1()
}

/// `(t_n − t_{n−1})/t_n` without cancellation.
pub fn e1_bound(n: u64) -> f64 {
    let (a, b) = ((n as f64 - 1.0).sqrt(), (n as f64).sqrt());
    -(a - b).exp_m1() / -(-b).exp_m1()
}

/// `(E1, E2, bound)` for `n` blocks and measured `α_1..α_n`.
pub fn e1_e2_check(n: u64, alpha: &[f64]) -> Result<(f64, f64, f64)> {
    if n == 0 || alpha.len() as u64 != n {
        return Err(LabError::Domain(format!("need {n} ≥ 1 alpha values, got {}", alpha.len())));
    }
    if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(LabError::Domain("alpha values must lie in [0, 1]".into()));
    }
    let tn = block_time(n);
    let (mut e1, mut e2) = (0.0, 0.0);
    for k in 1..=n {
        let d = block_time(k) - block_time(k - 1);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        e1 += sign * d;
        e2 -= sign * alpha[(k - 1) as usize] * d;
    }
    Ok((e1 / tn, e2 / tn, e1_bound(n)))
}

/// `(1/t_n)·Σ(−1)^{k+1} c_k Δ_k`, the opposite-strip term completing
/// `χ_r − χ_l = E1 + E2 + X`.
pub fn cross_term(n: u64, cross: &[f64]) -> Result<f64> {
    if cross.len() as u64 != n || n == 0 {
        return Err(LabError::Domain(format!("need {n} ≥ 1 cross values, got {}", cross.len())));
    }
    let mut x = 0.0;
    for k in 1..=n {
        let d = block_time(k) - block_time(k - 1);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        x += sign * cross[(k - 1) as usize] * d;
    }
    Ok(x / block_time(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::integrate::{integrate_orbit, CylinderFlow};

    #[test]
    fn e1_e2_examples() {
        let (e1, e2, b) = e1_e2_check(2, &[0.0, 0.0]).unwrap();
        // (t_2 − 2t_1)/t_2 and (t_2 − t_1)/t_2 with t_1 = e − 1, t_2 = e^{√2} − 1
        assert!((e1 - -0.103_850_715_104_243).abs() < 1e-13, "{e1}");
        assert_eq!(e2, 0.0);
        assert!((b - 0.448_074_642_447_879).abs() < 1e-13);
        let (e1, _, b) = e1_e2_check(400, &[0.0; 400]).unwrap();
        assert!((b - 0.024_705_346_199_449).abs() < 1e-13);
        assert!(e1.abs() <= b);
        assert!(e1_e2_check(2, &[0.0]).is_err());
    }

    #[test]
    fn block_one_only_left() {
        let fl = CylinderFlow::default_geometry();
        // enters S_L where 0.3·e^{−2s} = 0.1, ξ = √(ln 3 / 2)
        let o = integrate_orbit(fl.schedule.theta_l + 0.3, 0.0, 0.9, &fl, 1e-10).unwrap();
        let segs = strip_segments(&o, 0.1).unwrap();
        assert_eq!(segs.len(), 2);
        assert!((segs[0].1 - (3f64.ln() / 2.0).sqrt()).abs() < 1e-9);
        let occ = occupancy(&o, 0.1).unwrap();
        assert_eq!(occ.final_chi().1, 0.0);
        assert!(occ.final_chi().0 > 0.0);
    }

    #[test]
    fn sink_orbit_identity() {
        let fl = CylinderFlow::default_geometry();
        let o = integrate_orbit(fl.schedule.theta_l, 0.0, 12.0, &fl, 1e-10).unwrap();
        let occ = occupancy(&o, 0.1).unwrap();
        assert_eq!(occ.alpha.len(), 12);
        let n = 12;
        let (e1, e2, _) = e1_e2_check(n, &occ.alpha).unwrap();
        let x = cross_term(n, &occ.cross).unwrap();
        let (l, r) = occ.final_chi();
        assert!((r - l - (e1 + e2 + x)).abs() < 1e-9, "{} vs {}", r - l, e1 + e2 + x);
    }

    #[test]
    fn diagonal_pair() {
        let fl = CylinderFlow::default_geometry();
        let o = integrate_orbit(fl.schedule.theta_l + 0.7, 0.0, 6.0, &fl, 1e-10).unwrap();
        let p = pair_occupancy(&o, &o, 0.1).unwrap();
        assert!(p.s_lr.iter().chain(&p.s_rl).all(|&v| v == 0.0));
        let s: f64 = p.joint.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        let short = integrate_orbit(0.0, 0.0, 3.0, &fl, 1e-10).unwrap();
        assert!(pair_occupancy(&o, &short, 0.1).is_err());
        assert!(strip_segments(&o, 0.6).is_err());
    }
}
