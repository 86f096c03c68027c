use crate::error::{LabError, Result};
use crate::maps::{loop_zeta_step, mbe_tau_step, PolycycleModel, SaddleNodeParams, SaddleParams};
use crate::numeric::{EventTime, LogValue, TowerValue};

use super::{Event, EventTimeline, Tier, TimeScale, MAX_TURNS};

/// Crossing times of `n_turns` turns from `z0` on Σ_A.
pub fn generate_timeline(m: &PolycycleModel, z0: f64, n_turns: usize) -> Result<EventTimeline> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(LabError::Domain(format!("z0 = {z0} outside (0, 1)")));
    }
    if n_turns == 0 {
        return Err(LabError::Horizon("need at least one turn".into()));
    }
    if n_turns > MAX_TURNS {
        return Err(LabError::Horizon(format!("{n_turns} turns exceeds {MAX_TURNS}")));
    }
    let mut tl = match m {
        PolycycleModel::Loop { saddle, k_transit } => loop_timeline(saddle, *k_transit, z0, n_turns)?,
        PolycycleModel::Biangle { a, b } => biangle_timeline(a, b, z0, n_turns)?,
        PolycycleModel::ModifiedBowen { node, saddle } => mbe_timeline(m, node, saddle, z0, n_turns)?,
    };
    tl.model = *m;
    tl.z0 = z0;
    debug_assert!(ordered(&tl), "crossing times out of order");
    Ok(tl)
}

fn ordered(t: &EventTimeline) -> bool {
    let c = t.crossings();
    c.windows(2).all(|w| !w[0].0.cmp_time(&w[1].0).is_gt())
}

fn shell(scale: TimeScale) -> EventTimeline {
    EventTimeline {
        model: PolycycleModel::Loop { saddle: SaddleParams { mu: 2.0, lambda: 1.0, c: 1.0 }, k_transit: 1.0 },
        z0: 0.0,
        initial_b: EventTime::ZERO,
        events: Vec::new(),
        final_a: EventTime::ZERO,
        scale,
        zetas: Vec::new(),
    }
}

fn loop_timeline(p: &SaddleParams, k: f64, z0: f64, n: usize) -> Result<EventTimeline> {
    let mut tl = shell(TimeScale::Zeta);
    let mut zeta = -z0.ln();
    let mut t_a = 0.0;
    for j in 0..=n {
        let t_b = t_a + zeta / p.lambda;
        let next_a = t_b + k;
        if !next_a.is_finite() {
            return Err(LabError::Horizon(format!("loop times overflow at turn {j}")));
        }
        tl.zetas.push(zeta);
        if j == 0 {
            tl.initial_b = EventTime::Plain(t_b);
        } else {
            tl.events.push(Event {
                k: j,
                t_a: EventTime::Plain(t_a),
                t_b: EventTime::Plain(t_b),
                tier_a: Tier::Plain,
                tier_b: Tier::Plain,
            });
        }
        tl.final_a = EventTime::Plain(next_a);
        if j < n {
            let next = loop_zeta_step(zeta, p)?;
            if !(next > 0.0) {
                return Err(LabError::ChartExit { coordinate: (-next).exp() });
            }
            zeta = next;
        }
        t_a = next_a;
    }
    Ok(tl)
}

/// `ν·ℓ − ln c` in the log domain; errors when the coordinate `e^{-result}` leaves the chart.
fn log_coordinate_step(ell: LogValue, p: &SaddleParams) -> Result<LogValue> {
    let scaled = ell.mul(LogValue::from_f64(p.nu()));
    let lc = p.c.ln();
    if lc > 0.0 && scaled.log <= lc.ln() {
        return Err(LabError::ChartExit { coordinate: (lc - scaled.to_f64()).exp() });
    }
    Ok(scaled.add_f64(-lc))
}

fn biangle_timeline(a: &SaddleParams, b: &SaddleParams, z0: f64, n: usize) -> Result<EventTimeline> {
    let big = a.nu() * b.nu();
    let mut tl = shell(TimeScale::LogLambda(big));
    let mut ell = LogValue::from_f64(-z0.ln());
    let mut t_a = LogValue::ZERO;
    let (inv_la, inv_lb) = (LogValue::from_f64(1.0 / a.lambda), LogValue::from_f64(1.0 / b.lambda));
    for j in 0..=n {
        let t_b = t_a.add(ell.mul(inv_la));
        let mid = log_coordinate_step(ell, a)?;
        let next_a = t_b.add(mid.mul(inv_lb));
        if j == 0 {
            tl.initial_b = EventTime::Log(t_b);
        } else {
            tl.events.push(Event {
                k: j,
                t_a: EventTime::Log(t_a),
                t_b: EventTime::Log(t_b),
                tier_a: Tier::Log,
                tier_b: Tier::Log,
            });
        }
        tl.final_a = EventTime::Log(next_a);
        if j < n {
            let next = log_coordinate_step(mid, b)?;
            if !(next.log > ell.log) {
                return Err(LabError::Contraction { current: (-ell.to_f64()).exp(), next: (-next.to_f64()).exp() });
            }
            ell = next;
        }
        t_a = next_a;
    }
    if !tl.final_a.ln_f64().is_finite() {
        return Err(LabError::Horizon("biangle log-times overflow".into()));
    }
    Ok(tl)
}

/// MBE in `η = 1/x`. Exact tier: each turn's crossings are stored as
/// multiples of its own `η_j`, which keeps the leg ratios exact even when
/// `η_j` only exists through `ln η_j`. Once `ln η` itself overflows the
/// τ-recurrence takes over and `T_{k,B} = T_{k+1,A}·λ/(b+λ)`.
fn mbe_timeline(
    m: &PolycycleModel,
    node: &SaddleNodeParams,
    saddle: &SaddleParams,
    z0: f64,
    n: usize,
) -> Result<EventTimeline> {
    let mut tl = shell(TimeScale::LnLn);
    let (a, b, lam, nu, lnc) = (node.a, node.b, saddle.lambda, saddle.nu(), saddle.c.ln());
    let mut eta_ln = (1.0 / z0).ln();
    let mut t_a = EventTime::ZERO;
    let mut j = 0usize;
    let mut exact = true;
    while exact && j <= n {
        let anchor = TowerValue::from_ln(eta_ln);
        let eta = eta_ln.exp();
        let s_a = t_a.ratio(&EventTime::anchored(anchor, 1.0));
        // a·ln η / η; the U_B coordinate is η^a e^{-η}
        let rel = a * eta_ln * (-eta_ln).exp();
        if !(rel < 1.0) {
            return Err(LabError::ChartExit { coordinate: (a * eta_ln - eta).exp() });
        }
        let s_b = s_a + 1.0 / b;
        let s_next = s_b + (1.0 - rel) / lam;
        let t_b = EventTime::anchored(anchor, s_b);
        let next_a = EventTime::anchored(anchor, s_next);
        if j == 0 {
            tl.initial_b = t_b;
        } else {
            tl.events.push(Event { k: j, t_a, t_b, tier_a: Tier::Exact, tier_b: Tier::Exact });
        }
        tl.final_a = next_a;
        let next_ln = if eta.is_finite() { nu * (eta - a * eta_ln) - lnc } else { f64::INFINITY };
        if next_ln.is_finite() {
            if !(next_ln > 0.0) {
                return Err(LabError::ChartExit { coordinate: (-next_ln).exp().recip() });
            }
            if !(next_ln > eta_ln) {
                return Err(LabError::Contraction { current: 1.0 / eta, next: (-next_ln).exp() });
            }
            eta_ln = next_ln;
        } else {
            exact = false;
        }
        t_a = next_a;
        j += 1;
    }
    if j > n {
        return Ok(tl);
    }
    // asymptotic tier: τ_{j-1} = ln ln T_{j,A} is the last exact value
    let mut tau = t_a.ln_ln().ok_or_else(|| LabError::Domain("exact tier ended below t = e".into()))?;
    let share_b = lam / (b + lam);
    let tier_a_first = Tier::Exact;
    for k in j..=n {
        tau = mbe_tau_step(&tau, m)?;
        let anchor = tau.exp().exp();
        let t_b = EventTime::anchored(anchor, share_b);
        let next_a = EventTime::anchored(anchor, 1.0);
        let tier_a = if k == j { tier_a_first } else { Tier::Asymptotic };
        tl.events.push(Event { k, t_a, t_b, tier_a, tier_b: Tier::Asymptotic });
        tl.final_a = next_a;
        t_a = next_a;
    }
    Ok(tl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{poincare_step, SaddleNodeParams};

    fn sp(mu: f64, lambda: f64) -> SaddleParams {
        SaddleParams::new(mu, lambda, 1.0).unwrap()
    }

    #[test]
    fn biangle_matches_direct_leg_sum() {
        // oracle: sum per-leg times ln(1/x)/λ along the plain-real orbit
        let m = PolycycleModel::biangle(sp(2.0, 1.0), sp(2.0, 1.0)).unwrap();
        let tl = generate_timeline(&m, 0.1, 3).unwrap();
        let mut x: f64 = 0.1;
        let mut t = 0.0;
        for k in 1..=3 {
            t += poincare_step(x, &m).unwrap().turn_time;
            x = poincare_step(x, &m).unwrap().next;
            let got = tl.t_a(k).unwrap().to_f64();
            assert!((got - t).abs() < 1e-9 * t, "k={k}: {got} vs {t}");
        }
        let want = [6.907755278982137, 34.538776394910684, 145.06286085862488];
        for (k, w) in want.iter().enumerate() {
            assert!((tl.events[k].t_a.to_f64() - w).abs() < 1e-9 * w);
        }
    }

    #[test]
    fn loop_cumulative() {
        let m = PolycycleModel::loop_model(sp(2.0, 1.0), 1.0).unwrap();
        let tl = generate_timeline(&m, (-5f64).exp(), 3).unwrap();
        assert_eq!(tl.zetas, vec![5.0, 10.0, 20.0, 40.0]);
        assert_eq!(tl.initial_b.to_f64(), 5.0);
        assert!((tl.events[0].t_b.to_f64() - 16.0).abs() < 1e-12);
        assert!((tl.events[1].t_b.to_f64() - 37.0).abs() < 1e-12);
        let m0 = PolycycleModel::loop_model(sp(2.0, 1.0), 0.0).unwrap();
        let t0 = generate_timeline(&m0, (-5f64).exp(), 2).unwrap();
        assert_eq!(t0.initial_b.to_f64(), 5.0);
        assert!((t0.events[0].t_b.to_f64() - 15.0).abs() < 1e-12);
        assert!((t0.events[1].t_b.to_f64() - 35.0).abs() < 1e-12);
    }

    #[test]
    fn mbe_exact_matches_oracle() {
        // mpmath oracle for (a=1, b=1, mu=2, lambda=1), x0 = 0.5
        let m = PolycycleModel::modified_bowen(SaddleNodeParams::new(1.0, 1.0).unwrap(), sp(2.0, 1.0)).unwrap();
        let tl = generate_timeline(&m, 0.5, 6).unwrap();
        assert!((tl.events[0].t_a.to_f64() - 3.306852819440055).abs() < 1e-12);
        assert!((tl.events[1].t_a.to_f64() - 27.992222197132058).abs() < 1e-9);
        assert!((tl.events[2].t_a.to_f64() / 7702501014.460897 - 1.0).abs() < 1e-12);
        assert!(tl.events[3].t_a.to_f64().is_infinite());
        assert_eq!(tl.events[0].tier_a, Tier::Exact);
        assert_eq!(tl.events.last().unwrap().tier_b, Tier::Asymptotic);
    }

    #[test]
    fn horizon_limits() {
        let m = PolycycleModel::biangle(sp(2.0, 1.0), sp(2.0, 1.0)).unwrap();
        assert!(generate_timeline(&m, 0.1, 0).is_err());
        assert!(generate_timeline(&m, 0.1, MAX_TURNS + 1).is_err());
        assert!(generate_timeline(&m, 1.5, 3).is_err());
    }
}
