//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::RngExt;
use rayon::prelude::*;

use attractorlab::cylinder::*;
use attractorlab::lab::member_rng;
use attractorlab::maps::*;
use attractorlab::measures::*;
use attractorlab::numeric::EventTime;
use attractorlab::timelines::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sp(mu: f64, lambda: f64) -> SaddleParams {
    SaddleParams::new(mu, lambda, 1.0).unwrap()
}

fn biangle(mu_a: f64, mu_b: f64) -> PolycycleModel {
    PolycycleModel::biangle(sp(mu_a, 1.0), sp(mu_b, 1.0)).unwrap()
}

fn mbe() -> PolycycleModel {
    PolycycleModel::modified_bowen(SaddleNodeParams::new(0.0, 1.0).unwrap(), sp(2.0, 1.0)).unwrap()
}

fn mbe_seeds(root: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| member_rng(root, i as u64).random_range(0.02..0.5)).collect()
}

// 1
fn biangle_geometric() -> Outcome {
    let start = Instant::now();
    let m = biangle(2.0, 2.0);
    let c = m.constants();
    let (big, l0) = (c.big_lambda.unwrap(), c.lambda0.unwrap());
    let tl = generate_timeline(&m, 0.1, 502).map_err(|e| e.to_string())?;
    let r = geometric_ratios(&tl).map_err(|e| e.to_string())?;
    let el = start.elapsed();
    let (mut wa, mut wb) = (0.0f64, 0.0f64);
    for &(ra, rb) in &r[11..500] {
        wa = wa.max((ra / big - 1.0).abs());
        wb = wb.max((rb / l0 - 1.0).abs());
    }
    check(
        wa < 0.01 && wb < 0.01 && el < Duration::from_secs(1),
        format!("max rel dev A {wa:.2e}, B {wb:.2e}, {el:.2?}"),
    )
}

// 2
fn biangle_cocycle() -> Outcome {
    let m = biangle(2.0, 2.0);
    let big = m.constants().big_lambda.unwrap();
    let z0 = 0.1;
    let z1 = poincare_step(z0, &m).map_err(|e| e.to_string())?.next;
    let t0 = generate_timeline(&m, z0, 45).map_err(|e| e.to_string())?;
    let t1 = generate_timeline(&m, z1, 45).map_err(|e| e.to_string())?;
    let g0 = gamma_hat_ln(&t0, 40).map_err(|e| e.to_string())?;
    let g1 = gamma_hat_ln(&t1, 40).map_err(|e| e.to_string())?;
    let d = g1 - g0;
    check((d - big.ln()).abs() < 1e-6, format!("ln γ̂(P z0) − ln γ̂(z0) = {d:.10}, ln Λ = {:.10}", big.ln()))
}

// 3
fn mbe_recurrence() -> Outcome {
    let m = mbe();
    let mut worst = 0.0f64;
    for z in mbe_seeds(3, 20) {
        let tl = generate_timeline(&m, z, 6).map_err(|e| e.to_string())?;
        let r: Vec<f64> = recurrence_residuals(&tl)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|r| !r.asymptotic)
            .map(|r| r.value.abs())
            .collect();
        if r.is_empty() || r.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("seed {z}: residuals {r:?} not decreasing"));
        }
        let last = *r.last().unwrap();
        if last >= 1e-2 {
            return Err(format!("seed {z}: |r_last| = {last:.3e}"));
        }
        worst = worst.max(last);
    }
    Ok(format!("20 seeds decreasing, max |r_last| = {worst:.2e}"))
}

// 4
fn mbe_tau_gap() -> Outcome {
    let m = mbe();
    for z in mbe_seeds(3, 20) {
        let tl = generate_timeline(&m, z, 6).map_err(|e| e.to_string())?;
        let g = mbe_tau_gaps(&tl).map_err(|e| e.to_string())?;
        if g.len() < 2 || g.iter().any(|&x| x.is_nan() || x <= 0.0) || g.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("seed {z}: gaps {g:?}"));
        }
    }
    Ok("20 seeds: gaps positive and decreasing".into())
}

fn same_orbit(m: &PolycycleModel, x: f64, y: f64) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    for (p, q) in [(x, y), (y, x)] {
        let mut z = p;
        for _ in 0..4 {
            if near(z, q) {
                return true;
            }
            match poincare_step(z, m) {
                Ok(s) => z = s.next,
                Err(_) => break,
            }
        }
    }
    false
}

// 5
fn mbe_square() -> Outcome {
    let m = mbe();
    let cst = m.constants().recurrence_c.unwrap();
    let mut pairs = Vec::new();
    let mut i = 0u64;
    while pairs.len() < 50 {
        let mut r = member_rng(5, i);
        i += 1;
        let (x, y): (f64, f64) = (r.random_range(0.02..0.5), r.random_range(0.02..0.5));
        if !same_orbit(&m, x, y) {
            pairs.push((x, y));
        }
    }
    let mut worst_bb = 0.0f64;
    let mut fired = 0;
    let mut reseeded = 0;
    let mut sources = Vec::new();
    for &(x, y) in &pairs {
        let a = generate_timeline(&m, x, 6).map_err(|e| e.to_string())?;
        let b = generate_timeline(&m, y, 6).map_err(|e| e.to_string())?;
        let (ha, hb) = (a.t_a(4).unwrap(), b.t_a(4).unwrap());
        let h = if ha.cmp_time(&hb).is_ge() { ha } else { hb };
        let bb = simultaneous_fraction(&a, &b, RegionPair::BB, &h).map_err(|e| e.to_string())?;
        worst_bb = worst_bb.max(bb);
        let (ta, tb) = (a.tau_sequence().map_err(|e| e.to_string())?, b.tau_sequence().map_err(|e| e.to_string())?);
        let inductive = |s: &Separation| s.certificate().is_some_and(|c| c.mode == SeparationMode::InductiveTower);
        let s = separation_analysis(&ta, &tb, 0.1, (cst, cst)).map_err(|e| e.to_string())?;
        if inductive(&s) {
            fired += 1;
        } else {
            // a later starting point on the second orbit
            let s2 = separation_analysis(&ta, &tb[1..], 0.1, (cst, cst)).map_err(|e| e.to_string())?;
            if inductive(&s2) {
                fired += 1;
                reseeded += 1;
            }
        }
        sources.push(OrbitSource::product(OrbitSource::Timeline(a), OrbitSource::Timeline(b)));
    }
    let rp = RegionSystem::product(&RegionSystem::legs(""), &RegionSystem::legs("~"));
    let est = estimate_attractors(&sources, &rp, &HorizonSchedule::Arrivals(vec![1, 2, 3, 4]), DEFAULT_THRESHOLD)
        .map_err(|e| e.to_string())?;
    let want = ["(U_A,U_A~)", "(U_A,U_B~)", "(U_B,U_A~)"];
    let cells_ok = est.statistical_cells == want;
    check(
        worst_bb < 0.05 && fired >= 45 && cells_ok,
        format!(
            "max (B,B~) fraction {worst_bb:.2e}; inductive certificates {fired}/50 ({reseeded} re-seeded); statistical {:?}",
            est.statistical_cells
        ),
    )
}

// 6
fn loop_square() -> Outcome {
    let p = sp(2.0, 1.0);
    let k = 1.0;
    let m = PolycycleModel::loop_model(p, k).map_err(|e| e.to_string())?;
    let mut min_final = f64::INFINITY;
    for i in 0..20u64 {
        let mut r = member_rng(6, i);
        let zx: f64 = r.random_range(3.0..8.0);
        let next = loop_zeta_step(zx, &p).map_err(|e| e.to_string())?;
        let zy = r.random_range(zx + 0.05 * (next - zx)..next - 0.05 * (next - zx));
        let a = generate_timeline(&m, (-zx).exp(), 14).map_err(|e| e.to_string())?;
        let b = generate_timeline(&m, (-zy).exp(), 14).map_err(|e| e.to_string())?;
        let d = loop_divergence(&a, &b, k).map_err(|e| e.to_string())?;
        if d.gaps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("pair {i}: gaps not increasing"));
        }
        let fin = *d.gaps.last().unwrap();
        min_final = min_final.min(fin);
        // brute force: no window pair past the reported index intersects
        let last = d.last_simultaneous.unwrap_or(0);
        let n = a.len().min(b.len());
        for u in 0..=n {
            for v in 0..=n {
                if u.max(v) <= last {
                    continue;
                }
                let (s, t) = (a.t_b(u).unwrap().to_f64(), b.t_b(v).unwrap().to_f64());
                if s.max(t) <= s.min(t) + k {
                    return Err(format!("pair {i}: windows {u},{v} meet after index {last}"));
                }
            }
        }
    }
    check(min_final > 100.0 * k, format!("20 pairs increasing; smallest final gap {min_final:.1} (K = {k})"))
}

// 7
fn biangle_overlaps() -> Outcome {
    let (m4, m6) = (biangle(2.0, 2.0), biangle(2.0, 3.0));
    let scale = TimeScale::LogLambda(4.0);
    let counts = |n: usize| -> Result<Vec<usize>, String> {
        let a = generate_timeline(&m4, 0.1, n).map_err(|e| e.to_string())?;
        let b = generate_timeline(&m6, 0.1, n).map_err(|e| e.to_string())?;
        let a_end = a.t_a(n).unwrap();
        let c = color_intervals(&a, &b, scale).map_err(|e| e.to_string())?;
        // only overlaps inside the first orbit's n turns
        let lim = a_end.ln_f64() / 4f64.ln();
        Ok(Color::cross_pairs()
            .iter()
            .map(|&p| overlap_report(&c, p, 0.05).iter().filter(|o| o.first.end <= lim + 1e-9).count())
            .collect())
    };
    let c2 = counts(2000)?;
    let c4 = counts(4000)?;
    let irr = c2.iter().all(|&x| x >= 20) && c4.iter().zip(&c2).all(|(a, b)| a > b);

    let (m16, k) = (biangle(4.0, 4.0), 40);
    let lr = classify_log_ratio(4.0, 16.0, None).map_err(|e| e.to_string())?;
    let a = generate_timeline(&m4, 0.1, 400).map_err(|e| e.to_string())?;
    let z = integer_offset_seed(&a, &m16, k, 0.0).map_err(|e| e.to_string())?;
    let b = generate_timeline(&m16, z, 200).map_err(|e| e.to_string())?;
    let c = color_intervals(&a, &b, scale).map_err(|e| e.to_string())?;
    let wb = overlap_report(&c, (Color::White, Color::Blue), 0.05);
    let late = wb.iter().filter(|o| o.first.k >= 200).count();
    let rational = lr.rational == Some((2, 1)) && late >= 20;
    check(
        irr && rational,
        format!(
            "Λ̃=6 counts@2000 {c2:?} @4000 {c4:?}; Λ̃=16 ratio {:?}, white-blue overlaps after turn 200: {late}",
            lr.rational
        ),
    )
}

fn cylinder_default_orbit() -> OrbitSample {
    let fl = CylinderFlow::default_geometry();
    integrate_orbit(fl.schedule.theta_l + 0.7, 0.0, 400.0, &fl, 1e-9).unwrap()
}

// 8
fn cylinder_single(orbit: &OrbitSample, elapsed: Duration) -> Outcome {
    let start = Instant::now();
    let occ = occupancy(orbit, 0.1).map_err(|e| e.to_string())?;
    let el = elapsed + start.elapsed();
    let (l, r) = occ.final_chi();
    let prof = orbit.flow.profile;
    let mut t_exact = true;
    let mut e1_bad = Vec::new();
    let mut worst_id = 0.0f64;
    for n in 1..=400u64 {
        t_exact &= prof.t(n as f64) == (n as f64).sqrt().exp_m1();
        let a = &occ.alpha[..n as usize];
        let (e1, e2, b) = e1_e2_check(n, a).map_err(|e| e.to_string())?;
        if e1.abs() > b {
            e1_bad.push(n);
        }
        let x = cross_term(n, &occ.cross[..n as usize]).map_err(|e| e.to_string())?;
        let i = (n - 1) as usize;
        worst_id = worst_id.max((occ.chi_r[i] - occ.chi_l[i] - (e1 + e2 + x)).abs());
    }
    check(
        (l - 0.5).abs() < 0.05 && (r - 0.5).abs() < 0.05 && l + r > 0.9 && t_exact && e1_bad.is_empty() && el < Duration::from_secs(30),
        format!(
            "χ_l {l:.4}, χ_r {r:.4}; t(n) exact {t_exact}; |E1| ≤ bound violated at n = {e1_bad:?}; identity residual {worst_id:.1e}; {el:.2?}"
        ),
    )
}

// 9
fn cylinder_pair(first: &OrbitSample) -> Outcome {
    let fl = first.flow;
    let horizon = fl.profile.elapsed(0.0, 400.0);
    let results: Vec<Result<(PairOccupancy, PhysicalWeights), String>> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut r = member_rng(9, i);
            let th1 = fl.schedule.theta_l + r.random_range(-1.2..1.2);
            let th2 = fl.schedule.theta_l + r.random_range(-1.2..1.2);
            let d: f64 = r.random_range(0.0..2.0);
            let o1 = integrate_orbit(th1, 0.0, 400.0, &fl, 1e-9).map_err(|e| e.to_string())?;
            let end2 = fl.profile.xi_after(d, horizon) + 1e-6;
            let o2 = integrate_orbit(th2, d, end2, &fl, 1e-9).map_err(|e| e.to_string())?;
            let p = pair_occupancy(&o1, &o2, 0.1).map_err(|e| e.to_string())?;
            let src = OrbitSource::product(
                OrbitSource::Cylinder { orbit: o1, eps: 0.1 },
                OrbitSource::Cylinder { orbit: o2, eps: 0.1 },
            );
            let rp = RegionSystem::product(&RegionSystem::strips(""), &RegionSystem::strips("~"));
            let sched = HorizonSchedule::block_ends(&fl.profile, 0.0, (100..=400).step_by(50));
            let w = physical_weights(&src, &rp, &["(S_L,S_L~)", "(S_R,S_R~)"], &sched).map_err(|e| e.to_string())?;
            Ok((p, w))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut worst_w = 0.0f64;
    for res in results {
        let (p, w) = res?;
        let (ll, rr) = (*p.s_ll.last().unwrap(), *p.s_rr.last().unwrap());
        worst = worst.max((ll - 0.5).abs()).max((rr - 0.5).abs());
        worst_cross = worst_cross.max(p.s_lr.last().unwrap() + p.s_rl.last().unwrap());
        for x in w.last() {
            worst_w = worst_w.max((x - 0.5).abs());
        }
    }
    check(
        worst < 0.05 && worst_cross < 0.05 && worst_w < 0.05,
        format!("max |S_LL|S_RR − ½| {worst:.4}; max S_LR+S_RL {worst_cross:.2e}; max atom weight dev {worst_w:.4}"),
    )
}

// 10
fn rho_indep() -> Outcome {
    let fl = CylinderFlow::default_geometry();
    let tol = 1e-9;
    let r = rho_independence(fl.schedule.theta_l + 0.7, 0.0, 400.0, &fl, tol, 400).map_err(|e| e.to_string())?;
    check(
        r.within(10.0),
        format!("max ξ rel err {:.2e}, max θ err {:.2e} (limit {:.0e})", r.max_xi_err, r.max_theta_err, 10.0 * tol),
    )
}

// 11
fn oracle_equivalence() -> Outcome {
    let p = sp(2.0, 1.0);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let x = 10f64.powf(-8.0 + 7.9 * i as f64 / 49.0);
        let a = saddle_local(x, &p).map_err(|e| e.to_string())?;
        let b = saddle_oracle(x, &p, 1e-4).map_err(|e| e.to_string())?;
        let rel = |u: f64, v: f64| ((u - v) / u).abs();
        worst = worst.max(rel(a.image, b.image)).max(rel(a.time, b.time));
    }
    check(worst < 1e-6, format!("50-point log grid, max rel err {worst:.2e}"))
}

// 12
fn hierarchy_and_marginals(first: &OrbitSample) -> Outcome {
    let mut notes = Vec::new();
    let legs = RegionSystem::legs("");
    let legs2 = RegionSystem::legs("~");
    let rp = RegionSystem::product(&legs, &legs2);
    let sched = HorizonSchedule::Arrivals(vec![1, 2, 3, 4]);

    let subset = |a: &[String], b: &[String]| a.iter().all(|x| b.contains(x));
    let mut estimates = Vec::new();
    let m = mbe();
    let seeds = mbe_seeds(12, 60);
    let single: Vec<OrbitSource> =
        seeds.iter().map(|&z| OrbitSource::Timeline(generate_timeline(&m, z, 6).unwrap())).collect();
    estimates.push(estimate_attractors(&single, &legs, &sched, 0.05).map_err(|e| e.to_string())?);
    let pairs: Vec<OrbitSource> = single.chunks(2).map(|c| OrbitSource::product(c[0].clone(), c[1].clone())).collect();
    estimates.push(estimate_attractors(&pairs, &rp, &sched, 0.05).map_err(|e| e.to_string())?);
    let bi = biangle(2.0, 2.0);
    let bis: Vec<OrbitSource> = (0..30)
        .map(|i| {
            let z = 0.05 + 0.4 * i as f64 / 30.0;
            OrbitSource::Timeline(generate_timeline(&bi, z, 30).unwrap())
        })
        .collect();
    let bi_pairs: Vec<OrbitSource> =
        (0..30).map(|i| OrbitSource::product(bis[i].clone(), bis[(i + 7) % 30].clone())).collect();
    estimates.push(
        estimate_attractors(&bi_pairs, &rp, &HorizonSchedule::Arrivals((10..=25).collect()), 0.05)
            .map_err(|e| e.to_string())?,
    );
    for e in &estimates {
        if !(subset(&e.minimal_cells, &e.statistical_cells) && subset(&e.statistical_cells, &e.milnor_cells)) {
            return Err(format!("hierarchy broken: {e:?}"));
        }
    }
    notes.push(format!("{} estimates nested", estimates.len()));

    // marginals of every product histogram equal the factor histograms
    let mut checked = 0;
    let mut prods: Vec<(OrbitSource, RegionSystem, RegionSystem)> = Vec::new();
    for p in pairs.iter().chain(&bi_pairs) {
        prods.push((p.clone(), legs.clone(), legs2.clone()));
    }
    let fl = first.flow;
    let o2 = integrate_orbit(fl.schedule.theta_r, 0.7, 60.0, &fl, 1e-9).map_err(|e| e.to_string())?;
    let o1 = integrate_orbit(first.seed.0, 0.0, 60.0, &fl, 1e-9).map_err(|e| e.to_string())?;
    prods.push((
        OrbitSource::product(
            OrbitSource::Cylinder { orbit: o1, eps: 0.1 },
            OrbitSource::Cylinder { orbit: o2, eps: 0.1 },
        ),
        RegionSystem::strips(""),
        RegionSystem::strips("~"),
    ));
    for (src, ra, rb) in &prods {
        let OrbitSource::Product(fa, fb) = src else { unreachable!() };
        let joint_sys = RegionSystem::product(ra, rb);
        let h = src.horizon_max();
        let hs: Vec<EventTime> = match src {
            OrbitSource::Product(_, _) if matches!(**fa, OrbitSource::Cylinder { .. }) => {
                vec![EventTime::Plain(h.to_f64() * 0.3), h]
            }
            _ => vec![h],
        };
        for h in hs {
            let j = accumulate(src, &joint_sys, &h).map_err(|e| e.to_string())?;
            let ma = j.marginal(&joint_sys, 0, &ra.names).map_err(|e| e.to_string())?;
            let mb = j.marginal(&joint_sys, 1, &rb.names).map_err(|e| e.to_string())?;
            if ma != accumulate(fa, ra, &h).map_err(|e| e.to_string())?
                || mb != accumulate(fb, rb, &h).map_err(|e| e.to_string())?
            {
                return Err("a product marginal differs from its factor histogram".into());
            }
            checked += 1;
        }
    }
    notes.push(format!("{checked} product histograms marginalize exactly"));
    Ok(notes.join("; "))
}

// 13
fn flatness() -> Outcome {
    let (a, b) = (rho_tilde(1e-6), rho_tilde(1e-8));
    let d5 = flatness_check(1e-5, 1).map_err(|e| e.to_string())?.derivatives[0];
    let d6 = flatness_check(1e-6, 1).map_err(|e| e.to_string())?.derivatives[0];
    check(
        a < 1e-8 && b < 1e-30 && d5 >= 10.0 * d6,
        format!("ρ̃(1e-6) {a:.2e}, ρ̃(1e-8) {b:.2e}, |ρ̃'| {d5:.2e} → {d6:.2e}"),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let t = Instant::now();
    let orbit = cylinder_default_orbit();
    let orbit_time = t.elapsed();

    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("biangle geometric law", Box::new(biangle_geometric)),
        ("biangle cocycle", Box::new(biangle_cocycle)),
        ("MBE recurrence", Box::new(mbe_recurrence)),
        ("MBE tau-gap", Box::new(mbe_tau_gap)),
        ("MBE-square synchronization", Box::new(mbe_square)),
        ("loop-square divergence", Box::new(loop_square)),
        ("biangle x biangle overlaps", Box::new(biangle_overlaps)),
        ("cylinder single orbit", Box::new(|| cylinder_single(&orbit, orbit_time))),
        ("cylinder pair", Box::new(|| cylinder_pair(&orbit))),
        ("rho-independence", Box::new(rho_indep)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("hierarchy and marginals", Box::new(|| hierarchy_and_marginals(&orbit))),
        ("flatness witness", Box::new(flatness)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
