use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{
    block_time, cross_term, e1_e2_check, flatness_check, integrate_orbit, occupancy, pair_occupancy, rho_independence,
    rho_tilde, CylinderFlow, OrbitSample,
};
use crate::error::{LabError, Result};
use crate::fmtnum::g12;
use crate::maps::{poincare_step, PolycycleModel};
use crate::measures::{
    ensemble_occupancy, estimate_attractors, oscillation_detect, physical_weights, AttractorEstimate, HorizonSchedule,
    OrbitSource, Oscillation, RegionSystem, StripRegion,
};
use crate::timelines::{
    classify_log_ratio, color_intervals, gamma_hat_ln, generate_timeline, geometric_ratios, loop_divergence,
    mbe_tau_gaps, overlap_report, recurrence_residuals, separation_analysis, simultaneous_fraction, Color,
    EventTimeline, RegionPair, SeparationMode, TimeScale, LEG_A,
};

use super::{member_rng, ScenarioConfig, ScenarioKind};

/// Environment variable overriding the output root.
pub const OUT_ENV: &str = "ATTRACTORLAB_OUT";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub name: String,
    /// Relative to the run directory.
    pub file: String,
    /// Data rows, header excluded.
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ScenarioKind,
    pub config_hash: String,
    pub version: String,
    pub root_seed: u64,
    pub config: ScenarioConfig,
    pub run_dir: PathBuf,
    pub outputs: Vec<OutputEntry>,
    pub verdicts: Vec<Verdict>,
    pub wall_clock_s: f64,
    /// Module error that stopped the run, with context.
    pub error: Option<String>,
    /// Set when `error` is: outputs written so far are kept.
    pub partial: bool,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.run_dir.join(MANIFEST_FILE)
    }
}

/// Writes through a temporary file and a rename, so readers never see a
/// half-written file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// `ATTRACTORLAB_OUT`, else the config's `output_dir`, else `attractorlab-out`.
pub fn output_root(c: &ScenarioConfig) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| c.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("attractorlab-out"))
}

struct Run {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
    verdicts: Vec<Verdict>,
}

impl Run {
    fn write(&mut self, file: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let rows = buf.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
        write_atomic(&self.dir.join(file), &buf)?;
        let name = file.rsplit_once('.').map_or(file, |x| x.0).to_string();
        self.outputs.push(OutputEntry { name, file: file.into(), rows });
        Ok(())
    }

    fn csv(&mut self, file: &str, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        self.write(file, |w| {
            let mut s = format!("{header}\n");
            for r in rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
            w.extend_from_slice(s.as_bytes());
            Ok(())
        })
    }

    fn json<T: Serialize>(&mut self, file: &str, v: &T) -> Result<()> {
        self.write(file, |w| {
            serde_json::to_writer_pretty(&mut *w, v).map_err(|e| LabError::Io(e.to_string()))?;
            w.push(b'\n');
            Ok(())
        })
    }

    fn verdict(&mut self, name: &str, pass: bool, detail: String) {
        self.verdicts.push(Verdict { name: name.into(), pass, detail });
    }
}

/// Runs one scenario into `<root>/<kind>-<hash prefix>` and writes the manifest.
///
/// Invalid configs are rejected before anything is written. Errors raised
/// while running are recorded in the manifest, which is still written.
pub fn run_scenario(c: &ScenarioConfig) -> Result<RunManifest> {
    c.validate()?;
    let hash = c.hash();
    let dir = output_root(c).join(format!("{}-{}", c.kind, &hash[..12]));
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let mut run = Run { dir: dir.clone(), outputs: Vec::new(), verdicts: Vec::new() };
    let res = match c.kind {
        ScenarioKind::BiangleSquare => biangle_square(c, &mut run),
        ScenarioKind::MbeSquare | ScenarioKind::MbeTimesMbe => mbe_pairs(c, &mut run),
        ScenarioKind::LoopSquare => loop_square(c, &mut run),
        ScenarioKind::MbeTimesBiangle => mbe_times_biangle(c, &mut run),
        ScenarioKind::Cylinder => cylinder(c, &mut run),
        ScenarioKind::CylinderSquare => cylinder_square(c, &mut run),
    };
    let error = res.err().map(|e| format!("{} run: {e}", c.kind));
    let m = RunManifest {
        kind: c.kind,
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION").into(),
        root_seed: c.root_seed,
        config: c.clone(),
        run_dir: dir,
        outputs: run.outputs,
        verdicts: run.verdicts,
        wall_clock_s: start.elapsed().as_secs_f64(),
        partial: error.is_some(),
        error,
    };
    let text = serde_json::to_string_pretty(&m).map_err(|e| LabError::Io(e.to_string()))?;
    write_atomic(&m.manifest_path(), text.as_bytes())?;
    Ok(m)
}

fn biangle_square(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let m = c.model.biangle()?;
    let m2 = c.model.biangle2()?;
    let z0 = c.seed(0);
    let turns = c.turns().max(502);
    let cst = m.constants();
    let (big, l0) = (cst.big_lambda.unwrap(), cst.lambda0.unwrap());

    let start = Instant::now();
    let tl = generate_timeline(&m, z0, 502)?;
    let ratios = geometric_ratios(&tl)?;
    let el = start.elapsed();
    r.csv(
        "ratios.csv",
        "k,ratio_A,ratio_B",
        ratios.iter().enumerate().map(|(i, (a, b))| vec![(i + 1).to_string(), g12(*a), g12(*b)]),
    )?;
    r.write("timeline.csv", |w| tl.write_csv(w))?;
    let (mut wa, mut wb) = (0.0f64, 0.0f64);
    for &(ra, rb) in &ratios[11..500] {
        wa = wa.max((ra / big - 1.0).abs());
        wb = wb.max((rb / l0 - 1.0).abs());
    }
    r.verdict(
        "geometric law",
        wa < 0.01 && wb < 0.01 && el.as_secs_f64() < 1.0,
        format!("k in [12, 500]: max rel dev from Λ {wa:.3e}, from Λ₀ {wb:.3e}; {el:.2?}"),
    );

    let z1 = poincare_step(z0, &m)?.next;
    let g0 = gamma_hat_ln(&tl, 40)?;
    let g1 = gamma_hat_ln(&generate_timeline(&m, z1, 45)?, 40)?;
    let d = g1 - g0;
    r.verdict(
        "cocycle",
        (d - big.ln()).abs() < 1e-6,
        format!("ln γ̂(P z0) − ln γ̂(z0) = {d:.10}, ln Λ = {:.10}", big.ln()),
    );

    let big2 = m2.constants().big_lambda.unwrap();
    let scale = TimeScale::LogLambda(big);
    let lr = classify_log_ratio(big, big2, None)?;
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    for n in [turns, 2 * turns] {
        let a = generate_timeline(&m, z0, n)?;
        let b = generate_timeline(&m2, z0, n)?;
        let lim = a.t_a(n).unwrap().ln_f64() / big.ln();
        let set = color_intervals(&a, &b, scale)?;
        let cs: Vec<usize> = Color::cross_pairs()
            .iter()
            .map(|&p| overlap_report(&set, p, 0.05).iter().filter(|o| o.first.end <= lim + 1e-9).count())
            .collect();
        for (p, k) in Color::cross_pairs().iter().zip(&cs) {
            rows.push(vec![format!("{}-{}", p.0.name(), p.1.name()), n.to_string(), k.to_string()]);
        }
        counts.push(cs);
    }
    r.csv("overlaps.csv", "pair,turns,count", rows)?;
    let ok = if lr.rational.is_some() {
        true
    } else {
        counts[0].iter().all(|&k| k >= 20) && counts[1].iter().zip(&counts[0]).all(|(a, b)| a > b)
    };
    r.verdict(
        "overlaps",
        ok,
        format!(
            "Λ = {big}, Λ̃ = {big2}, log ratio {}; counts at {turns} turns {:?}, at {} turns {:?}",
            lr.rational.map_or("irrational".into(), |(p, q)| format!("{p}/{q}")),
            counts[0],
            2 * turns,
            counts[1]
        ),
    );
    Ok(())
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

/// `count` seed pairs: explicit seeds pair up consecutively, drawn pairs on
/// the same orbit are redrawn.
fn seed_pairs(c: &ScenarioConfig, m: &PolycycleModel) -> Vec<(f64, f64)> {
    if let Some(s) = &c.seeds {
        return s.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    }
    let [lo, hi] = c.band();
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < c.count() {
        let mut g = member_rng(c.root_seed, i);
        i += 1;
        let (x, y) = (g.random_range(lo..hi), g.random_range(lo..hi));
        if !same_orbit(m, x, y) {
            out.push((x, y));
        }
    }
    out
}

fn estimate_outputs(r: &mut Run, est: &AttractorEstimate) -> Result<()> {
    let mark = |v: &[String], n: &String| u8::from(v.contains(n)).to_string();
    r.csv(
        "cells.csv",
        "region,milnor,statistical,minimal,statistical_support,minimal_mean",
        est.regions.iter().enumerate().map(|(i, n)| {
            vec![
                n.clone(),
                mark(&est.milnor_cells, n),
                mark(&est.statistical_cells, n),
                mark(&est.minimal_cells, n),
                est.statistical_support[i].to_string(),
                g12(est.minimal_mean[i]),
            ]
        }),
    )?;
    r.json("estimate.json", est)?;
    let subset = |a: &[String], b: &[String]| a.iter().all(|x| b.contains(x));
    r.verdict(
        "hierarchy",
        subset(&est.minimal_cells, &est.statistical_cells) && subset(&est.statistical_cells, &est.milnor_cells),
        format!(
            "minimal {:?} ⊆ statistical {:?} ⊆ milnor {:?}",
            est.minimal_cells, est.statistical_cells, est.milnor_cells
        ),
    );
    Ok(())
}

fn mbe_pairs(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let m = c.model.mbe()?;
    let m2 = if c.kind == ScenarioKind::MbeTimesMbe { c.model.mbe2()? } else { m };
    let (c1, c2) = (m.constants().recurrence_c.unwrap(), m2.constants().recurrence_c.unwrap());
    let pairs = seed_pairs(c, &m);
    let turns = c.turns();

    struct PairRun {
        a: EventTimeline,
        b: EventTimeline,
        bb: f64,
        mode: String,
        inductive: bool,
    }
    let runs: Vec<PairRun> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let a = generate_timeline(&m, x, turns)?;
            let b = generate_timeline(&m2, y, turns)?;
            let (ha, hb) = (a.t_a(4).unwrap(), b.t_a(4).unwrap());
            let h = if ha.cmp_time(&hb).is_ge() { ha } else { hb };
            let bb = simultaneous_fraction(&a, &b, RegionPair::BB, &h)?;
            let (ta, tb) = (a.tau_sequence()?, b.tau_sequence()?);
            let is_ind = |s: &crate::timelines::Separation| {
                s.certificate().is_some_and(|c| c.mode == SeparationMode::InductiveTower)
            };
            let s = separation_analysis(&ta, &tb, 0.1, (c1, c2))?;
            let (mode, inductive) = if is_ind(&s) {
                ("inductive".to_string(), true)
            } else if is_ind(&separation_analysis(&ta, &tb[1..], 0.1, (c1, c2))?) {
                ("inductive-reseeded".to_string(), true)
            } else {
                (s.certificate().map_or("refused".into(), |c| format!("{:?}", c.mode).to_lowercase()), false)
            };
            Ok(PairRun { a, b, bb, mode, inductive })
        })
        .collect::<Result<_>>()?;

    r.csv(
        "pairs.csv",
        "pair,seed_x,seed_y,bb_fraction,separation",
        runs.iter()
            .zip(&pairs)
            .enumerate()
            .map(|(i, (p, s))| vec![i.to_string(), g12(s.0), g12(s.1), g12(p.bb), p.mode.clone()]),
    )?;
    let mut res_rows = Vec::new();
    let mut gap_rows = Vec::new();
    let mut rec_ok = true;
    let mut gap_ok = true;
    let mut worst_last = 0.0f64;
    for (i, p) in runs.iter().enumerate() {
        let res = recurrence_residuals(&p.a)?;
        let exact: Vec<f64> = res.iter().filter(|x| !x.asymptotic).map(|x| x.value.abs()).collect();
        for x in &res {
            res_rows.push(vec![i.to_string(), x.n.to_string(), g12(x.value), u8::from(x.asymptotic).to_string()]);
        }
        let last = exact.last().copied().unwrap_or(f64::INFINITY);
        worst_last = worst_last.max(last);
        rec_ok &= !exact.is_empty() && exact.windows(2).all(|w| w[1] < w[0]) && last < 1e-2;
        let g = mbe_tau_gaps(&p.a)?;
        gap_ok &= g.len() >= 2 && g.iter().all(|&x| x > 0.0) && g.windows(2).all(|w| w[1] < w[0]);
        for (k, x) in g.iter().enumerate() {
            gap_rows.push(vec![i.to_string(), (k + 1).to_string(), g12(*x)]);
        }
    }
    r.csv("residuals.csv", "pair,n,residual,asymptotic", res_rows)?;
    r.csv("tau_gaps.csv", "pair,k,gap", gap_rows)?;
    r.verdict("recurrence", rec_ok, format!("exact-tier residuals decreasing, max |r_last| {worst_last:.3e}"));
    r.verdict("tau gaps", gap_ok, "τ(T_{k+1,A}) − τ(T_{k,B}) positive and decreasing".into());

    let worst_bb = runs.iter().map(|p| p.bb).fold(0.0, f64::max);
    let fired = runs.iter().filter(|p| p.inductive).count();
    r.verdict("(B,B~) fraction", worst_bb < 0.05, format!("max at T_4,A {worst_bb:.3e} over {} pairs", runs.len()));
    r.verdict("separation", fired * 10 >= runs.len() * 9, format!("inductive certificates {fired}/{}", runs.len()));

    let sources: Vec<OrbitSource> = runs
        .into_iter()
        .map(|p| OrbitSource::product(OrbitSource::Timeline(p.a), OrbitSource::Timeline(p.b)))
        .collect();
    let rp = RegionSystem::product(&RegionSystem::legs(""), &RegionSystem::legs("~"));
    let est = estimate_attractors(&sources, &rp, &HorizonSchedule::Arrivals(c.arrivals()), c.threshold)?;
    let want = ["(U_A,U_A~)", "(U_A,U_B~)", "(U_B,U_A~)"];
    r.verdict(
        "statistical cells",
        est.statistical_cells == want,
        format!(
            "{} cells {:?}, (B,B~) excluded: {}",
            est.statistical_cells.len(),
            est.statistical_cells,
            !est.statistical_cells.iter().any(|c| c == "(U_B,U_B~)")
        ),
    );
    estimate_outputs(r, &est)
}

fn loop_square(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let m = c.model.loop_model()?;
    let PolycycleModel::Loop { saddle, k_transit: k } = m else { unreachable!() };
    let [lo, hi] = c.band();
    let pairs: Vec<(f64, f64)> = match &c.seeds {
        Some(s) => s.chunks_exact(2).map(|p| (p[0], p[1])).collect(),
        None => (0..c.count())
            .map(|i| {
                let mut g = member_rng(c.root_seed, i as u64);
                let zx = g.random_range(lo..hi);
                let next = crate::maps::loop_zeta_step(zx, &saddle).unwrap_or(zx + 1.0);
                let w = next - zx;
                (zx, g.random_range(zx + 0.05 * w..next - 0.05 * w))
            })
            .collect(),
    };
    let turns = c.turns();
    let mut rows = Vec::new();
    let (mut inc, mut none_after) = (true, true);
    let mut min_final = f64::INFINITY;
    for (i, &(zx, zy)) in pairs.iter().enumerate() {
        let a = generate_timeline(&m, (-zx).exp(), turns)?;
        let b = generate_timeline(&m, (-zy).exp(), turns)?;
        let d = loop_divergence(&a, &b, k)?;
        inc &= d.gaps.windows(2).all(|w| w[1] > w[0]);
        min_final = min_final.min(d.gaps.last().copied().unwrap_or(0.0));
        let last = d.last_simultaneous.unwrap_or(0);
        let n = a.len().min(b.len());
        for u in 0..=n {
            for v in 0..=n {
                if u.max(v) <= last {
                    continue;
                }
                let (s, t) = (a.t_b(u).unwrap().to_f64(), b.t_b(v).unwrap().to_f64());
                none_after &= s.max(t) > s.min(t) + k;
            }
        }
        for (j, g) in d.gaps.iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), g12(*g)]);
        }
    }
    r.csv("gaps.csv", "pair,n,gap", rows)?;
    r.verdict("gaps increasing", inc, format!("{} pairs", pairs.len()));
    r.verdict(
        "final gap",
        min_final > 100.0 * k,
        format!("smallest final gap {} (100·K = {})", g12(min_final), g12(100.0 * k)),
    );
    r.verdict("no late simultaneity", none_after, "no U_B windows meet after the reported index".into());
    Ok(())
}

fn mbe_times_biangle(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let mbe = c.model.mbe()?;
    let bi = c.model.biangle2()?;
    let big = bi.constants().big_lambda.unwrap();
    let turns = c.turns();
    let a = generate_timeline(&mbe, c.seed(0), turns)?;
    // white intervals: the MBE's U_A legs in ln t, those with a finite end
    let legs: Vec<(usize, f64, f64)> = a
        .crossings()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].1 == LEG_A)
        .map(|(i, w)| (i, w[0].0.ln_f64(), w[1].0.ln_f64()))
        .filter(|l| l.2.is_finite())
        .collect();
    let end = legs.last().map_or(0.0, |l| l.2);
    let n_bi = (end / big.ln()).ceil() as usize + 5;
    if n_bi > 200_000 {
        return Err(LabError::Horizon(format!("MBE horizon needs {n_bi} biangle turns; lower `turns`")));
    }
    let b = generate_timeline(&bi, 0.1, n_bi)?;
    let bi_ln: Vec<f64> = (1..=n_bi).map(|k| b.t_a(k).unwrap().ln_f64()).collect();
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    for &(i, s, e) in &legs {
        let n = bi_ln.iter().filter(|&&x| x >= s && x < e).count();
        counts.push(n);
        rows.push(vec![i.to_string(), g12(s), g12(e), n.to_string()]);
    }
    r.csv("containment.csv", "interval,ln_start,ln_end,biangle_turns", rows)?;
    let grows = counts.len() >= 2 && counts.windows(2).all(|w| w[1] >= w[0]) && counts.last() > counts.first();
    r.verdict(
        "white intervals absorb rotations",
        grows,
        format!("biangle turns inside successive MBE U_A legs {counts:?}"),
    );
    Ok(())
}

fn cylinder_seed_orbits(c: &ScenarioConfig, fl: &CylinderFlow, xi_end: f64) -> Result<Vec<OrbitSample>> {
    (0..c.count())
        .into_par_iter()
        .map(|i| {
            let xi0 = if i == 0 { 0.0 } else { member_rng(c.root_seed ^ 0x5eed, i as u64).random_range(0.0..0.5) };
            integrate_orbit(fl.schedule.theta_l + c.seed(i), xi0, xi_end, fl, c.tol)
        })
        .collect()
}

fn cylinder(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let fl = CylinderFlow::default_geometry();
    let start = Instant::now();
    let seed = fl.schedule.theta_l + c.seed(0);
    let orbit = integrate_orbit(seed, 0.0, c.xi_max, &fl, c.tol)?;
    let occ = occupancy(&orbit, c.epsilon)?;
    let el = start.elapsed();
    r.write("orbit.csv", |w| orbit.write_csv(w))?;
    r.write("occupancy.csv", |w| occ.write_csv(w))?;
    let (l, rr) = occ.final_chi();
    r.verdict(
        "strip occupancy",
        (l - 0.5).abs() < 0.05 && (rr - 0.5).abs() < 0.05 && l + rr > 0.9,
        format!("χ_l {}, χ_r {} at ξ = {}; {el:.2?}", g12(l), g12(rr), g12(c.xi_max)),
    );

    let nb = occ.alpha.len() as u64;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let mut t_exact = true;
    for n in 1..=nb {
        t_exact &= fl.profile.t(n as f64) == (n as f64).sqrt().exp_m1() && block_time(n) == (n as f64).sqrt().exp_m1();
        let (e1, e2, bound) = e1_e2_check(n, &occ.alpha[..n as usize])?;
        let x = cross_term(n, &occ.cross[..n as usize])?;
        if e1.abs() > bound {
            bad.push(n);
        }
        rows.push(vec![n.to_string(), g12(e1), g12(e2), g12(x), g12(bound)]);
    }
    r.csv("e1_e2.csv", "n,E1,E2,cross,bound", rows)?;
    r.verdict("t identity", t_exact, format!("t(n) = e^√n − 1 exactly for n ≤ {nb}"));
    r.verdict(
        "E1 bound",
        bad.is_empty(),
        if bad.is_empty() {
            format!("|E1| ≤ (t_n − t_(n−1))/t_n for n ≤ {nb}")
        } else {
            format!("violated at n = {bad:?}")
        },
    );

    let ri = rho_independence(seed, 0.0, c.xi_max, &fl, c.tol, 400)?;
    r.verdict(
        "rho independence",
        ri.within(10.0),
        format!("max ξ rel err {:.3e}, max θ err {:.3e}, tol {:.0e}", ri.max_xi_err, ri.max_theta_err, c.tol),
    );

    let zetas = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
    let flat: Vec<_> = zetas.iter().map(|&z| flatness_check(z, 1)).collect::<Result<_>>()?;
    r.csv(
        "flatness.csv",
        "zeta,rho_tilde,d1",
        flat.iter().map(|f| vec![g12(f.zeta), g12(f.value), g12(f.derivatives[0])]),
    )?;
    let (d5, d6) = (flat[1].derivatives[0], flat[2].derivatives[0]);
    r.verdict(
        "flatness",
        rho_tilde(1e-6) < 1e-8 && rho_tilde(1e-8) < 1e-30 && d5.abs() >= 10.0 * d6.abs(),
        format!("ρ̃(1e-6) {:.3e}, ρ̃(1e-8) {:.3e}, |ρ̃'| {:.3e} → {:.3e}", rho_tilde(1e-6), rho_tilde(1e-8), d5, d6),
    );

    // ensemble pushforwards over the first blocks
    let blocks = c.xi_max.min(16.0).floor() as u64;
    let orbits = cylinder_seed_orbits(c, &fl, blocks as f64 + 1.0)?;
    let times: Vec<f64> = (1..=blocks * 8).map(|j| fl.profile.t(j as f64 / 8.0)).collect();
    let s = fl.schedule;
    let (ul, ur) =
        (StripRegion { center: s.theta_l, eps: c.epsilon }, StripRegion { center: s.theta_r, eps: c.epsilon });
    let eo = ensemble_occupancy(&orbits, ul, ur, &times)?;
    r.csv(
        "ensemble.csv",
        "t,xi,in_l,in_r",
        (0..times.len()).map(|i| vec![g12(eo.times[i]), g12(eo.xi[i]), g12(eo.in_l[i]), g12(eo.in_r[i])]),
    )?;
    match oscillation_detect(&eo, 0.2) {
        Oscillation::Found { l_xi, r_xi, .. } => r.verdict(
            "oscillating measure",
            true,
            format!("{} L and {} R moments with share > 0.8", l_xi.len(), r_xi.len()),
        ),
        Oscillation::Refused { reason } => r.verdict("oscillating measure", false, reason),
    }
    Ok(())
}

fn cylinder_square(c: &ScenarioConfig, r: &mut Run) -> Result<()> {
    let fl = CylinderFlow::default_geometry();
    let horizon = fl.profile.elapsed(0.0, c.xi_max);
    let [lo, hi] = c.band();
    let n = match &c.seeds {
        Some(s) => s.len() / 2,
        None => c.count(),
    };
    let sched = HorizonSchedule::block_ends(&fl.profile, 0.0, (1..=4).map(|j| (c.xi_max as u64 * j) / 4));
    let rp = RegionSystem::product(&RegionSystem::strips(""), &RegionSystem::strips("~"));
    let atoms = ["(S_L,S_L~)", "(S_R,S_R~)"];
    let results: Vec<(f64, f64, f64, _, _)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = member_rng(c.root_seed, i as u64);
            let (a, b) = match &c.seeds {
                Some(s) => (s[2 * i], s[2 * i + 1]),
                None => (g.random_range(lo..hi), g.random_range(lo..hi)),
            };
            let d: f64 = g.random_range(0.0..2.0);
            let o1 = integrate_orbit(fl.schedule.theta_l + a, 0.0, c.xi_max, &fl, c.tol)?;
            let end2 = fl.profile.xi_after(d, horizon) + 1e-6;
            let o2 = integrate_orbit(fl.schedule.theta_l + b, d, end2, &fl, c.tol)?;
            let p = pair_occupancy(&o1, &o2, c.epsilon)?;
            let src = OrbitSource::product(
                OrbitSource::Cylinder { orbit: o1, eps: c.epsilon },
                OrbitSource::Cylinder { orbit: o2, eps: c.epsilon },
            );
            let w = physical_weights(&src, &rp, &atoms, &sched)?;
            Ok((a, b, d, p, w))
        })
        .collect::<Result<_>>()?;

    let last = |v: &Vec<f64>| *v.last().unwrap();
    r.csv(
        "pairs.csv",
        "pair,theta_offset_1,theta_offset_2,xi_offset,s_ll,s_rr,s_lr,s_rl,w_ll,w_rr",
        results.iter().enumerate().map(|(i, (a, b, d, p, w))| {
            vec![
                i.to_string(),
                g12(*a),
                g12(*b),
                g12(*d),
                g12(last(&p.s_ll)),
                g12(last(&p.s_rr)),
                g12(last(&p.s_lr)),
                g12(last(&p.s_rl)),
                g12(w.last()[0]),
                g12(w.last()[1]),
            ]
        }),
    )?;
    if let Some((_, _, _, p, w)) = results.first() {
        r.write("pair_0.csv", |out| p.write_csv(out))?;
        r.write("weights_0.csv", |out| w.write_csv(out))?;
    }
    let worst = results
        .iter()
        .map(|(.., p, _)| (last(&p.s_ll) - 0.5).abs().max((last(&p.s_rr) - 0.5).abs()))
        .fold(0.0, f64::max);
    let cross = results.iter().map(|(.., p, _)| last(&p.s_lr) + last(&p.s_rl)).fold(0.0, f64::max);
    let wdev = results
        .iter()
        .flat_map(|(.., w)| w.last().iter().map(|x| (x - 0.5).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    r.verdict("diagonal strips", worst < 0.05, format!("max |S_LL − ½|, |S_RR − ½| = {worst:.4}"));
    r.verdict("off-diagonal strips", cross < 0.05, format!("max S_LR + S_RL = {cross:.3e}"));
    r.verdict("physical atoms", n > 0 && wdev < 0.05, format!("atoms (LL, RR) within {wdev:.4} of ½"));
    Ok(())
}
