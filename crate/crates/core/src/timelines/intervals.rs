use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmtnum::g12;
use crate::maps::PolycycleModel;

use super::{generate_timeline, rescale, EventTimeline, TimeScale};

/// White/black belong to the first orbit (in U_A / in U_B), blue/red to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
    Blue,
    Red,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::White, Color::Black, Color::Blue, Color::Red];

    pub fn name(&self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Black => "black",
            Color::Blue => "blue",
            Color::Red => "red",
        }
    }

    pub fn parse(s: &str) -> Option<Color> {
        Color::ALL.into_iter().find(|c| c.name() == s)
    }

    /// The four (first-orbit, second-orbit) pairs.
    pub fn cross_pairs() -> [(Color, Color); 4] {
        [
            (Color::White, Color::Blue),
            (Color::White, Color::Red),
            (Color::Black, Color::Blue),
            (Color::Black, Color::Red),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorInterval {
    pub color: Color,
    /// Turn index the interval belongs to.
    pub k: usize,
    pub start: f64,
    pub end: f64,
}

impl ColorInterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorIntervalSet {
    /// Sorted by start within each color.
    pub intervals: Vec<ColorInterval>,
    pub first: String,
    pub second: String,
}

impl ColorIntervalSet {
    /// Builds the set from τ pairs `(τ_{k,A}, τ_{k,B})` of each orbit.
    /// Intervals with a non-finite end are dropped (they lie past f64).
    pub fn from_tau_events(first: &[(f64, f64)], second: &[(f64, f64)]) -> Result<ColorIntervalSet> {
        let mut intervals = Vec::new();
        family(first, Color::White, Color::Black, &mut intervals)?;
        family(second, Color::Blue, Color::Red, &mut intervals)?;
        Ok(ColorIntervalSet { intervals, first: "first".into(), second: "second".into() })
    }

    pub fn of_color(&self, c: Color) -> impl Iterator<Item = &ColorInterval> + '_ {
        self.intervals.iter().filter(move |i| i.color == c)
    }

    pub fn count(&self, c: Color) -> usize {
        self.of_color(c).count()
    }
}

fn family(ev: &[(f64, f64)], in_a: Color, in_b: Color, out: &mut Vec<ColorInterval>) -> Result<()> {
    for (i, &(ta, tb)) in ev.iter().enumerate() {
        let k = i + 1;
        if !(ta.is_finite() && tb.is_finite()) {
            break;
        }
        if !(ta < tb) {
            return Err(LabError::Invariant(format!("τ_{{{k},A}} = {ta} not below τ_{{{k},B}} = {tb}")));
        }
        out.push(ColorInterval { color: in_a, k, start: ta, end: tb });
        if let Some(&(next_a, _)) = ev.get(i + 1) {
            if !next_a.is_finite() {
                break;
            }
            if !(tb < next_a) {
                return Err(LabError::Invariant(format!("τ_{{{k},B}} = {tb} not below τ_{{{},A}}", k + 1)));
            }
            out.push(ColorInterval { color: in_b, k, start: tb, end: next_a });
        }
    }
    Ok(())
}

fn tau_pairs(t: &EventTimeline, scale: TimeScale) -> Result<Vec<(f64, f64)>> {
    Ok(rescale(t, scale)?.into_iter().map(|e| (e.tau_a.to_f64(), e.tau_b.to_f64())).collect())
}

/// Colors both timelines in the same τ coordinate.
pub fn color_intervals(first: &EventTimeline, second: &EventTimeline, scale: TimeScale) -> Result<ColorIntervalSet> {
    let mut set = ColorIntervalSet::from_tau_events(&tau_pairs(first, scale)?, &tau_pairs(second, scale)?)?;
    set.first = format!("{}:{}", first.model.kind_name(), g12(first.z0));
    set.second = format!("{}:{}", second.model.kind_name(), g12(second.z0));
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub first: ColorInterval,
    pub second: ColorInterval,
    pub len: f64,
}

/// Intersections of length ≥ `min_len` between the two colors' intervals,
/// sorted by where the intersection starts.
pub fn overlap_report(c: &ColorIntervalSet, pair: (Color, Color), min_len: f64) -> Vec<Overlap> {
    let xs: Vec<&ColorInterval> = c.of_color(pair.0).collect();
    let ys: Vec<&ColorInterval> = c.of_color(pair.1).collect();
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        let (x, y) = (xs[i], ys[j]);
        let len = x.end.min(y.end) - x.start.max(y.start);
        if len >= min_len {
            out.push(Overlap { first: *x, second: *y, len });
        }
        if x.end < y.end {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn write_intervals_csv<W: Write>(c: &ColorIntervalSet, w: &mut W) -> Result<()> {
    writeln!(w, "color,tau_start,tau_end")?;
    let mut all = c.intervals.clone();
    all.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.color.cmp(&b.color)));
    for i in &all {
        writeln!(w, "{},{},{}", i.color.name(), g12(i.start), g12(i.end))?;
    }
    Ok(())
}

/// `log_Λ Λ̃` and whether it is treated as rational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRatio {
    pub value: f64,
    /// `(p, q)` in lowest terms when rational.
    pub rational: Option<(i64, i64)>,
    /// True when the caller overrode the continued-fraction verdict.
    pub forced: bool,
}

const DENOM_CAP: i64 = 1_000_000;

/// Classifies `ln Λ̃ / ln Λ` by continued fractions: rational when a
/// convergent with denominator ≤ 10⁶ matches to ~1e-14.
/// `force = Some(true)` takes the best convergent regardless.
pub fn classify_log_ratio(big_lambda: f64, big_lambda2: f64, force: Option<bool>) -> Result<LogRatio> {
    if !(big_lambda > 1.0 && big_lambda2 > 1.0) {
        return Err(LabError::Domain("both Λ must exceed 1".into()));
    }
    let value = big_lambda2.ln() / big_lambda.ln();
    let tol = 1e-14 * value.abs().max(1.0);
    let mut best = None;
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = value;
    for _ in 0..64 {
        let a = x.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > DENOM_CAP {
            break;
        }
        best = Some((h2, k2));
        if (h2 as f64 / k2 as f64 - value).abs() <= tol {
            break;
        }
        let frac = x - a as f64;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    let exact = best.filter(|&(p, q)| (p as f64 / q as f64 - value).abs() <= tol);
    let (rational, forced) = match force {
        None => (exact, false),
        Some(true) => (best, exact.is_none()),
        Some(false) => (None, exact.is_some()),
    };
    Ok(LogRatio { value, rational, forced })
}

/// `ln γ̂(k) = ln T_{k,A} − k ln Λ` (biangle).
pub fn gamma_hat_ln(t: &EventTimeline, k: usize) -> Result<f64> {
    let big = match t.model {
        PolycycleModel::Biangle { .. } => t.model.constants().big_lambda.unwrap(),
        _ => return Err(LabError::WrongModel { expected: "biangle" }),
    };
    let ta = t.t_a(k).filter(|_| k >= 1).ok_or(LabError::InsufficientEvents { needed: k, have: t.events.len() })?;
    Ok(ta.ln_f64() - k as f64 * big.ln())
}

/// A second-biangle seed `z̃0` for which
/// `log_Λ γ̃(z̃0) − log_Λ γ(z0) + shift` is an integer, with `γ` estimated
/// at turn `k`. `shift = 0` aligns white with blue left edges; other color
/// pairs need e.g. `shift = log_Λ Λ̃₀`.
pub fn integer_offset_seed(first: &EventTimeline, second: &PolycycleModel, k: usize, shift: f64) -> Result<f64> {
    let big = first.model.constants().big_lambda.ok_or(LabError::WrongModel { expected: "biangle" })?;
    if !matches!(second, PolycycleModel::Biangle { .. }) {
        return Err(LabError::WrongModel { expected: "biangle" });
    }
    let lb = big.ln();
    let target_base = gamma_hat_ln(first, k)? / lb - shift;
    // log_Λ γ̃ as a function of ℓ = −ln z̃0; increasing in ℓ
    let f = |ell: f64| -> Result<f64> {
        let t = generate_timeline(second, (-ell).exp(), k)?;
        Ok(gamma_hat_ln(&t, k)? / lb)
    };
    let lo = 2f64.ln();
    let f_lo = f(lo)?;
    let target = target_base + (f_lo - target_base).ceil() + 1.0;
    let mut hi = 2.0 * lo;
    while f(hi)? < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(LabError::Range("no seed reaches the requested offset".into()));
        }
    }
    let mut lo = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    Ok((-0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::SaddleParams;

    #[test]
    fn synthetic_nested() {
        let c = ColorIntervalSet::from_tau_events(&[(1.0, 1.4)], &[(1.1, 1.3)]).unwrap();
        assert_eq!(c.count(Color::White), 1);
        assert_eq!(c.count(Color::Blue), 1);
        assert_eq!(c.count(Color::Black), 0);
        assert_eq!(c.count(Color::Red), 0);
        let o = overlap_report(&c, (Color::White, Color::Blue), 0.1);
        assert_eq!(o.len(), 1);
        assert!((o[0].len - 0.2).abs() < 1e-12);
        assert!(overlap_report(&c, (Color::White, Color::Blue), 0.25).is_empty());
    }

    #[test]
    fn tiles_without_gaps() {
        let c = ColorIntervalSet::from_tau_events(&[(1.0, 1.5), (2.0, 2.4), (3.1, 3.3)], &[]).unwrap();
        let mut first: Vec<_> = c.intervals.iter().collect();
        first.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in first.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        assert_eq!(first.first().unwrap().start, 1.0);
        assert_eq!(first.last().unwrap().end, 3.3);
    }

    #[test]
    fn log_ratio_classes() {
        let r = classify_log_ratio(4.0, 16.0, None).unwrap();
        assert_eq!(r.rational, Some((2, 1)));
        let r = classify_log_ratio(4.0, 6.0, None).unwrap();
        assert!(r.rational.is_none());
        assert!((r.value - 1.292481250360578).abs() < 1e-12);
        let r = classify_log_ratio(4.0, 6.0, Some(true)).unwrap();
        assert!(r.rational.is_some() && r.forced);
        let r = classify_log_ratio(4.0, 8.0, None).unwrap();
        assert_eq!(r.rational, Some((3, 2)));
    }

    #[test]
    fn csv_columns() {
        let c = ColorIntervalSet::from_tau_events(&[(1.0, 1.4)], &[(1.1, 1.3)]).unwrap();
        let mut buf = Vec::new();
        write_intervals_csv(&c, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "color,tau_start,tau_end\nwhite,1,1.4\nblue,1.1,1.3\n");
    }

    #[test]
    fn offset_seed_aligns_gamma() {
        let sp = |mu| SaddleParams::new(mu, 1.0, 1.0).unwrap();
        let m1 = PolycycleModel::biangle(sp(2.0), sp(2.0)).unwrap();
        let m2 = PolycycleModel::biangle(sp(4.0), sp(4.0)).unwrap();
        let t1 = generate_timeline(&m1, 0.1, 40).unwrap();
        let z = integer_offset_seed(&t1, &m2, 40, 0.0).unwrap();
        let t2 = generate_timeline(&m2, z, 40).unwrap();
        let d = (gamma_hat_ln(&t2, 40).unwrap() - gamma_hat_ln(&t1, 40).unwrap()) / 4f64.ln();
        assert!((d - d.round()).abs() < 1e-9, "offset {d}");
    }
}
