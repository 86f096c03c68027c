use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numeric::TowerValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparationMode {
    NumericTail,
    InductiveTower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    /// 0-based start of the separated tails of both sequences.
    pub index_m: usize,
    pub gap: f64,
    pub mode: SeparationMode,
    /// 1-based `(k, n)`: the element `a_k` (or `b_k`) that fired and the
    /// index of its upper bracket in the other sequence.
    pub witness: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Separation {
    Certified(SeparationCertificate),
    /// The sequences come within `eps` at every recorded level.
    Refused {
        reason: String,
    },
}

impl Separation {
    pub fn certificate(&self) -> Option<&SeparationCertificate> {
        match self {
            Separation::Certified(c) => Some(c),
            Separation::Refused { .. } => None,
        }
    }
}

/// Looks for tails of two increasing τ-sequences that stay apart.
/// `consts = (C₁, C₂)` are the recurrence constants `τ_{n+1} ≈ e^{τ_n} + C`.
///
/// First tries the inductive estimate: an element `ε`-far from its brackets
/// in the other sequence with `e^{ref}·ε − |C₁ − C₂| > 1` separates everything
/// after it by 1. The recorded tails are checked before the certificate is
/// issued. Otherwise falls back to the smallest tail whose recorded elements
/// are `eps` apart.
pub fn separation_analysis(a: &[TowerValue], b: &[TowerValue], eps: f64, consts: (f64, f64)) -> Result<Separation> {
    if !(eps > 0.0) {
        return Err(LabError::Domain(format!("eps = {eps} must be positive")));
    }
    for (name, s) in [("first", a), ("second", b)] {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Invariant(format!("{name} τ-sequence is not strictly increasing")));
        }
    }
    let dc = (consts.0 - consts.1).abs();
    if let Some(c) = inductive(a, b, eps, dc).or_else(|| inductive(b, a, eps, dc)) {
        return Ok(Separation::Certified(c));
    }
    if let Some(c) = numeric_tail(a, b, eps) {
        return Ok(Separation::Certified(c));
    }
    Ok(Separation::Refused { reason: format!("the sequences come within {eps} in every recorded tail") })
}

fn dist(x: &TowerValue, y: &TowerValue) -> TowerValue {
    x.abs_diff(y)
}

/// Smallest distance between the two sets; `None` if either is empty.
fn min_distance(a: &[TowerValue], b: &[TowerValue]) -> Option<TowerValue> {
    let (mut i, mut j) = (0, 0);
    let mut best: Option<TowerValue> = None;
    while i < a.len() && j < b.len() {
        let d = dist(&a[i], &b[j]);
        best = Some(match best {
            Some(m) if m <= d => m,
            _ => d,
        });
        if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    best
}

fn inductive(a: &[TowerValue], b: &[TowerValue], eps: f64, dc: f64) -> Option<SeparationCertificate> {
    let e = TowerValue::from_f64(eps);
    let one = TowerValue::from_f64(1.0);
    for (k0, ak) in a.iter().enumerate() {
        let upper0 = b.partition_point(|x| x < ak);
        let lower = upper0.checked_sub(1).map(|i| &b[i]);
        let upper = b.get(upper0)?;
        if dist(ak, upper) < e || lower.is_some_and(|l| dist(ak, l) < e) {
            continue;
        }
        let reference = lower.unwrap_or(ak);
        // e^{ref}·eps − |ΔC| > 1
        if reference.exp().mul_const(eps) <= TowerValue::from_f64(1.0 + dc) {
            continue;
        }
        let (ta, tb) = (&a[(k0 + 1).min(a.len())..], &b[(upper0 + 1).min(b.len())..]);
        if ta.is_empty() || tb.is_empty() {
            continue;
        }
        if min_distance(ta, tb).is_some_and(|d| d >= one) {
            return Some(SeparationCertificate {
                index_m: (k0 + 1).max(upper0 + 1),
                gap: 1.0,
                mode: SeparationMode::InductiveTower,
                witness: Some((k0 + 1, upper0 + 1)),
            });
        }
    }
    None
}

fn numeric_tail(a: &[TowerValue], b: &[TowerValue], eps: f64) -> Option<SeparationCertificate> {
    let e = TowerValue::from_f64(eps);
    let last = a.len().min(b.len()).checked_sub(2)?;
    (0..=last).find_map(|m| {
        let d = min_distance(&a[m..], &b[m..])?;
        (d >= e).then(|| SeparationCertificate {
            index_m: m,
            gap: d.to_f64(),
            mode: SeparationMode::NumericTail,
            witness: None,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(xs: &[f64]) -> Vec<TowerValue> {
        xs.iter().map(|&x| TowerValue::from_f64(x)).collect()
    }

    #[test]
    fn inductive_fires_at_first_pair() {
        let e = std::f64::consts::E;
        let a = tv(&[1.0, e, e.powf(e)]);
        let b = tv(&[2.0, e * e, (e * e).exp()]);
        let s = separation_analysis(&a, &b, 0.5, (0.0, 0.0)).unwrap();
        let c = s.certificate().unwrap();
        assert_eq!(c.mode, SeparationMode::InductiveTower);
        assert_eq!(c.witness, Some((1, 1)));
        assert_eq!(c.gap, 1.0);
    }

    #[test]
    fn identical_refused() {
        let a = tv(&[1.0, 2.0, 5.0, 9.0]);
        let s = separation_analysis(&a, &a, 0.1, (0.0, 0.0)).unwrap();
        assert!(matches!(s, Separation::Refused { .. }));
    }

    #[test]
    fn loop_zetas_numeric_tail() {
        let a = tv(&[5.0, 10.0, 20.0, 40.0, 80.0]);
        let b = tv(&[4.0, 8.0, 16.0, 32.0, 64.0]);
        // no exponential recurrence here: huge ΔC keeps the inductive route off
        let s = separation_analysis(&a, &b, 0.5, (0.0, 1e300)).unwrap();
        let c = s.certificate().unwrap();
        assert_eq!(c.mode, SeparationMode::NumericTail);
        assert_eq!(c.index_m, 0);
        assert!((c.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let a = tv(&[1.0, 1.0]);
        assert!(separation_analysis(&a, &a, 0.1, (0.0, 0.0)).is_err());
        assert!(separation_analysis(&tv(&[1.0]), &tv(&[2.0]), 0.0, (0.0, 0.0)).is_err());
    }
}
