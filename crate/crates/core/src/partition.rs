//! Labelled partitions of a horizon `[0, H]` in fixed-point ticks.
//!
//! Cut points are stored as integer fractions of `H` (2^62 ticks), so segment
//! lengths telescope exactly: refining a partition by another one never
//! changes the per-label totals of either. This is what makes product
//! histograms marginalize exactly onto their factors.

use std::collections::BTreeSet;

pub const TICKS: u64 = 1 << 62;

pub fn to_ticks(fraction: f64) -> u64 {
    if !(fraction > 0.0) {
        return 0;
    }
    if fraction >= 1.0 {
        return TICKS;
    }
    (fraction * TICKS as f64) as u64
}

pub fn ticks_to_fraction(t: u64) -> f64 {
    t as f64 / TICKS as f64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cuts: Vec<u64>,
    labels: Vec<u32>,
}

impl Partition {
    /// Start in `initial`; each `(fraction, label)` switches label at that
    /// point of the horizon. Fractions are clamped to be non-decreasing.
    pub fn from_switches<I>(initial: u32, switches: I) -> Partition
    where
        I: IntoIterator<Item = (f64, u32)>,
    {
        let mut cuts = vec![0u64];
        let mut labels = vec![initial];
        for (f, label) in switches {
            let t = to_ticks(f).max(*cuts.last().unwrap());
            if t >= TICKS {
                break;
            }
            if *labels.last().unwrap() == label {
                continue;
            }
            if t == *cuts.last().unwrap() {
                // zero-length segment: overwrite its label
                *labels.last_mut().unwrap() = label;
                if labels.len() >= 2 && labels[labels.len() - 2] == label {
                    labels.pop();
                    cuts.pop();
                }
                continue;
            }
            cuts.push(t);
            labels.push(label);
        }
        cuts.push(TICKS);
        Partition { cuts, labels }
    }

    /// One label over the whole horizon.
    pub fn constant(label: u32) -> Partition {
        Partition { cuts: vec![0, TICKS], labels: vec![label] }
    }

    pub fn segments(&self) -> impl Iterator<Item = (u64, u64, u32)> + '_ {
        self.labels.iter().enumerate().map(|(i, &l)| (self.cuts[i], self.cuts[i + 1], l))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Tick totals per label, `n_labels` slots.
    pub fn tick_totals(&self, n_labels: usize) -> Vec<u64> {
        let mut out = vec![0u64; n_labels];
        for (a, b, l) in self.segments() {
            out[l as usize] += b - a;
        }
        out
    }

    pub fn label_at(&self, tick: u64) -> u32 {
        let i = match self.cuts.binary_search(&tick) {
            Ok(i) => i.min(self.labels.len() - 1),
            Err(i) => i - 1,
        };
        self.labels[i]
    }

    /// Common refinement; joint label is `a * m_other + b`.
    pub fn product(&self, other: &Partition, m_other: u32) -> Partition {
        let mut cuts = vec![0u64];
        let mut labels = Vec::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.labels.len() && j < other.labels.len() {
            labels.push(self.labels[i] * m_other + other.labels[j]);
            let (ei, ej) = (self.cuts[i + 1], other.cuts[j + 1]);
            let e = ei.min(ej);
            cuts.push(e);
            if ei == e {
                i += 1;
            }
            if ej == e {
                j += 1;
            }
        }
        Partition { cuts, labels }
    }

    /// Labels of segments with positive length inside `[from, TICKS]`.
    pub fn labels_after(&self, from: u64) -> BTreeSet<u32> {
        self.segments().filter(|&(_, b, _)| b > from).map(|(_, _, l)| l).collect()
    }

    /// Tick where the last `quarter` share of segments begins.
    pub fn tail_start(&self, share: f64) -> u64 {
        let n = self.labels.len();
        let k = ((n as f64) * share).ceil() as usize;
        let k = k.clamp(1, n);
        self.cuts[n - k]
    }
}
