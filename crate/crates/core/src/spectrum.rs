//! Exhaustive enumeration of every assignment of a model.
//!
//! The state space is cut into `2^p` chunks by fixing the top `p` bits. Each
//! chunk is walked in Gray-code order so a step costs one local-field update
//! instead of a full evaluation. Chunk results merge associatively (min, max,
//! counts, histograms), so the report does not depend on how chunks are
//! scheduled.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::exec::Execution;
use crate::model::{CompiledQubo, QuboModel};
use crate::spin::{SpinKind, SpinVector};

pub const DEFAULT_MAX_VARS: usize = 28;
pub const DEFAULT_MAX_GROUND_STATES: usize = 1024;
/// Bin tolerance for models with non-integer coefficients.
pub const REAL_TOLERANCE: f64 = 1e-9;

const MIN_CHUNK_BITS: usize = 12;
const MAX_SPLIT_BITS: usize = 10;
const RESYNC_EVERY: u64 = 256;

#[derive(Debug, Clone, Copy)]
pub struct SpectrumLimits {
    pub max_vars: usize,
    pub max_ground_states: usize,
    pub exec: Execution,
}

impl Default for SpectrumLimits {
    fn default() -> Self {
        Self {
            max_vars: DEFAULT_MAX_VARS,
            max_ground_states: DEFAULT_MAX_GROUND_STATES,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub n_vars: usize,
    pub n_states: u64,
    pub e_min: f64,
    /// Smallest distinct energy above `e_min`; `None` for constant models.
    pub e_second: Option<f64>,
    pub e_max: f64,
    /// First `max_ground_states` ground states in index order.
    pub ground_states: Vec<SpinVector>,
    pub ground_count: u64,
    pub gap: Option<f64>,
    pub spread: f64,
    pub dynamic_range: Option<f64>,
    /// True when every state has the same energy (gap and dynamic range
    /// are undefined).
    pub constant: bool,
    pub integral: bool,
    /// Distinct energies in ascending order with their state counts.
    pub histogram: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    Exact,
    FixedWidth(f64),
}

#[derive(Debug, Default)]
struct Partial {
    min: f64,
    max: f64,
    ground: Vec<u64>,
    ground_count: u64,
    bins: HashMap<u64, u64>,
}

impl Partial {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ..Self::default()
        }
    }

    #[inline]
    fn record(&mut self, state: u64, e: f64, tol: f64, cap: usize) {
        // -0.0 and 0.0 share a bin
        let e = e + 0.0;
        *self.bins.entry(e.to_bits()).or_insert(0) += 1;
        if e > self.max {
            self.max = e;
        }
        if e < self.min - tol {
            self.min = e;
            self.ground.clear();
            self.ground.push(state);
            self.ground_count = 1;
        } else if e <= self.min + tol {
            self.min = self.min.min(e);
            self.ground_count += 1;
            if self.ground.len() < cap {
                self.ground.push(state);
            }
        }
    }

    fn merge(mut self, other: Partial, tol: f64, cap: usize) -> Partial {
        for (k, c) in other.bins {
            *self.bins.entry(k).or_insert(0) += c;
        }
        self.max = self.max.max(other.max);
        if other.min < self.min - tol {
            self.min = other.min;
            self.ground = other.ground;
            self.ground_count = other.ground_count;
        } else if other.min <= self.min + tol {
            self.min = self.min.min(other.min);
            self.ground_count += other.ground_count;
            let room = cap.saturating_sub(self.ground.len());
            self.ground.extend(other.ground.into_iter().take(room));
        }
        self
    }
}

fn walk_chunk(model: &CompiledQubo, high: u64, low_bits: usize, tol: f64, cap: usize) -> Partial {
    let n = model.n_vars();
    let mut x = SpinVector::from_index(high << low_bits, n, SpinKind::Binary);
    let mut fields: Vec<f64> = (0..n).map(|i| model.local_field(i, &x)).collect();
    let mut e = model.energy(&x);
    let mut state = high << low_bits;
    let mut part = Partial::empty();
    part.record(state, e, tol, cap);
    let exact = model.is_integral();
    for t in 1..(1u64 << low_bits) {
        let j = t.trailing_zeros() as usize;
        let on = x.get(j);
        e += if on { -fields[j] } else { fields[j] };
        x.flip(j);
        state ^= 1 << j;
        let sign = if on { -1.0 } else { 1.0 };
        for (k, c) in model.neighbors(j) {
            fields[k] += sign * c;
        }
        if !exact && t % RESYNC_EVERY == 0 {
            e = model.energy(&x);
            for (i, f) in fields.iter_mut().enumerate() {
                *f = model.local_field(i, &x);
            }
        }
        part.record(state, e, tol, cap);
    }
    part
}

/// Energies and counts of all `2^n` states.
pub fn enumerate_spectrum(model: &QuboModel, limits: SpectrumLimits) -> Result<SpectrumReport> {
    let n = model.n_vars();
    let cap_vars = limits.max_vars.min(63);
    if n > cap_vars {
        return Err(Error::TooLarge { n, cap: cap_vars });
    }
    let compiled = model.compile();
    let integral = compiled.is_integral();
    let tol = if integral { 0.0 } else { REAL_TOLERANCE };
    let cap = limits.max_ground_states;

    let split = n.saturating_sub(MIN_CHUNK_BITS).min(MAX_SPLIT_BITS);
    let low_bits = n - split;
    let parts = limits.exec.map_indices(1usize << split, |high| {
        walk_chunk(&compiled, high as u64, low_bits, tol, cap)
    });
    let total = parts
        .into_iter()
        .fold(Partial::empty(), |acc, p| acc.merge(p, tol, cap));

    let mut histogram: Vec<(f64, u64)> = total.bins.into_iter().map(|(k, c)| (f64::from_bits(k), c)).collect();
    histogram.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !integral {
        histogram = merge_close(histogram, tol);
    }

    let mut ground = total.ground;
    ground.sort_unstable();
    let e_min = histogram[0].0;
    let e_max = histogram.last().unwrap().0;
    let e_second = histogram.get(1).map(|b| b.0);
    let spread = e_max - e_min;
    let gap = e_second.map(|s| s - e_min);
    let constant = e_second.is_none();
    Ok(SpectrumReport {
        n_vars: n,
        n_states: 1u64 << n,
        e_min,
        e_second,
        e_max,
        ground_states: ground
            .into_iter()
            .map(|s| SpinVector::from_index(s, n, SpinKind::Binary))
            .collect(),
        ground_count: total.ground_count,
        gap,
        spread,
        dynamic_range: gap.map(|g| g / spread),
        constant,
        integral,
        histogram,
    })
}

/// Joins sorted bins whose energies lie within `tol` of the bin's first
/// energy.
fn merge_close(sorted: Vec<(f64, u64)>, tol: f64) -> Vec<(f64, u64)> {
    let mut out: Vec<(f64, u64)> = Vec::with_capacity(sorted.len());
    for (e, c) in sorted {
        match out.last_mut() {
            Some((head, count)) if e - *head <= tol => *count += c,
            _ => out.push((e, c)),
        }
    }
    out
}

impl SpectrumReport {
    /// Gap over spread; undefined for constant spectra.
    pub fn dynamic_range(&self) -> Result<f64> {
        self.dynamic_range
            .ok_or_else(|| Error::Undefined("dynamic range of a constant spectrum".into()))
    }

    /// Number of states whose energy lies within `tol` of `energy`.
    pub fn degeneracy(&self, energy: f64, tol: f64) -> u64 {
        self.histogram
            .iter()
            .filter(|(e, _)| (e - energy).abs() <= tol)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn histogram_table(&self, binning: Binning) -> Result<Vec<(f64, u64)>> {
        match binning {
            Binning::Exact => Ok(self.histogram.clone()),
            Binning::FixedWidth(w) => {
                if !(w > 0.0) || !w.is_finite() {
                    return arg_err(format!("bin width must be positive, got {w}"));
                }
                let n_bins = ((self.spread / w).floor() as usize) + 1;
                let mut counts = vec![0u64; n_bins];
                for &(e, c) in &self.histogram {
                    let k = (((e - self.e_min) / w).floor() as usize).min(n_bins - 1);
                    counts[k] += c;
                }
                Ok(counts
                    .into_iter()
                    .enumerate()
                    .map(|(k, c)| (self.e_min + (k as f64 + 0.5) * w, c))
                    .collect())
            }
        }
    }

    /// Writes `bin_center,count` rows.
    pub fn write_histogram_csv<W: Write>(&self, binning: Binning, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_center", "count"])?;
        for (center, count) in self.histogram_table(binning)? {
            w.write_record([center.to_string(), count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn dynamic_range(report: &SpectrumReport) -> Result<f64> {
    report.dynamic_range()
}

pub fn degeneracy(report: &SpectrumReport, energy: f64, tol: f64) -> u64 {
    report.degeneracy(energy, tol)
}

pub fn histogram_export(report: &SpectrumReport, binning: Binning) -> Result<Vec<(f64, u64)>> {
    report.histogram_table(binning)
}

/// Indices of strict local maxima of a binned table; plateaus count once, at
/// their first bin. End bins qualify when they exceed their single neighbor.
pub fn local_maxima(table: &[(f64, u64)]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < table.len() {
        let mut j = i;
        while j + 1 < table.len() && table[j + 1].1 == table[i].1 {
            j += 1;
        }
        let c = table[i].1;
        let left_ok = i == 0 || table[i - 1].1 < c;
        let right_ok = j + 1 == table.len() || table[j + 1].1 < c;
        if c > 0 && left_ok && right_ok {
            peaks.push(i);
        }
        i = j + 1;
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Labels;
    use crate::problem::gcp::{build_gcp_qubo, gen_complete_kpartite, GcpParams};

    /// Straight per-state evaluation through the sparse model.
    fn naive(model: &QuboModel) -> (f64, f64, Vec<(f64, u64)>) {
        let n = model.n_vars();
        let mut map: std::collections::BTreeMap<i64, u64> = Default::default();
        for s in 0..(1u64 << n) {
            let e = model.energy(&SpinVector::from_index(s, n, SpinKind::Binary)).unwrap();
            *map.entry(e as i64).or_insert(0) += 1;
        }
        let hist: Vec<(f64, u64)> = map.into_iter().map(|(e, c)| (e as f64, c)).collect();
        (hist[0].0, hist.last().unwrap().0, hist)
    }

    fn random_integer_model(n: usize, seed: u64) -> QuboModel {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut b = QuboModel::builder(n);
        for i in 0..n {
            b.add_linear(i, rng.gen_range(-9..=9) as f64).unwrap();
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    b.add_quadratic(i, j, rng.gen_range(-9..=9) as f64).unwrap();
                }
            }
        }
        b.add_offset(rng.gen_range(-5..=5) as f64);
        b.build()
    }

    #[test]
    fn matches_naive_evaluator() {
        for (n, seed) in [(1, 1), (5, 2), (13, 3), (16, 4)] {
            let q = random_integer_model(n, seed);
            let r = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
            let (lo, hi, hist) = naive(&q);
            assert_eq!(r.e_min, lo);
            assert_eq!(r.e_max, hi);
            assert_eq!(r.histogram, hist);
            assert_eq!(r.histogram.iter().map(|b| b.1).sum::<u64>(), 1 << n);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let q = random_integer_model(17, 9);
        let seq = enumerate_spectrum(
            &q,
            SpectrumLimits {
                exec: Execution::Sequential,
                ..SpectrumLimits::default()
            },
        )
        .unwrap();
        let par = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn constant_model_flags_undefined_range() {
        let q = QuboModel::zero(3).shifted(2.0);
        let r = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        assert!(r.constant);
        assert_eq!(r.histogram, vec![(2.0, 8)]);
        assert!(matches!(r.dynamic_range(), Err(Error::Undefined(_))));
        assert_eq!(r.ground_count, 8);
    }

    #[test]
    fn cap_is_enforced() {
        let q = QuboModel::zero(30);
        assert!(matches!(
            enumerate_spectrum(&q, SpectrumLimits::default()),
            Err(Error::TooLarge { n: 30, cap: 28 })
        ));
    }

    #[test]
    fn gcp_ground_truth() {
        let g = gen_complete_kpartite(6, 3).unwrap();
        let q = build_gcp_qubo(&g, GcpParams { a: 1.0, b: 1.0 });
        let r = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        assert_eq!(r.n_states, 1 << 18);
        assert_eq!(r.e_min, 0.0);
        assert_eq!(r.ground_count, 6);
        assert_eq!(r.degeneracy(0.0, 0.0), 6);
        assert_eq!(r.degeneracy(-1.0, 0.0), 0);
        assert_eq!(r.gap, Some(1.0));
    }

    #[test]
    fn ground_list_is_capped_but_counted() {
        let q = QuboModel::zero(10);
        let r = enumerate_spectrum(
            &q,
            SpectrumLimits {
                max_ground_states: 7,
                ..SpectrumLimits::default()
            },
        )
        .unwrap();
        assert_eq!(r.ground_states.len(), 7);
        assert_eq!(r.ground_count, 1024);
    }

    #[test]
    fn real_coefficients_bin_within_tolerance() {
        let q = QuboModel::from_terms(3, [(0, 0.1), (1, 0.2), (2, 0.3)], [(0, 2, 0.7)], 0.0, Labels::new()).unwrap();
        let r = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        assert!(!r.integral);
        // 0.1 + 0.2 and 0.3 are one level
        assert_eq!(r.degeneracy(0.3, 1e-9), 2);
        assert_eq!(r.histogram.iter().map(|b| b.1).sum::<u64>(), 8);
    }

    #[test]
    fn dynamic_range_scale_invariant() {
        let q = random_integer_model(10, 21);
        let r1 = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        let r2 = enumerate_spectrum(&q.scaled(8.0), SpectrumLimits::default()).unwrap();
        assert_eq!(r1.dynamic_range().unwrap(), r2.dynamic_range().unwrap());
    }

    #[test]
    fn fixed_width_binning() {
        let q = random_integer_model(12, 5);
        let r = enumerate_spectrum(&q, SpectrumLimits::default()).unwrap();
        for w in [0.5, 3.0, 40.0] {
            let t = r.histogram_table(Binning::FixedWidth(w)).unwrap();
            assert_eq!(t.iter().map(|b| b.1).sum::<u64>(), 4096);
        }
        assert!(r.histogram_table(Binning::FixedWidth(0.0)).is_err());
        assert!(r.histogram_table(Binning::FixedWidth(-1.0)).is_err());

        let mut buf = Vec::new();
        r.write_histogram_csv(Binning::Exact, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("bin_center,count\n"));
        assert_eq!(text.lines().count(), r.histogram.len() + 1);
    }

    #[test]
    fn peaks() {
        let t: Vec<(f64, u64)> = [5, 1, 0, 3, 3, 1, 2]
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64, c))
            .collect();
        assert_eq!(local_maxima(&t), vec![0, 3, 6]);
    }

    #[test]
    fn dynamic_range_from_quantities() {
        let r = SpectrumReport {
            n_vars: 0,
            n_states: 1,
            e_min: -489.0,
            e_second: Some(-488.0),
            e_max: 1945.0,
            ground_states: vec![],
            ground_count: 1,
            gap: Some(1.0),
            spread: 2434.0,
            dynamic_range: Some(1.0 / 2434.0),
            constant: false,
            integral: true,
            histogram: vec![],
        };
        assert!((dynamic_range(&r).unwrap() - 4.11e-4).abs() < 1e-6);
    }
}
