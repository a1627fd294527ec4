//! Simulated annealing stand-in for an annealer QPU.
//!
//! Each read starts from a uniformly random state and performs
//! `sweeps_per_read` Metropolis sweeps (variables visited in index order)
//! while beta follows the schedule. The state left at the end of the last
//! sweep is the read's answer.
//!
//! When `beta_start`/`beta_end` are unset they are derived from the
//! model's coefficient scale so that only the *relative* size of energy
//! gaps matters, much like an annealer that rescales every problem into a
//! fixed coefficient range: `beta = factor / s`, where `s` is the mean of
//! the per-variable single-flip bounds `|a_i| + sum_j |b_ij|`.
//!
//! Read `r` draws from its own ChaCha stream `(seed, r)`, so serial and
//! parallel runs produce identical sample sets.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::exec::Execution;
use crate::model::{AnyModel, CompiledQubo, QuboModel};
use crate::problem::pmsp::{is_practical_correct, PmspInstance};
use crate::spin::{SpinKind, SpinVector};

/// Default `beta_start * s`.
pub const DEFAULT_HOT_FACTOR: f64 = 0.1;
/// Default `beta_end * s`.
pub const DEFAULT_COLD_FACTOR: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Geometric,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub n_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_start: Option<f64>,
    pub beta_end: Option<f64>,
    pub schedule: Schedule,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            n_reads: 1000,
            sweeps_per_read: 200,
            beta_start: None,
            beta_end: None,
            schedule: Schedule::Geometric,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reads == 0 {
            return arg_err("n_reads must be at least 1");
        }
        if self.sweeps_per_read == 0 {
            return arg_err("sweeps_per_read must be at least 1");
        }
        for (name, b) in [("beta_start", self.beta_start), ("beta_end", self.beta_end)] {
            if let Some(b) = b {
                if !(b > 0.0) || !b.is_finite() {
                    return arg_err(format!("{name} must be positive and finite, got {b}"));
                }
            }
        }
        if let (Some(s), Some(e)) = (self.beta_start, self.beta_end) {
            if s >= e {
                return arg_err(format!("beta_start {s} must be below beta_end {e}"));
            }
        }
        Ok(())
    }

    /// Concrete `(beta_start, beta_end)` for a compiled model.
    pub fn resolve_betas(&self, model: &CompiledQubo) -> Result<(f64, f64)> {
        self.validate()?;
        let scale = coefficient_scale(model);
        let start = self.beta_start.unwrap_or(DEFAULT_HOT_FACTOR / scale);
        let end = self.beta_end.unwrap_or(DEFAULT_COLD_FACTOR / scale);
        if start >= end {
            return arg_err(format!("resolved beta_start {start} is not below beta_end {end}"));
        }
        Ok((start, end))
    }
}

/// Mean single-flip bound over variables; 1 for constant models.
pub fn coefficient_scale(model: &CompiledQubo) -> f64 {
    let n = model.n_vars();
    if n == 0 {
        return 1.0;
    }
    let mean = (0..n).map(|i| model.flip_bound(i)).sum::<f64>() / n as f64;
    if mean > 0.0 {
        mean
    } else {
        1.0
    }
}

pub fn beta_schedule(kind: Schedule, start: f64, end: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![end];
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|t| {
            let f = t as f64 / last;
            match kind {
                Schedule::Geometric => (start.ln() + f * (end.ln() - start.ln())).exp(),
                Schedule::Linear => start + f * (end - start),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: SpinVector,
    pub energy: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// Distinct states, ascending by energy then bit string.
    pub samples: Vec<Sample>,
    pub config: SampleConfigEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfigEcho {
    pub sampler: String,
    pub n_reads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps_per_read: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// FNV-1a of the model's JSON form.
    pub model_fingerprint: String,
}

impl SampleSet {
    pub fn n_reads(&self) -> u64 {
        self.samples.iter().map(|s| s.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn lowest(&self) -> Option<&Sample> {
        self.samples.first()
    }

    /// Groups per-read states into distinct samples; energies come from
    /// `model`.
    pub fn from_reads(
        model: &AnyModel,
        reads: impl IntoIterator<Item = SpinVector>,
        config: SampleConfigEcho,
    ) -> Result<Self> {
        let mut counts: BTreeMap<String, (SpinVector, u64)> = BTreeMap::new();
        for r in reads {
            counts.entry(r.to_bit_string()).or_insert_with(|| (r.clone(), 0)).1 += 1;
        }
        let kind = model.native_kind();
        let mut samples = counts
            .into_values()
            .map(|(state, count)| {
                let energy = model.energy(&state)?;
                Ok(Sample {
                    state: state.with_kind(kind),
                    energy,
                    count,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        samples.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.state.to_bit_string().cmp(&b.state.to_bit_string()))
        });
        Ok(Self { samples, config })
    }
}

pub fn model_fingerprint(model: &AnyModel) -> String {
    let text = serde_json::to_string(model).unwrap_or_default();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Anything that turns a model into reads.
pub trait Sampler {
    fn sample(&self, model: &AnyModel) -> Result<SampleSet>;
}

/// Out-of-tree sampler that speaks model JSON (e.g. a QPU client).
pub trait ExternalSampler {
    fn name(&self) -> &str;
    /// Returns one bit string per read.
    fn submit(&self, model_json: &str, n_reads: usize) -> Result<Vec<String>>;
}

/// Adapts an [`ExternalSampler`] to [`Sampler`]; energies are recomputed
/// locally, never trusted from the remote side.
pub struct ExternalAdapter<S> {
    pub inner: S,
    pub n_reads: usize,
}

impl<S: ExternalSampler> Sampler for ExternalAdapter<S> {
    fn sample(&self, model: &AnyModel) -> Result<SampleSet> {
        let json = serde_json::to_string(model)?;
        let reads = self.inner.submit(&json, self.n_reads)?;
        let states = reads
            .iter()
            .map(|r| {
                let s: SpinVector = r.parse()?;
                if s.len() != model.n_vars() {
                    return Err(Error::Dimension {
                        expected: model.n_vars(),
                        got: s.len(),
                    });
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        SampleSet::from_reads(
            model,
            states,
            SampleConfigEcho {
                sampler: self.inner.name().to_string(),
                n_reads: self.n_reads,
                sweeps_per_read: None,
                beta_start: None,
                beta_end: None,
                schedule: None,
                seed: None,
                model_fingerprint: model_fingerprint(model),
            },
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulatedAnnealer {
    pub config: SaConfig,
    pub exec: Execution,
}

impl Sampler for SimulatedAnnealer {
    fn sample(&self, model: &AnyModel) -> Result<SampleSet> {
        sa_sample_with(model, &self.config, self.exec)
    }
}

pub fn sa_sample(model: impl Into<AnyModel>, cfg: &SaConfig) -> Result<SampleSet> {
    sa_sample_with(&model.into(), cfg, Execution::default())
}

pub fn sa_sample_with(model: &AnyModel, cfg: &SaConfig, exec: Execution) -> Result<SampleSet> {
    if model.n_vars() == 0 {
        return arg_err("cannot sample a model without variables");
    }
    let qubo: QuboModel = model.to_qubo();
    let compiled = qubo.compile();
    let (b0, b1) = cfg.resolve_betas(&compiled)?;
    let betas = beta_schedule(cfg.schedule, b0, b1, cfg.sweeps_per_read);
    let reads = exec.map_indices(cfg.n_reads, |r| anneal_one(&compiled, &betas, cfg.seed, r as u64));
    SampleSet::from_reads(
        model,
        reads,
        SampleConfigEcho {
            sampler: "simulated-annealing".into(),
            n_reads: cfg.n_reads,
            sweeps_per_read: Some(cfg.sweeps_per_read),
            beta_start: Some(b0),
            beta_end: Some(b1),
            schedule: Some(cfg.schedule),
            seed: Some(cfg.seed),
            model_fingerprint: model_fingerprint(model),
        },
    )
}

/// Per-read generator: stream `read` of the ChaCha8 keyed by `seed`.
pub fn read_rng(seed: u64, read: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    rng
}

fn anneal_one(model: &CompiledQubo, betas: &[f64], seed: u64, read: u64) -> SpinVector {
    let n = model.n_vars();
    let mut rng = read_rng(seed, read);
    let mut x = SpinVector::zeros(n, SpinKind::Binary);
    for i in 0..n {
        x.set(i, rng.gen::<bool>());
    }
    let mut fields: Vec<f64> = (0..n).map(|i| model.local_field(i, &x)).collect();
    for &beta in betas {
        for i in 0..n {
            let on = x.get(i);
            let delta = if on { -fields[i] } else { fields[i] };
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                x.flip(i);
                let sign = if on { -1.0 } else { 1.0 };
                for (k, c) in model.neighbors(i) {
                    fields[k] += sign * c;
                }
            }
        }
    }
    x
}

/// Which reads count as converged.
#[derive(Debug, Clone, Copy)]
pub enum Predicate<'a> {
    /// Energy within `tol` of the ground energy.
    Ground { e_min: Option<f64>, tol: f64 },
    /// Scheduling state that is one-hot and reaches the known minimum
    /// makespan.
    Practical(&'a PmspInstance),
}

pub fn count_convergence(samples: &SampleSet, predicate: Predicate<'_>) -> Result<u64> {
    match predicate {
        Predicate::Ground { e_min, tol } => {
            let e_min = e_min.ok_or_else(|| Error::State("ground energy is unknown".into()))?;
            Ok(samples
                .samples
                .iter()
                .filter(|s| (s.energy - e_min).abs() <= tol)
                .map(|s| s.count)
                .sum())
        }
        Predicate::Practical(inst) => {
            if inst.known_min_makespan().is_none() {
                return Err(Error::State("instance has no known minimum makespan".into()));
            }
            let mut total = 0;
            for s in &samples.samples {
                if is_practical_correct(inst, &s.state)? {
                    total += s.count;
                }
            }
            Ok(total)
        }
    }
}
