//! Penalty-weight sweeps: for each `(A, B)` grid point build the QUBO,
//! measure its dynamic range when the spectrum is enumerable, sample it and
//! count converged reads.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anneal::{count_convergence, read_rng, sa_sample_with, Predicate, SaConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::AnyModel;
use crate::problem::{pmsp, Instance};
use crate::spectrum::{enumerate_spectrum, SpectrumLimits, DEFAULT_MAX_VARS};

pub const CSV_HEADER: [&str; 8] = [
    "A",
    "B",
    "x_axis",
    "dynamic_range",
    "ground_count",
    "practical_count",
    "n_reads",
    "seed",
];
pub const NORMALIZED_COLUMN: &str = "ground_normalized";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    File { file: PathBuf },
    Inline(Instance),
}

impl InstanceRef {
    pub fn load(&self) -> Result<Instance> {
        match self {
            InstanceRef::Inline(i) => Ok(i.clone()),
            InstanceRef::File { file } => {
                let text = fs::read_to_string(file)
                    .map_err(|e| Error::Config(format!("cannot read instance {}: {e}", file.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad instance {}: {e}", file.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One grid axis: a constant, an explicit list, or an evenly spaced range
/// with both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        steps: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Axis::Value(x) => vec![*x],
            Axis::List(xs) => xs.clone(),
            &Axis::Range {
                start,
                stop,
                steps,
                spacing,
            } => {
                if steps == 0 {
                    return Err(Error::Config("range needs at least one step".into()));
                }
                if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                    return Err(Error::Config("log range needs positive ends".into()));
                }
                let last = (steps.max(2) - 1) as f64;
                (0..steps)
                    .map(|k| {
                        let f = k as f64 / last;
                        if k == 0 || k + 1 == steps {
                            // exact endpoints, not exp(ln(stop))
                            return if k == 0 { start } else { stop };
                        }
                        match spacing {
                            Spacing::Linear => start + f * (stop - start),
                            Spacing::Log => (start.ln() + f * (stop.ln() - start.ln())).exp(),
                        }
                    })
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config("empty axis".into()));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("non-finite grid value {bad}")));
        }
        Ok(v)
    }
}

/// Explicit points, an `A x B` product, or (scheduling only) a product of
/// target term ratios and `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points { points: Vec<(f64, f64)> },
    TermRatio { term_ratio: Axis, b: Axis },
    Product { a: Axis, b: Axis },
}

impl Grid {
    /// Concrete `(A, B)` pairs, `A`-major.
    pub fn expand(&self, instance: &Instance) -> Result<Vec<(f64, f64)>> {
        let pts = match self {
            Grid::Points { points } => points.clone(),
            Grid::Product { a, b } => {
                let bs = b.values()?;
                a.values()?
                    .into_iter()
                    .flat_map(|x| bs.iter().map(move |&y| (x, y)))
                    .collect()
            }
            Grid::TermRatio { term_ratio, b } => {
                let Instance::Pmsp(p) = instance else {
                    return Err(Error::Config(
                        "term_ratio grids apply to scheduling instances only".into(),
                    ));
                };
                let bs = b.values()?;
                let mut out = Vec::new();
                for r in term_ratio.values()? {
                    for &y in &bs {
                        out.push((pmsp::a_for_term_ratio(p, y, r), y));
                    }
                }
                out
            }
        };
        if pts.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if let Some(&(a, b)) = pts.iter().find(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::Config(format!("non-finite grid point ({a}, {b})")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Count {
    Ground,
    Practical,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_cap() -> usize {
    DEFAULT_MAX_VARS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub instance: InstanceRef,
    pub grid: Grid,
    #[serde(default)]
    pub sampler: SaConfig,
    /// Defaults to ground, plus practical for scheduling instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicates: Option<Vec<Count>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Emit `ground_count / (n_reads * ground degeneracy)` as an extra column.
    #[serde(default)]
    pub normalize_degeneracy: bool,
    #[serde(default = "default_tol")]
    pub ground_tol: f64,
    #[serde(default = "default_cap")]
    pub spectrum_max_vars: usize,
}

impl SweepSpec {
    pub fn new(instance: Instance, grid: Grid, sampler: SaConfig) -> Self {
        Self {
            instance: InstanceRef::Inline(instance),
            grid,
            sampler,
            predicates: None,
            output: None,
            normalize_degeneracy: false,
            ground_tol: default_tol(),
            spectrum_max_vars: default_cap(),
        }
    }

    /// Reads a spec file; relative instance and output paths resolve
    /// against the spec's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read sweep spec {}: {e}", path.display())))?;
        let mut spec: SweepSpec = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad sweep spec {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InstanceRef::File { file } = &mut spec.instance {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if let Some(out) = &mut spec.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(spec)
    }

    fn counts(&self, instance: &Instance) -> Result<(bool, bool)> {
        let is_pmsp = matches!(instance, Instance::Pmsp(_));
        match &self.predicates {
            None => Ok((true, is_pmsp)),
            Some(list) => {
                let practical = list.contains(&Count::Practical);
                if practical && !is_pmsp {
                    return Err(Error::Config(format!(
                        "practical counts need a scheduling instance, got {}",
                        instance.kind()
                    )));
                }
                Ok((list.contains(&Count::Ground), practical))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub a: f64,
    pub b: f64,
    pub x_axis: f64,
    pub dynamic_range: Option<f64>,
    pub ground_count: Option<u64>,
    pub practical_count: Option<u64>,
    pub n_reads: u64,
    pub seed: u64,
    /// Number of ground states, when the spectrum was enumerated.
    pub ground_degeneracy: Option<u64>,
}

impl SweepRecord {
    pub fn ground_normalized(&self) -> Option<f64> {
        match (self.ground_count, self.ground_degeneracy) {
            (Some(c), Some(d)) if d > 0 => Some(c as f64 / (self.n_reads as f64 * d as f64)),
            _ => None,
        }
    }
}

/// Seed for grid point `index`, drawn from the master seed's stream
/// `index`.
pub fn point_seed(master: u64, index: usize) -> u64 {
    read_rng(master, index as u64).gen()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRecord>> {
    spec.sampler
        .validate()
        .map_err(|e| Error::Config(format!("sampler: {e}")))?;
    if !(spec.ground_tol >= 0.0) {
        return Err(Error::Config("ground_tol must be non-negative".into()));
    }
    let instance = spec.instance.load()?;
    let points = spec.grid.expand(&instance)?;
    let (want_ground, want_practical) = spec.counts(&instance)?;
    let n = instance.n_vars()?;
    let enumerate = n <= spec.spectrum_max_vars;
    if !enumerate {
        warn!(
            "{n} variables exceed the enumeration cap {}; dynamic range skipped",
            spec.spectrum_max_vars
        );
        if want_ground && instance.expected_ground_energy().is_none() {
            return Err(Error::Config(
                "ground energy unknown and spectrum not enumerable".into(),
            ));
        }
    }
    let indexed: Vec<(usize, (f64, f64))> = points.into_iter().enumerate().collect();
    let records = exec.map_slice(&indexed, |&(idx, (a, b))| {
        let qubo = instance.build_qubo(a, b)?;
        let spectrum = if enumerate {
            let limits = SpectrumLimits {
                max_vars: spec.spectrum_max_vars,
                max_ground_states: 0,
                exec,
            };
            Some(enumerate_spectrum(&qubo, limits)?)
        } else {
            None
        };
        let seed = point_seed(spec.sampler.seed, idx);
        let cfg = SaConfig {
            seed,
            ..spec.sampler.clone()
        };
        let set = sa_sample_with(&AnyModel::Qubo(qubo), &cfg, exec)?;
        let e_min = spectrum
            .as_ref()
            .map(|s| s.e_min)
            .or_else(|| instance.expected_ground_energy());
        let ground_count = if want_ground {
            Some(count_convergence(
                &set,
                Predicate::Ground {
                    e_min,
                    tol: spec.ground_tol,
                },
            )?)
        } else {
            None
        };
        let practical_count = match (&instance, want_practical) {
            (Instance::Pmsp(p), true) => Some(count_convergence(&set, Predicate::Practical(p))?),
            _ => None,
        };
        Ok(SweepRecord {
            a,
            b,
            x_axis: instance.x_axis(a, b),
            dynamic_range: spectrum.as_ref().and_then(|s| s.dynamic_range),
            ground_count,
            practical_count,
            n_reads: set.n_reads(),
            seed,
            ground_degeneracy: spectrum.as_ref().map(|s| s.ground_count),
        })
    });
    records.into_iter().collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], normalized: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if normalized {
        header.push(NORMALIZED_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.a.to_string(),
            r.b.to_string(),
            r.x_axis.to_string(),
            opt(r.dynamic_range),
            opt(r.ground_count),
            opt(r.practical_count),
            r.n_reads.to_string(),
            r.seed.to_string(),
        ];
        if normalized {
            row.push(opt(r.ground_normalized()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes through a sibling temp file and a rename, so readers never see a
/// partial CSV.
pub fn write_sweep_csv_atomic(records: &[SweepRecord], normalized: bool, path: &Path) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .map_err(Error::from)
        .and_then(|f| {
            let mut f = std::io::BufWriter::new(f);
            write_sweep_csv(records, normalized, &mut f)?;
            f.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
            Ok(())
        })
        .and_then(|_| fs::rename(&tmp, path).map_err(Error::from));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Runs the sweep and writes the CSV when the spec names an output.
pub fn execute(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRecord>> {
    let records = run_sweep_with(spec, exec)?;
    if let Some(path) = &spec.output {
        write_sweep_csv_atomic(&records, spec.normalize_degeneracy, path)?;
    }
    Ok(records)
}
