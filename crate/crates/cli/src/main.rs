use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qubotune::anneal::{sa_sample_with, SaConfig, Schedule};
use qubotune::fit::{fit_scaling, fit_time_scaling};
use qubotune::polarity::{one_hot_ising, PolarityGroup};
use qubotune::problem::pmsp::{a_for_term_ratio, gen_balanced_instance};
use qubotune::problem::{cvcp, gcp, PmspInstance};
use qubotune::spectrum::{enumerate_spectrum, Binning, SpectrumLimits};
use qubotune::sweep::{execute, write_sweep_csv, SweepSpec};
use qubotune::{AnyModel, Error, Execution, Instance};

#[derive(Parser)]
#[command(
    name = "qubotune",
    version,
    about = "Penalty-weight tuning experiments for QUBO formulations"
)]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write machine output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a problem instance.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Build the QUBO (or Ising) model of an instance.
    Qubo(QuboArgs),
    /// Enumerate a model's spectrum.
    Spectrum(SpectrumArgs),
    /// Run a penalty-weight sweep from a JSON spec.
    Sweep(SweepArgs),
    /// Sample a model with simulated annealing.
    Sample(SampleArgs),
    /// Fit exponential scaling to (n_spins, value) points.
    Fit(FitArgs),
    /// Emit the k-hot polarity Ising model.
    Onehot(OnehotArgs),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Complete k-partite graph coloring instance.
    Gcp {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        colors: usize,
    },
    /// Disjoint cliques chained by single edges.
    Cvcp {
        /// Clique sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Number of colors; defaults to the number of cliques.
        #[arg(long)]
        colors: Option<usize>,
    },
    /// Parallel machine scheduling instance with its optimum solved.
    Pmsp {
        /// Job lengths, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "base",
            required_unless_present = "base"
        )]
        jobs: Vec<u64>,
        /// Base jobs for a balanced two-machine instance that defeats greedy.
        #[arg(long, value_delimiter = ',')]
        base: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        machines: usize,
        /// Slack bound M.
        #[arg(long = "slack", short = 'M')]
        slack: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Gcp,
    Cvcp,
    Pmsp,
}

#[derive(Args)]
struct QuboArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    file: PathBuf,
    #[arg(long = "A", required_unless_present = "term_ratio")]
    a: Option<f64>,
    #[arg(long = "B")]
    b: f64,
    /// Scheduling only: pick A so the one-hot/slack term ratio equals this.
    #[arg(long, conflicts_with = "a")]
    term_ratio: Option<f64>,
    /// Emit the Ising form.
    #[arg(long)]
    ising: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    model: PathBuf,
    /// Histogram bin width; exact energies when omitted.
    #[arg(long)]
    bin_width: Option<f64>,
    #[arg(long, default_value_t = qubotune::spectrum::DEFAULT_MAX_VARS)]
    max_vars: usize,
    /// Leave the histogram out of the JSON report.
    #[arg(long)]
    no_histogram: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    reads: usize,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long)]
    beta_start: Option<f64>,
    #[arg(long)]
    beta_end: Option<f64>,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Geometric)]
    schedule: ScheduleArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Geometric,
    Linear,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header and two columns: n_spins, probability (or time).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Treat values as run times, `T ~ exp(alpha N^beta)`.
    #[arg(long)]
    time: bool,
}

#[derive(Args)]
struct OnehotArgs {
    #[arg(long)]
    spins: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

/// Runtime failures exit 1; usage problems found after parsing exit 2.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let out = Output { path: cli.out.clone() };
    match cli.cmd {
        Cmd::Gen(g) => {
            json_only(cli.format)?;
            let inst = gen(g)?;
            out.json(&inst)
        }
        Cmd::Qubo(q) => {
            json_only(cli.format)?;
            qubo(q, &out)
        }
        Cmd::Spectrum(s) => spectrum(s, cli.format, exec, &out),
        Cmd::Sweep(s) => sweep(s, cli.seed, cli.out.as_deref(), cli.format, exec),
        Cmd::Sample(s) => sample(s, cli.seed.unwrap_or(0), cli.format, exec, &out),
        Cmd::Fit(f) => fit(f, cli.format, &out),
        Cmd::Onehot(o) => {
            json_only(cli.format)?;
            let g = PolarityGroup::with_scale(o.spins, o.k, o.scale)?;
            out.json(&AnyModel::Ising(one_hot_ising(&g)?))
        }
    }
}

fn json_only(f: Option<Format>) -> CmdResult {
    match f {
        Some(Format::Csv) => Err(Failure::Usage("this command only emits JSON".into())),
        _ => Ok(()),
    }
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn bytes(&self, data: &[u8]) -> CmdResult {
        match &self.path {
            Some(p) => fs::write(p, data).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
            None => {
                let mut s = io::stdout().lock();
                s.write_all(data)?;
                s.flush()?;
                Ok(())
            }
        }
    }

    fn json<T: serde::Serialize>(&self, v: &T) -> CmdResult {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.bytes(text.as_bytes())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn gen(g: GenCmd) -> Result<Instance, Failure> {
    Ok(match g {
        GenCmd::Gcp { nodes, colors } => gcp::gen_complete_kpartite(nodes, colors)?.into(),
        GenCmd::Cvcp { sizes, colors } => {
            let c = cvcp::gen_clique_union(&sizes)?;
            match colors {
                Some(k) => c.with_colors(k)?.into(),
                None => c.into(),
            }
        }
        GenCmd::Pmsp {
            jobs,
            base,
            machines,
            slack,
        } => {
            if base.is_empty() {
                PmspInstance::solved(jobs, machines, slack)?.into()
            } else {
                if machines != 2 {
                    return Err(Failure::Usage("--base builds two-machine instances".into()));
                }
                gen_balanced_instance(&base, slack)?.into()
            }
        }
    })
}

fn qubo(q: QuboArgs, out: &Output) -> CmdResult {
    let inst: Instance = read_json(&q.file)?;
    let want = match q.kind {
        Kind::Gcp => "gcp",
        Kind::Cvcp => "cvcp",
        Kind::Pmsp => "pmsp",
    };
    if inst.kind() != want {
        return Err(Failure::Runtime(format!(
            "{} holds a {} instance, not {want}",
            q.file.display(),
            inst.kind()
        )));
    }
    let a = match (q.a, q.term_ratio, &inst) {
        (Some(a), _, _) => a,
        (None, Some(r), Instance::Pmsp(p)) => a_for_term_ratio(p, q.b, r),
        (None, Some(_), _) => return Err(Failure::Usage("--term-ratio applies to pmsp only".into())),
        (None, None, _) => return Err(Failure::Usage("one of --A or --term-ratio is required".into())),
    };
    let model = inst.build_qubo(a, q.b)?;
    if q.ising {
        out.json(&AnyModel::Ising(model.to_ising()))
    } else {
        out.json(&AnyModel::Qubo(model))
    }
}

fn spectrum(s: SpectrumArgs, format: Option<Format>, exec: Execution, out: &Output) -> CmdResult {
    let model: AnyModel = read_json(&s.model)?;
    let limits = SpectrumLimits {
        max_vars: s.max_vars,
        exec,
        ..SpectrumLimits::default()
    };
    let mut report = enumerate_spectrum(&model.to_qubo(), limits)?;
    let binning = match s.bin_width {
        Some(w) => Binning::FixedWidth(w),
        None => Binning::Exact,
    };
    match format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_histogram_csv(binning, &mut buf)?;
            out.bytes(&buf)
        }
        Format::Json => {
            if s.no_histogram {
                report.histogram.clear();
            } else {
                report.histogram = report.histogram_table(binning)?;
            }
            out.json(&report)
        }
    }
}

fn sweep(s: SweepArgs, seed: Option<u64>, out: Option<&Path>, format: Option<Format>, exec: Execution) -> CmdResult {
    let mut spec = SweepSpec::load(&s.spec)?;
    if let Some(seed) = seed {
        spec.sampler.seed = seed;
    }
    let format = format.unwrap_or(Format::Csv);
    if let Some(p) = out {
        spec.output = Some(p.to_path_buf());
    }
    let to_stdout = spec.output.is_none();
    if format == Format::Json {
        let path = spec.output.take();
        let records = execute(&spec, exec)?;
        return Output { path }.json(&records);
    }
    let records = execute(&spec, exec)?;
    if to_stdout {
        let mut buf = Vec::new();
        write_sweep_csv(&records, spec.normalize_degeneracy, &mut buf)?;
        Output { path: None }.bytes(&buf)?;
    }
    Ok(())
}

fn sample(s: SampleArgs, seed: u64, format: Option<Format>, exec: Execution, out: &Output) -> CmdResult {
    let model: AnyModel = read_json(&s.model)?;
    let cfg = SaConfig {
        n_reads: s.reads,
        sweeps_per_read: s.sweeps,
        beta_start: s.beta_start,
        beta_end: s.beta_end,
        schedule: match s.schedule {
            ScheduleArg::Geometric => Schedule::Geometric,
            ScheduleArg::Linear => Schedule::Linear,
        },
        seed,
    };
    let set = sa_sample_with(&model, &cfg, exec)?;
    match format.unwrap_or(Format::Json) {
        Format::Json => out.json(&set),
        Format::Csv => {
            let mut text = String::from("state,energy,count\n");
            for smp in &set.samples {
                text.push_str(&format!("{},{},{}\n", smp.state, smp.energy, smp.count));
            }
            out.bytes(text.as_bytes())
        }
    }
}

fn read_points(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: Option<&&str>| s.and_then(|v| v.parse::<f64>().ok());
        match (parse(cols.first()), parse(cols.get(1))) {
            (Some(n), Some(p)) => pts.push((n, p)),
            _ => {
                return Err(Failure::Runtime(format!(
                    "{}:{}: expected two numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(pts)
}

fn fit(f: FitArgs, format: Option<Format>, out: &Output) -> CmdResult {
    let pts = read_points(&f.input)?;
    let fit = if f.time {
        fit_time_scaling(&pts, f.beta)?
    } else {
        fit_scaling(&pts, f.beta)?
    };
    match format.unwrap_or(Format::Json) {
        Format::Json => out.json(&fit),
        Format::Csv => {
            let text = format!(
                "alpha,beta,intercept,residual,n_points,n_dropped\n{},{},{},{},{},{}\n",
                fit.alpha,
                fit.beta,
                fit.intercept,
                fit.residual,
                fit.points.len(),
                fit.dropped.len()
            );
            out.bytes(text.as_bytes())
        }
    }
}
