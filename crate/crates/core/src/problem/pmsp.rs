//! Identical parallel machine scheduling with a log-encoded slack register.
//!
//! ```text
//! H = sum_i L_i x[i,1]
//!   + A sum_i (1 - sum_a x[i,a])^2
//!   + B sum_{a>=2} (M - sum_i L_i (x[i,1] - x[i,a]) - sum_n 2^n z[n,a])^2
//! ```
//!
//! Machine 1 is designated as the longest-running machine; the slack
//! register of every other machine absorbs `M - (load_1 - load_a)`.
//!
//! Index layout: `x[i,a]` at `i * m + a` (machines are 0-based here, so
//! machine 1 is `a = 0`), followed by one register of `slack_bits()` bits
//! per machine `a >= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::model::{QuboBuilder, QuboModel};
use crate::spin::{SpinKind, SpinVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmsp")]
pub struct PmspInstance {
    jobs: Vec<u64>,
    #[serde(rename = "m")]
    n_machines: usize,
    #[serde(rename = "M")]
    slack_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    known_min_makespan: Option<u64>,
}

#[derive(Deserialize)]
struct RawPmsp {
    jobs: Vec<u64>,
    m: usize,
    #[serde(rename = "M")]
    slack_bound: u64,
    #[serde(default)]
    known_min_makespan: Option<u64>,
}

impl TryFrom<RawPmsp> for PmspInstance {
    type Error = Error;

    fn try_from(r: RawPmsp) -> Result<Self> {
        let mut p = PmspInstance::new(r.jobs, r.m, r.slack_bound)?;
        p.known_min_makespan = r.known_min_makespan;
        Ok(p)
    }
}

/// Penalty weights; the makespan term is fixed at weight 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmspParams {
    pub a: f64,
    pub b: f64,
}

impl PmspInstance {
    /// Instance without a recorded optimum; see [`PmspInstance::solved`].
    pub fn new(jobs: Vec<u64>, n_machines: usize, slack_bound: u64) -> Result<Self> {
        if jobs.is_empty() {
            return arg_err("at least one job is required");
        }
        if jobs.contains(&0) {
            return arg_err("process times must be positive");
        }
        if n_machines == 0 {
            return arg_err("at least one machine is required");
        }
        Ok(Self {
            jobs,
            n_machines,
            slack_bound,
            known_min_makespan: None,
        })
    }

    /// Instance with its optimum computed by exhaustive search.
    pub fn solved(jobs: Vec<u64>, n_machines: usize, slack_bound: u64) -> Result<Self> {
        let mut p = Self::new(jobs, n_machines, slack_bound)?;
        p.known_min_makespan = Some(min_makespan(&p.jobs, n_machines));
        Ok(p)
    }

    pub fn with_known_min_makespan(mut self, makespan: u64) -> Self {
        self.known_min_makespan = Some(makespan);
        self
    }

    pub fn jobs(&self) -> &[u64] {
        &self.jobs
    }

    pub fn n_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    pub fn slack_bound(&self) -> u64 {
        self.slack_bound
    }

    pub fn known_min_makespan(&self) -> Option<u64> {
        self.known_min_makespan
    }

    pub fn total_time(&self) -> u64 {
        self.jobs.iter().sum()
    }

    /// `floor(log2(M - 1)) + 1` bits per register; needs `M >= 2`.
    pub fn slack_bits(&self) -> Result<usize> {
        if self.slack_bound < 2 {
            return arg_err(format!(
                "slack bound M = {} is below 2; the log encoding is undefined",
                self.slack_bound
            ));
        }
        Ok((self.slack_bound - 1).ilog2() as usize + 1)
    }

    pub fn n_job_vars(&self) -> usize {
        self.jobs.len() * self.n_machines
    }

    pub fn n_vars(&self) -> Result<usize> {
        Ok(self.n_job_vars() + (self.n_machines - 1) * self.slack_bits()?)
    }

    #[inline]
    pub fn job_var(&self, job: usize, machine: usize) -> usize {
        job * self.n_machines + machine
    }

    /// Bit `bit` of the slack register belonging to `machine >= 1`.
    pub fn slack_var(&self, machine: usize, bit: usize) -> Result<usize> {
        debug_assert!(machine >= 1 && machine < self.n_machines);
        Ok(self.n_job_vars() + (machine - 1) * self.slack_bits()? + bit)
    }

    /// Binary state for a job → machine map with explicit slack register
    /// values (one per machine `>= 1`).
    pub fn encode(&self, assignment: &[usize], slack: &[u64]) -> Result<SpinVector> {
        if assignment.len() != self.jobs.len() {
            return Err(Error::Dimension {
                expected: self.jobs.len(),
                got: assignment.len(),
            });
        }
        if slack.len() != self.n_machines - 1 {
            return Err(Error::Dimension {
                expected: self.n_machines - 1,
                got: slack.len(),
            });
        }
        let bits = self.slack_bits()?;
        let mut x = SpinVector::zeros(self.n_vars()?, SpinKind::Binary);
        for (i, &a) in assignment.iter().enumerate() {
            if a >= self.n_machines {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    n: self.n_machines,
                });
            }
            x.set(self.job_var(i, a), true);
        }
        for (k, &value) in slack.iter().enumerate() {
            if value >> bits != 0 {
                return arg_err(format!("slack value {value} does not fit in {bits} bits"));
            }
            for n in 0..bits {
                x.set(self.slack_var(k + 1, n)?, (value >> n) & 1 == 1);
            }
        }
        Ok(x)
    }

    /// Like [`PmspInstance::encode`], with each register set to the exact
    /// slack `M - (load_1 - load_a)`.
    pub fn encode_exact(&self, assignment: &[usize]) -> Result<SpinVector> {
        let mut loads = vec![0i64; self.n_machines];
        for (i, &a) in assignment.iter().enumerate() {
            loads[a.min(self.n_machines - 1)] += self.jobs[i] as i64;
        }
        let slack: Vec<u64> = (1..self.n_machines)
            .map(|a| {
                let s = self.slack_bound as i64 - (loads[0] - loads[a]);
                u64::try_from(s).map_err(|_| Error::Argument(format!("machine {} exceeds the slack bound", a + 1)))
            })
            .collect::<Result<_>>()?;
        self.encode(assignment, &slack)
    }
}

/// Exact minimum makespan. Two machines use a subset-sum table; more
/// machines use depth-first branch and bound.
pub fn min_makespan(jobs: &[u64], n_machines: usize) -> u64 {
    let total: u64 = jobs.iter().sum();
    if n_machines == 1 {
        return total;
    }
    if n_machines == 2 {
        let mut reachable = vec![false; total as usize + 1];
        reachable[0] = true;
        for &l in jobs {
            for s in (l as usize..=total as usize).rev() {
                if reachable[s - l as usize] {
                    reachable[s] = true;
                }
            }
        }
        return (0..=total as usize)
            .filter(|&s| reachable[s])
            .map(|s| (s as u64).max(total - s as u64))
            .min()
            .unwrap_or(0);
    }
    let mut sorted = jobs.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let lower = total.div_ceil(n_machines as u64).max(sorted[0]);
    let mut best = greedy_makespan_of(&sorted, n_machines);
    let mut loads = vec![0u64; n_machines];
    branch(&sorted, 0, &mut loads, &mut best, lower);
    best
}

fn branch(jobs: &[u64], next: usize, loads: &mut [u64], best: &mut u64, lower: u64) {
    if *best == lower {
        return;
    }
    if next == jobs.len() {
        *best = (*best).min(loads.iter().copied().max().unwrap_or(0));
        return;
    }
    for a in 0..loads.len() {
        // machines with equal load are interchangeable
        if loads[..a].contains(&loads[a]) {
            continue;
        }
        if loads[a] + jobs[next] >= *best {
            continue;
        }
        loads[a] += jobs[next];
        branch(jobs, next + 1, loads, best, lower);
        loads[a] -= jobs[next];
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedySchedule {
    pub assignment: Vec<usize>,
    pub loads: Vec<u64>,
    pub makespan: u64,
}

/// Longest-processing-time list scheduling. Jobs are taken longest first
/// (stable on input order); ties on load go to the lowest machine index.
pub fn greedy_schedule(inst: &PmspInstance) -> GreedySchedule {
    let mut order: Vec<usize> = (0..inst.jobs.len()).collect();
    order.sort_by(|&a, &b| inst.jobs[b].cmp(&inst.jobs[a]));
    let mut loads = vec![0u64; inst.n_machines];
    let mut assignment = vec![0usize; inst.jobs.len()];
    for i in order {
        let target = (0..loads.len()).min_by_key(|&a| (loads[a], a)).unwrap();
        loads[target] += inst.jobs[i];
        assignment[i] = target;
    }
    let makespan = loads.iter().copied().max().unwrap_or(0);
    GreedySchedule {
        assignment,
        loads,
        makespan,
    }
}

fn greedy_makespan_of(jobs: &[u64], n_machines: usize) -> u64 {
    let inst = PmspInstance {
        jobs: jobs.to_vec(),
        n_machines,
        slack_bound: 2,
        known_min_makespan: None,
    };
    greedy_schedule(&inst).makespan
}

/// Two-machine instance whose optimum splits the total evenly while LPT
/// greedy does not.
///
/// `base_jobs` must be descending. The first two go to different machines;
/// each later pair puts its longer job on the currently LONGER machine. A
/// final pair `(b + d, b)` then equalizes the loads, with `b` the smallest
/// value that keeps every job no longer than the last base job and leaves
/// greedy suboptimal.
pub fn gen_balanced_instance(base_jobs: &[u64], slack_bound: u64) -> Result<PmspInstance> {
    if base_jobs.len() < 2 {
        return Err(Error::Construction("need at least two base jobs".into()));
    }
    if base_jobs.contains(&0) {
        return Err(Error::Construction("process times must be positive".into()));
    }
    if base_jobs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Construction("base jobs must be in descending order".into()));
    }
    let mut loads = [base_jobs[0], base_jobs[1]];
    for pair in base_jobs[2..].chunks(2) {
        let (long, short) = if loads[0] >= loads[1] { (0, 1) } else { (1, 0) };
        loads[long] += pair[0];
        if let Some(&second) = pair.get(1) {
            loads[short] += second;
        }
    }
    let diff = loads[0].abs_diff(loads[1]);
    let smallest = *base_jobs.last().unwrap();
    for b in 1..=smallest {
        let a = b + diff;
        if a > smallest {
            break;
        }
        let mut jobs = base_jobs.to_vec();
        jobs.extend([a, b]);
        let total: u64 = jobs.iter().sum();
        if greedy_makespan_of(&jobs, 2) > total / 2 {
            let mut inst = PmspInstance::new(jobs, 2, slack_bound)?;
            inst.known_min_makespan = Some(total / 2);
            return Ok(inst);
        }
    }
    Err(Error::Construction(format!(
        "no equalizing pair (b + {diff}, b) with b >= 1 fits below {smallest} and defeats greedy"
    )))
}

/// Prepends an equal pair `(c, c)`, `c` no shorter than any existing job,
/// and checks that greedy is still suboptimal.
pub fn pad_with_pair(inst: &PmspInstance, c: u64) -> Result<PmspInstance> {
    if inst.n_machines != 2 {
        return Err(Error::Construction("padding is defined for two machines".into()));
    }
    let longest = inst.jobs.iter().copied().max().unwrap_or(0);
    if c < longest {
        return Err(Error::Construction(format!(
            "padding job {c} is shorter than the longest job {longest}"
        )));
    }
    let mut jobs = vec![c, c];
    jobs.extend_from_slice(&inst.jobs);
    let min = match inst.known_min_makespan {
        Some(m) => m + c,
        None => min_makespan(&jobs, 2),
    };
    let padded = PmspInstance::new(jobs, 2, inst.slack_bound)?.with_known_min_makespan(min);
    if greedy_schedule(&padded).makespan <= min {
        return Err(Error::Construction("greedy solves the padded instance".into()));
    }
    Ok(padded)
}

pub fn build_pmsp_qubo(inst: &PmspInstance, p: PmspParams) -> Result<QuboModel> {
    let bits = inst.slack_bits()?;
    let m = inst.n_machines;
    let mut b = QuboBuilder::new(inst.n_vars()?);
    for (i, _) in inst.jobs.iter().enumerate() {
        for a in 0..m {
            b.set_label(inst.job_var(i, a), format!("x[job={i},machine={}]", a + 1))?;
        }
    }
    for a in 1..m {
        for n in 0..bits {
            b.set_label(inst.slack_var(a, n)?, format!("z[n={n},machine={}]", a + 1))?;
        }
    }

    for (i, &l) in inst.jobs.iter().enumerate() {
        b.add_linear(inst.job_var(i, 0), l as f64)?;
    }

    for i in 0..inst.jobs.len() {
        let form: Vec<(usize, f64)> = (0..m).map(|a| (inst.job_var(i, a), -1.0)).collect();
        b.add_squared_linear_form(p.a, 1.0, &form)?;
    }

    for a in 1..m {
        let mut form = Vec::with_capacity(2 * inst.jobs.len() + bits);
        for (i, &l) in inst.jobs.iter().enumerate() {
            form.push((inst.job_var(i, 0), -(l as f64)));
            form.push((inst.job_var(i, a), l as f64));
        }
        for n in 0..bits {
            form.push((inst.slack_var(a, n)?, -((1u64 << n) as f64)));
        }
        b.add_squared_linear_form(p.b, inst.slack_bound as f64, &form)?;
    }
    Ok(b.build())
}

/// `0 + A N (m-2)^2 + B (m-1) (M + sum L)^2`: the energy of the state with
/// every job on every machine except machine 1 and all slack bits clear.
/// It is the true maximum only while `A` is small next to the slack term.
pub fn pmsp_max_energy(inst: &PmspInstance, p: PmspParams) -> f64 {
    let n = inst.jobs.len() as f64;
    let m = inst.n_machines as f64;
    let reach = (inst.slack_bound + inst.total_time()) as f64;
    p.a * n * (m - 2.0).powi(2) + p.b * (m - 1.0) * reach * reach
}

/// The state whose energy [`pmsp_max_energy`] reports.
pub fn max_energy_state(inst: &PmspInstance) -> Result<SpinVector> {
    let mut x = SpinVector::zeros(inst.n_vars()?, SpinKind::Binary);
    for i in 0..inst.jobs.len() {
        for a in 1..inst.n_machines {
            x.set(inst.job_var(i, a), true);
        }
    }
    Ok(x)
}

/// Ratio of the one-hot term's standalone maximum `A N (m-1)^2` to the
/// slack term's maximum `B (m-1) (M + sum L)^2`.
pub fn term_ratio(inst: &PmspInstance, p: PmspParams) -> f64 {
    let n = inst.jobs.len() as f64;
    let m = inst.n_machines as f64;
    let reach = (inst.slack_bound + inst.total_time()) as f64;
    (p.a * n * (m - 1.0).powi(2)) / (p.b * (m - 1.0) * reach * reach)
}

/// `A` that makes [`term_ratio`] equal to `ratio` for a given `B`.
pub fn a_for_term_ratio(inst: &PmspInstance, b: f64, ratio: f64) -> f64 {
    ratio / term_ratio(inst, PmspParams { a: 1.0, b })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PmspDecoded {
    pub onehot_ok: bool,
    /// Sum of process times of every job whose machine bit is set.
    pub loads: Vec<u64>,
    pub makespan: u64,
    pub machine1_is_max: bool,
    /// Register value per machine `>= 2`.
    pub slack_values: Vec<u64>,
}

pub fn decode_pmsp(inst: &PmspInstance, x: &SpinVector) -> Result<PmspDecoded> {
    let n_vars = inst.n_vars()?;
    if x.len() != n_vars {
        return Err(Error::Dimension {
            expected: n_vars,
            got: x.len(),
        });
    }
    let m = inst.n_machines;
    let mut loads = vec![0u64; m];
    let mut onehot_ok = true;
    for (i, &l) in inst.jobs.iter().enumerate() {
        let mut count = 0;
        for (a, load) in loads.iter_mut().enumerate() {
            if x.get(inst.job_var(i, a)) {
                *load += l;
                count += 1;
            }
        }
        onehot_ok &= count == 1;
    }
    let bits = inst.slack_bits()?;
    let slack_values = (1..m)
        .map(|a| {
            (0..bits).try_fold(0u64, |acc, n| {
                Ok::<_, Error>(acc | (u64::from(x.get(inst.slack_var(a, n)?)) << n))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let makespan = loads.iter().copied().max().unwrap_or(0);
    Ok(PmspDecoded {
        onehot_ok,
        machine1_is_max: loads[0] == makespan,
        loads,
        makespan,
        slack_values,
    })
}

/// One-hot assignment achieving the known minimum makespan, whatever the
/// slack bits say.
pub fn is_practical_correct(inst: &PmspInstance, x: &SpinVector) -> Result<bool> {
    let target = inst
        .known_min_makespan
        .ok_or_else(|| Error::State("instance has no known minimum makespan".into()))?;
    let d = decode_pmsp(inst, x)?;
    Ok(d.onehot_ok && d.makespan == target)
}
