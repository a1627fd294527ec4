//! Independent reference evaluators, written straight from the Hamiltonians
//! without going through the crate's builders.

#![allow(dead_code)]

use qubotune::problem::{CvcpInstance, GcpInstance, PmspInstance};
use qubotune::SpinVector;
use rand::Rng;

fn bit(x: &SpinVector, i: usize) -> i64 {
    x.get(i) as i64
}

/// `A sum_v (1 - sum_i x[v,i])^2 + B sum_(uv) sum_i x[u,i] x[v,i]`.
pub fn gcp_direct(g: &GcpInstance, a: i64, b: i64, x: &SpinVector) -> i64 {
    let k = g.k_colors();
    let mut onehot = 0;
    for v in 0..g.n_nodes() {
        let s: i64 = (0..k).map(|i| bit(x, v * k + i)).sum();
        onehot += (1 - s) * (1 - s);
    }
    let mut clash = 0;
    for &(u, v) in g.edges() {
        for i in 0..k {
            clash += bit(x, u * k + i) * bit(x, v * k + i);
        }
    }
    a * onehot + b * clash
}

/// One-hot term plus, per color, same-color pairs minus same-color edges,
/// in the unsimplified `1/2 (S - 1) S - sum_E x x` form (times 2 to stay
/// integral, then halved exactly).
pub fn cvcp_direct(c: &CvcpInstance, a: i64, b: i64, x: &SpinVector) -> i64 {
    let k = c.n_cliques();
    let n = c.n_nodes();
    let mut onehot = 0;
    for v in 0..n {
        let s: i64 = (0..k).map(|i| bit(x, v * k + i)).sum();
        onehot += (1 - s) * (1 - s);
    }
    let mut twice_class = 0;
    for i in 0..k {
        let s: i64 = (0..n).map(|v| bit(x, v * k + i)).sum();
        let e: i64 = c
            .edges()
            .iter()
            .map(|&(u, v)| bit(x, u * k + i) * bit(x, v * k + i))
            .sum();
        twice_class += (s - 1) * s - 2 * e;
    }
    assert_eq!(twice_class % 2, 0);
    a * onehot + b * twice_class / 2
}

/// `sum L x[i,1] + A sum_i (1 - sum_a x[i,a])^2
///  + B sum_{a>=2} (M - sum_i L_i (x[i,1] - x[i,a]) - sum_n 2^n z[n,a])^2`.
pub fn pmsp_direct(p: &PmspInstance, a: i64, b: i64, x: &SpinVector) -> i64 {
    let m = p.n_machines();
    let jobs = p.jobs();
    let nj = jobs.len();
    let bits = p.slack_bits().unwrap();
    let xv = |i: usize, al: usize| bit(x, i * m + al);
    let mut h: i64 = jobs.iter().enumerate().map(|(i, &l)| l as i64 * xv(i, 0)).sum();
    for i in 0..nj {
        let s: i64 = (0..m).map(|al| xv(i, al)).sum();
        h += a * (1 - s) * (1 - s);
    }
    for al in 1..m {
        let mut r = p.slack_bound() as i64;
        for (i, &l) in jobs.iter().enumerate() {
            r -= l as i64 * (xv(i, 0) - xv(i, al));
        }
        for n in 0..bits {
            r -= (1i64 << n) * bit(x, nj * m + (al - 1) * bits + n);
        }
        h += b * r * r;
    }
    h
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> SpinVector {
    let bools: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    SpinVector::from_bools(&bools, qubotune::SpinKind::Binary)
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                e.push((u, v));
            }
        }
    }
    e
}

pub fn random_gcp<R: Rng>(rng: &mut R) -> GcpInstance {
    let n = rng.gen_range(2..=7);
    let k = rng.gen_range(1..=4);
    GcpInstance::new(n, k, &random_graph(rng, n, 0.5)).unwrap()
}

pub fn random_cvcp<R: Rng>(rng: &mut R) -> CvcpInstance {
    let n = rng.gen_range(2..=7);
    let k = rng.gen_range(1..=4);
    CvcpInstance::new(n, k, &random_graph(rng, n, 0.5)).unwrap()
}

pub fn random_pmsp<R: Rng>(rng: &mut R, max_jobs: usize, max_machines: usize) -> PmspInstance {
    let nj = rng.gen_range(1..=max_jobs);
    let m = rng.gen_range(2..=max_machines);
    let jobs = (0..nj).map(|_| rng.gen_range(1..=20)).collect();
    PmspInstance::new(jobs, m, rng.gen_range(2..=20)).unwrap()
}
