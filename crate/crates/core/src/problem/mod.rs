//! Problem instances, their QUBO encodings and decoders.

pub mod cvcp;
pub mod gcp;
pub mod pmsp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuboModel;
use crate::spin::SpinVector;

pub use cvcp::{CvcpInstance, CvcpParams};
pub use gcp::{GcpInstance, GcpParams};
pub use pmsp::{PmspInstance, PmspParams};

/// Normalized, validated undirected edge list: `u < v`, sorted, no repeats.
pub(crate) fn normalize_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u >= n_nodes || v >= n_nodes {
            return Err(Error::IndexOutOfRange {
                index: u.max(v),
                n: n_nodes,
            });
        }
        if u == v {
            return Err(Error::Argument(format!("self-loop on node {u}")));
        }
        out.push((u.min(v), u.max(v)));
    }
    out.sort_unstable();
    let before = out.len();
    out.dedup();
    if out.len() != before {
        return Err(Error::Argument("duplicate edge".into()));
    }
    Ok(out)
}

/// Dense symmetric adjacency matrix for small graphs.
pub(crate) fn adjacency(n_nodes: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n_nodes]; n_nodes];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    adj
}

/// Any of the three problem families, tagged by `"type"` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Instance {
    Gcp(GcpInstance),
    Cvcp(CvcpInstance),
    Pmsp(PmspInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Gcp(_) => "gcp",
            Instance::Cvcp(_) => "cvcp",
            Instance::Pmsp(_) => "pmsp",
        }
    }

    pub fn n_vars(&self) -> Result<usize> {
        match self {
            Instance::Gcp(g) => Ok(g.n_vars()),
            Instance::Cvcp(c) => Ok(c.n_vars()),
            Instance::Pmsp(p) => p.n_vars(),
        }
    }

    /// QUBO for penalty weights `(a, b)`; the PMSP makespan term keeps weight 1.
    pub fn build_qubo(&self, a: f64, b: f64) -> Result<QuboModel> {
        match self {
            Instance::Gcp(g) => Ok(gcp::build_gcp_qubo(g, GcpParams { a, b })),
            Instance::Cvcp(c) => Ok(cvcp::build_cvcp_qubo(c, CvcpParams { a, b })),
            Instance::Pmsp(p) => pmsp::build_pmsp_qubo(p, PmspParams { a, b }),
        }
    }

    /// Energy of a correct answer when the weights are adequate: 0 for the
    /// graph problems, the minimum makespan for scheduling.
    pub fn expected_ground_energy(&self) -> Option<f64> {
        match self {
            Instance::Gcp(_) | Instance::Cvcp(_) => Some(0.0),
            Instance::Pmsp(p) => p.known_min_makespan().map(|m| m as f64),
        }
    }

    /// Plot axis used in sweeps: raw `A` for graph problems, term ratio for
    /// scheduling.
    pub fn x_axis(&self, a: f64, b: f64) -> f64 {
        match self {
            Instance::Gcp(_) | Instance::Cvcp(_) => a,
            Instance::Pmsp(p) => pmsp::term_ratio(p, PmspParams { a, b }),
        }
    }

    /// Whether a state is usable as an answer; `None` when the family has no
    /// notion distinct from the ground state.
    pub fn is_practical(&self, x: &SpinVector) -> Option<Result<bool>> {
        match self {
            Instance::Pmsp(p) => Some(pmsp::is_practical_correct(p, x)),
            _ => None,
        }
    }
}

impl From<GcpInstance> for Instance {
    fn from(g: GcpInstance) -> Self {
        Instance::Gcp(g)
    }
}

impl From<CvcpInstance> for Instance {
    fn from(c: CvcpInstance) -> Self {
        Instance::Cvcp(c)
    }
}

impl From<PmspInstance> for Instance {
    fn from(p: PmspInstance) -> Self {
        Instance::Pmsp(p)
    }
}
