//! Clique vertex cover: color classes must each induce a clique.
//!
//! The class term `1/2 (S_i - 1) S_i - sum_{(uv) in E} x[u,i] x[v,i]` with
//! `S_i = sum_v x[v,i]` counts same-color pairs minus same-color edges, i.e.
//! same-color NON-adjacent pairs. That simplified form is what gets built:
//! weight `B` on every non-adjacent `(x[u,i], x[v,i])` pair.

use serde::{Deserialize, Serialize};

use super::{adjacency, normalize_edges};
use crate::error::{arg_err, Error, Result};
use crate::model::{QuboBuilder, QuboModel};
use crate::spin::{SpinKind, SpinVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCvcp")]
pub struct CvcpInstance {
    n_nodes: usize,
    n_cliques: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clique_sizes: Option<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawCvcp {
    n_nodes: usize,
    n_cliques: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    clique_sizes: Option<Vec<usize>>,
}

impl TryFrom<RawCvcp> for CvcpInstance {
    type Error = Error;

    fn try_from(r: RawCvcp) -> Result<Self> {
        let mut c = CvcpInstance::new(r.n_nodes, r.n_cliques, &r.edges)?;
        if let Some(sizes) = &r.clique_sizes {
            if sizes.iter().sum::<usize>() != r.n_nodes {
                return arg_err("clique_sizes do not sum to n_nodes");
            }
        }
        c.clique_sizes = r.clique_sizes;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvcpParams {
    pub a: f64,
    pub b: f64,
}

impl CvcpInstance {
    pub fn new(n_nodes: usize, n_cliques: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_cliques == 0 {
            return arg_err("at least one color is required");
        }
        Ok(Self {
            n_nodes,
            n_cliques,
            edges: normalize_edges(n_nodes, edges)?,
            clique_sizes: None,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_cliques(&self) -> usize {
        self.n_cliques
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn clique_sizes(&self) -> Option<&[usize]> {
        self.clique_sizes.as_deref()
    }

    pub fn n_vars(&self) -> usize {
        self.n_nodes * self.n_cliques
    }

    #[inline]
    pub fn var(&self, node: usize, color: usize) -> usize {
        node * self.n_cliques + color
    }

    /// Same graph with a different number of available colors.
    pub fn with_colors(&self, n_colors: usize) -> Result<Self> {
        if n_colors == 0 {
            return arg_err("at least one color is required");
        }
        Ok(Self {
            n_cliques: n_colors,
            ..self.clone()
        })
    }

    /// Clique `j` gets color `j`, for generated instances.
    pub fn known_cover(&self) -> Option<Vec<usize>> {
        let sizes = self.clique_sizes.as_ref()?;
        if sizes.len() > self.n_cliques {
            return None;
        }
        Some(
            sizes
                .iter()
                .enumerate()
                .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
                .collect(),
        )
    }

    pub fn encode(&self, assignment: &[usize]) -> Result<SpinVector> {
        if assignment.len() != self.n_nodes {
            return Err(Error::Dimension {
                expected: self.n_nodes,
                got: assignment.len(),
            });
        }
        let mut x = SpinVector::zeros(self.n_vars(), SpinKind::Binary);
        for (v, &c) in assignment.iter().enumerate() {
            if c >= self.n_cliques {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    n: self.n_cliques,
                });
            }
            x.set(self.var(v, c), true);
        }
        Ok(x)
    }
}

/// Disjoint cliques on contiguous index blocks, chained by one bridge edge
/// between the lowest-index nodes of consecutive cliques.
pub fn gen_clique_union(sizes: &[usize]) -> Result<CvcpInstance> {
    if sizes.is_empty() {
        return arg_err("at least one clique is required");
    }
    if sizes.contains(&0) {
        return arg_err("clique sizes must be at least 1");
    }
    let n: usize = sizes.iter().sum();
    let mut edges = Vec::new();
    let mut start = 0;
    let mut prev_start = None;
    for &s in sizes {
        for u in start..start + s {
            for v in u + 1..start + s {
                edges.push((u, v));
            }
        }
        if let Some(p) = prev_start {
            edges.push((p, start));
        }
        prev_start = Some(start);
        start += s;
    }
    let mut c = CvcpInstance::new(n, sizes.len(), &edges)?;
    c.clique_sizes = Some(sizes.to_vec());
    Ok(c)
}

pub fn build_cvcp_qubo(inst: &CvcpInstance, p: CvcpParams) -> QuboModel {
    let k = inst.n_cliques;
    let n = inst.n_nodes;
    let adj = adjacency(n, &inst.edges);
    let mut b = QuboBuilder::new(inst.n_vars());
    for v in 0..n {
        b.add_offset(p.a);
        for i in 0..k {
            let vi = inst.var(v, i);
            b.set_label(vi, format!("x[v={v},clique={i}]")).unwrap();
            b.add_linear(vi, -p.a).unwrap();
            for j in i + 1..k {
                b.add_quadratic(vi, inst.var(v, j), 2.0 * p.a).unwrap();
            }
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            if !adj[u][v] {
                for i in 0..k {
                    b.add_quadratic(inst.var(u, i), inst.var(v, i), p.b).unwrap();
                }
            }
        }
    }
    b.build()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverDecode {
    pub valid_onehot: bool,
    pub is_clique_cover: bool,
    pub assignment: Option<Vec<usize>>,
}

pub fn decode_cover(inst: &CvcpInstance, x: &SpinVector) -> Result<CoverDecode> {
    if x.len() != inst.n_vars() {
        return Err(Error::Dimension {
            expected: inst.n_vars(),
            got: x.len(),
        });
    }
    let mut assignment = Vec::with_capacity(inst.n_nodes);
    for v in 0..inst.n_nodes {
        let mut set = (0..inst.n_cliques).filter(|&i| x.get(inst.var(v, i)));
        match (set.next(), set.next()) {
            (Some(c), None) => assignment.push(c),
            _ => {
                return Ok(CoverDecode {
                    valid_onehot: false,
                    is_clique_cover: false,
                    assignment: None,
                })
            }
        }
    }
    let adj = adjacency(inst.n_nodes, &inst.edges);
    let is_clique_cover =
        (0..inst.n_nodes).all(|u| (u + 1..inst.n_nodes).all(|v| assignment[u] != assignment[v] || adj[u][v]));
    Ok(CoverDecode {
        valid_onehot: true,
        is_clique_cover,
        assignment: Some(assignment),
    })
}
