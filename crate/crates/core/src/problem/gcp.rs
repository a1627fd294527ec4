//! Graph coloring with separate one-color-per-node and edge-conflict weights.
//!
//! `H = A * sum_v (1 - sum_i x[v,i])^2 + B * sum_{(u,v) in E} sum_i x[u,i] x[v,i]`
//!
//! Variable `x[v,i]` lives at index `v * k + i`.

use serde::{Deserialize, Serialize};

use super::{adjacency, normalize_edges};
use crate::error::{arg_err, Error, Result};
use crate::model::{QuboBuilder, QuboModel};
use crate::spin::{SpinKind, SpinVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGcp")]
pub struct GcpInstance {
    n_nodes: usize,
    k_colors: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    known_chromatic: Option<usize>,
}

#[derive(Deserialize)]
struct RawGcp {
    n_nodes: usize,
    k_colors: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    known_chromatic: Option<usize>,
}

impl TryFrom<RawGcp> for GcpInstance {
    type Error = Error;

    fn try_from(r: RawGcp) -> Result<Self> {
        let mut g = GcpInstance::new(r.n_nodes, r.k_colors, &r.edges)?;
        g.known_chromatic = r.known_chromatic;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcpParams {
    pub a: f64,
    pub b: f64,
}

impl GcpInstance {
    pub fn new(n_nodes: usize, k_colors: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if k_colors == 0 {
            return arg_err("at least one color is required");
        }
        Ok(Self {
            n_nodes,
            k_colors,
            edges: normalize_edges(n_nodes, edges)?,
            known_chromatic: None,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn k_colors(&self) -> usize {
        self.k_colors
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn known_chromatic(&self) -> Option<usize> {
        self.known_chromatic
    }

    pub fn n_vars(&self) -> usize {
        self.n_nodes * self.k_colors
    }

    #[inline]
    pub fn var(&self, node: usize, color: usize) -> usize {
        node * self.k_colors + color
    }

    /// Part-per-color coloring for generated complete k-partite instances.
    pub fn known_coloring(&self) -> Option<Vec<usize>> {
        let k = self.known_chromatic?;
        let part = self.n_nodes / k;
        Some((0..self.n_nodes).map(|v| v / part).collect())
    }

    /// One-hot binary vector for a node → color map.
    pub fn encode(&self, coloring: &[usize]) -> Result<SpinVector> {
        if coloring.len() != self.n_nodes {
            return Err(Error::Dimension {
                expected: self.n_nodes,
                got: coloring.len(),
            });
        }
        let mut x = SpinVector::zeros(self.n_vars(), SpinKind::Binary);
        for (v, &c) in coloring.iter().enumerate() {
            if c >= self.k_colors {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    n: self.k_colors,
                });
            }
            x.set(self.var(v, c), true);
        }
        Ok(x)
    }
}

/// Complete k-partite graph on `n` nodes, parts as contiguous index blocks.
pub fn gen_complete_kpartite(n: usize, k: usize) -> Result<GcpInstance> {
    if k < 2 {
        return arg_err(format!("need at least 2 parts, got {k}"));
    }
    if n == 0 || n % k != 0 {
        return arg_err(format!("{k} parts do not divide {n} nodes"));
    }
    let part = n / k;
    let mut edges = Vec::with_capacity(n * n * (k - 1) / (2 * k));
    for u in 0..n {
        for v in u + 1..n {
            if u / part != v / part {
                edges.push((u, v));
            }
        }
    }
    let mut g = GcpInstance::new(n, k, &edges)?;
    g.known_chromatic = Some(k);
    Ok(g)
}

pub fn build_gcp_qubo(inst: &GcpInstance, p: GcpParams) -> QuboModel {
    let k = inst.k_colors;
    let mut b = QuboBuilder::new(inst.n_vars());
    // A (1 - sum_i x)^2 = A - A sum_i x + 2A sum_{i<j} x_i x_j  (x^2 = x)
    for v in 0..inst.n_nodes {
        b.add_offset(p.a);
        for i in 0..k {
            let vi = inst.var(v, i);
            b.set_label(vi, format!("x[v={v},color={i}]")).unwrap();
            b.add_linear(vi, -p.a).unwrap();
            for j in i + 1..k {
                b.add_quadratic(vi, inst.var(v, j), 2.0 * p.a).unwrap();
            }
        }
    }
    for &(u, v) in &inst.edges {
        for i in 0..k {
            b.add_quadratic(inst.var(u, i), inst.var(v, i), p.b).unwrap();
        }
    }
    b.build()
}

/// Analytic gap next to the ground state (removing one color costs `A`).
pub fn gcp_gap_estimate(_inst: &GcpInstance, p: GcpParams) -> f64 {
    p.a
}

/// Energy of the all-ones assignment: `A N (k-1)^2 + B |E| k`.
pub fn gcp_max_energy(inst: &GcpInstance, p: GcpParams) -> f64 {
    let k = inst.k_colors as f64;
    p.a * inst.n_nodes as f64 * (k - 1.0).powi(2) + p.b * inst.edges.len() as f64 * k
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringDecode {
    pub valid_onehot: bool,
    /// Only true when `valid_onehot` holds and no edge is monochromatic.
    pub proper: bool,
    pub coloring: Option<Vec<usize>>,
}

pub fn decode_coloring(inst: &GcpInstance, x: &SpinVector) -> Result<ColoringDecode> {
    if x.len() != inst.n_vars() {
        return Err(Error::Dimension {
            expected: inst.n_vars(),
            got: x.len(),
        });
    }
    let mut coloring = Vec::with_capacity(inst.n_nodes);
    for v in 0..inst.n_nodes {
        let mut set = (0..inst.k_colors).filter(|&i| x.get(inst.var(v, i)));
        match (set.next(), set.next()) {
            (Some(c), None) => coloring.push(c),
            _ => {
                return Ok(ColoringDecode {
                    valid_onehot: false,
                    proper: false,
                    coloring: None,
                })
            }
        }
    }
    let proper = inst.edges.iter().all(|&(u, v)| coloring[u] != coloring[v]);
    Ok(ColoringDecode {
        valid_onehot: true,
        proper,
        coloring: Some(coloring),
    })
}

/// True when the graph has no edges inside any color class of `coloring`.
pub fn is_proper(inst: &GcpInstance, coloring: &[usize]) -> bool {
    let adj = adjacency(inst.n_nodes, &inst.edges);
    (0..inst.n_nodes).all(|u| (u + 1..inst.n_nodes).all(|v| !adj[u][v] || coloring[u] != coloring[v]))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Term-by-term evaluation of the coloring Hamiltonian, independent of
    /// the QUBO expansion.
    fn direct_energy(inst: &GcpInstance, p: GcpParams, x: &SpinVector) -> f64 {
        let k = inst.k_colors();
        let mut first = 0.0;
        for v in 0..inst.n_nodes() {
            let s: f64 = (0..k).map(|i| x.binary(inst.var(v, i))).sum();
            first += (1.0 - s) * (1.0 - s);
        }
        let mut second = 0.0;
        for &(u, v) in inst.edges() {
            for i in 0..k {
                second += x.binary(inst.var(u, i)) * x.binary(inst.var(v, i));
            }
        }
        p.a * first + p.b * second
    }

    #[test]
    fn kpartite_edge_counts() {
        assert_eq!(gen_complete_kpartite(9, 3).unwrap().edges().len(), 27);
        assert_eq!(gen_complete_kpartite(4, 2).unwrap().edges().len(), 4);
        assert_eq!(gen_complete_kpartite(3, 3).unwrap().edges(), &[(0, 1), (0, 2), (1, 2)]);
        for (n, k) in [(6, 3), (12, 4), (10, 5), (8, 2)] {
            let expect = n * n * (k - 1) / (2 * k);
            assert_eq!(gen_complete_kpartite(n, k).unwrap().edges().len(), expect);
        }
    }

    #[test]
    fn kpartite_rejects_bad_arguments() {
        assert!(matches!(gen_complete_kpartite(7, 3), Err(Error::Argument(_))));
        assert!(gen_complete_kpartite(4, 1).is_err());
    }

    #[test]
    fn instance_rejects_loops_and_duplicates() {
        assert!(GcpInstance::new(3, 2, &[(1, 1)]).is_err());
        assert!(GcpInstance::new(3, 2, &[(0, 1), (1, 0)]).is_err());
        assert!(GcpInstance::new(3, 2, &[(0, 3)]).is_err());
    }

    #[test]
    fn eighteen_variables_and_zero_ground() {
        let g = gen_complete_kpartite(6, 3).unwrap();
        let p = GcpParams { a: 3.0, b: 10.0 };
        let q = build_gcp_qubo(&g, p);
        assert_eq!(q.n_vars(), 18);
        assert_eq!(q.label(4), Some("x[v=1,color=1]"));
        let x = g.encode(&g.known_coloring().unwrap()).unwrap();
        assert_eq!(q.energy(&x).unwrap(), 0.0);
    }

    #[test]
    fn uncolored_nodes_cost_a_each() {
        let g = gen_complete_kpartite(3, 3).unwrap();
        let q = build_gcp_qubo(&g, GcpParams { a: 4.0, b: 1.0 });
        assert_eq!(q.energy(&SpinVector::zeros(9, SpinKind::Binary)).unwrap(), 12.0);
    }

    #[test]
    fn max_energy_is_all_ones_energy() {
        let g = gen_complete_kpartite(3, 3).unwrap();
        let p = GcpParams { a: 1.0, b: 1.0 };
        assert_eq!(gcp_max_energy(&g, p), 21.0);
        for (n, k, a, b) in [(3, 3, 1.0, 1.0), (6, 3, 7.0, 10.0), (8, 4, 2.0, 3.0), (6, 2, 5.0, 0.0)] {
            let g = gen_complete_kpartite(n, k).unwrap();
            let p = GcpParams { a, b };
            let ones = SpinVector::from_bools(&vec![true; g.n_vars()], SpinKind::Binary);
            assert_eq!(build_gcp_qubo(&g, p).energy(&ones).unwrap(), gcp_max_energy(&g, p));
        }
        let g = gen_complete_kpartite(6, 3).unwrap();
        assert_eq!(gcp_max_energy(&g, GcpParams { a: 2.0, b: 0.0 }), 2.0 * 6.0 * 4.0);
    }

    #[test]
    fn gap_estimate_is_a_and_homogeneous() {
        let g = gen_complete_kpartite(6, 3).unwrap();
        assert_eq!(gcp_gap_estimate(&g, GcpParams { a: 7.0, b: 10.0 }), 7.0);
        let p = GcpParams { a: 1.5, b: 4.0 };
        let scaled = GcpParams {
            a: 3.0 * p.a,
            b: 3.0 * p.b,
        };
        assert_eq!(gcp_gap_estimate(&g, scaled), 3.0 * gcp_gap_estimate(&g, p));
    }

    #[test]
    fn single_color_moves_from_ground() {
        let g = gen_complete_kpartite(6, 3).unwrap();
        let p = GcpParams { a: 3.0, b: 10.0 };
        let q = build_gcp_qubo(&g, p);
        let ground = g.encode(&g.known_coloring().unwrap()).unwrap();
        let part = g.n_nodes() / 3;
        for v in 0..g.n_nodes() {
            let own = v / part;
            let mut removed = ground.clone();
            removed.set(g.var(v, own), false);
            assert_eq!(q.energy(&removed).unwrap(), p.a);
            for c in (0..3).filter(|&c| c != own) {
                let mut added = ground.clone();
                added.set(g.var(v, c), true);
                assert_eq!(q.energy(&added).unwrap(), p.a + p.b * part as f64);
            }
        }
    }

    #[test]
    fn qubo_matches_direct_evaluation_on_random_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = gen_complete_kpartite(6, 3).unwrap();
        let p = GcpParams { a: 3.0, b: 5.0 };
        let q = build_gcp_qubo(&g, p);
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..18).map(|_| rng.gen()).collect();
            let x = SpinVector::from_bools(&bits, SpinKind::Binary);
            assert_eq!(q.energy(&x).unwrap(), direct_energy(&g, p, &x));
        }
    }

    #[test]
    fn decode_cases() {
        let g = gen_complete_kpartite(6, 3).unwrap();
        let coloring = g.known_coloring().unwrap();
        let d = decode_coloring(&g, &g.encode(&coloring).unwrap()).unwrap();
        assert_eq!(
            d,
            ColoringDecode {
                valid_onehot: true,
                proper: true,
                coloring: Some(coloring.clone())
            }
        );
        assert!(is_proper(&g, &coloring));

        let d = decode_coloring(&g, &SpinVector::zeros(18, SpinKind::Binary)).unwrap();
        assert!(!d.valid_onehot && d.coloring.is_none());

        let mut two = g.encode(&coloring).unwrap();
        two.set(g.var(0, 1), true);
        assert!(!decode_coloring(&g, &two).unwrap().valid_onehot);

        let mut clash = coloring.clone();
        clash[0] = 1;
        let d = decode_coloring(&g, &g.encode(&clash).unwrap()).unwrap();
        assert!(d.valid_onehot && !d.proper);

        assert!(decode_coloring(&g, &SpinVector::zeros(3, SpinKind::Binary)).is_err());
    }

    #[test]
    fn json_shape() {
        let g = gen_complete_kpartite(4, 2).unwrap();
        let text = serde_json::to_string(&super::super::Instance::Gcp(g.clone())).unwrap();
        assert!(
            text.starts_with("{\"type\":\"gcp\",\"n_nodes\":4,\"k_colors\":2,\"edges\":[[0,2]"),
            "{text}"
        );
        let arbitrary: super::super::Instance =
            serde_json::from_str(r#"{"type":"gcp","n_nodes":3,"k_colors":2,"edges":[[1,0],[2,1]]}"#).unwrap();
        match arbitrary {
            super::super::Instance::Gcp(a) => assert_eq!(a.edges(), &[(0, 1), (1, 2)]),
            _ => panic!(),
        }
        assert!(serde_json::from_str::<super::super::Instance>(
            r#"{"type":"gcp","n_nodes":3,"k_colors":2,"edges":[[1,1]]}"#
        )
        .is_err());
    }
}
