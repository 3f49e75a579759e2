//! Hardware target graphs: Chimera and Pegasus constructions, file import and
//! export, and yield (dead-qubit) modelling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::rng_from;

/// A hardware graph: nodes are physical qubits, edges are couplers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetGraph {
    graph: Graph,
    c_phys: usize,
}

#[derive(Serialize, Deserialize)]
struct TargetRepr {
    c_phys: Option<usize>,
    nodes: Vec<NodeId>,
    edges: Vec<[NodeId; 2]>,
}

/// On-disk formats for target graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetFormat {
    /// One `u v` pair per line; `#` starts a comment; a line holding a single
    /// id declares an isolated node; `# c_phys: N` sets the degree bound.
    EdgeList,
    /// `{"c_phys": int, "nodes": [...], "edges": [[u, v], ...]}`
    Json,
}

impl TargetFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => TargetFormat::Json,
            _ => TargetFormat::EdgeList,
        }
    }
}

/// Which qubits to remove in [`apply_yield`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadQubits {
    List(Vec<NodeId>),
    /// Remove `round(f * |V|)` qubits chosen uniformly at random.
    Fraction(f64),
}

impl TargetGraph {
    /// Wrap a graph, checking the degree bound.
    pub fn new(graph: Graph, c_phys: usize) -> Result<Self> {
        if let Some(n) = graph.nodes().find(|&n| graph.degree(n) > c_phys) {
            return Err(Error::InvalidParameter(format!(
                "node {n} has degree {} above c_phys = {c_phys}",
                graph.degree(n)
            )));
        }
        Ok(TargetGraph { graph, c_phys })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn c_phys(&self) -> usize {
        self.c_phys
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.graph.has_edge(u, v)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.graph.contains(n)
    }

    /// Content hash (SHA-256 over the canonical edge list), used to tie
    /// embeddings and families to the graph they address.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("c_phys {}\n", self.c_phys));
        for n in self.graph.nodes() {
            h.update(format!("n {n}\n"));
        }
        for (u, v) in self.graph.edges() {
            h.update(format!("e {u} {v}\n"));
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn to_json(&self) -> String {
        let repr = TargetRepr {
            c_phys: Some(self.c_phys),
            nodes: self.graph.nodes().collect(),
            edges: self.graph.edges().map(|(u, v)| [u, v]).collect(),
        };
        serde_json::to_string(&repr).expect("target graph serializes")
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# c_phys: {}\n", self.c_phys);
        for n in self.graph.nodes().filter(|&n| self.graph.degree(n) == 0) {
            let _ = writeln!(out, "{n}");
        }
        for (u, v) in self.graph.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write(&self, path: &Path, format: TargetFormat) -> Result<()> {
        let body = match format {
            TargetFormat::Json => self.to_json(),
            TargetFormat::EdgeList => self.to_edge_list(),
        };
        std::fs::write(path, body)?;
        Ok(())
    }
}

/// Chimera graph of `m x n` unit cells, each a complete bipartite `K_{t,t}`.
///
/// Qubit `k` of the left shore of cell `(i, j)` couples to the same qubit in
/// cells `(i +- 1, j)`; right-shore qubits couple along `j`. Node id is
/// `((i * n + j) * 2 + shore) * t + k`.
pub fn build_chimera(m: usize, n: usize, t: usize) -> Result<TargetGraph> {
    if m == 0 || n == 0 || t == 0 {
        return Err(Error::InvalidParameter(format!(
            "chimera dimensions must be positive, got ({m}, {n}, {t})"
        )));
    }
    let id = |i: usize, j: usize, shore: usize, k: usize| (((i * n + j) * 2 + shore) * t + k) as NodeId;
    let mut g = Graph::with_nodes(0..(2 * t * m * n) as NodeId);
    for i in 0..m {
        for j in 0..n {
            for a in 0..t {
                for b in 0..t {
                    g.add_edge(id(i, j, 0, a), id(i, j, 1, b));
                }
                if i + 1 < m {
                    g.add_edge(id(i, j, 0, a), id(i + 1, j, 0, a));
                }
                if j + 1 < n {
                    g.add_edge(id(i, j, 1, a), id(i, j + 1, 1, a));
                }
            }
        }
    }
    TargetGraph::new(g, t + 2)
}

/// Chimera node id of shore qubit `k` in cell `(i, j)` of a `C(m, n, t)`.
pub fn chimera_node(n: usize, t: usize, i: usize, j: usize, shore: usize, k: usize) -> NodeId {
    (((i * n + j) * 2 + shore) * t + k) as NodeId
}

const PEGASUS_OFFSETS: [[usize; 12]; 2] = [
    [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6],
    [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10],
];

/// Pegasus graph `P(m)` restricted to its fabric, from the standard
/// `(u, w, k, z)` coordinate scheme with the default shift offsets.
///
/// Coordinates: orientation `u in {0, 1}`, perpendicular offset `w < m`,
/// track `k < 12`, parallel offset `z < m - 1`. Couplers are external
/// (`z` to `z + 1`), odd (`k` even to `k + 1`) and internal (between
/// orientations, shifted by the offset table). Nodes are relabelled densely
/// from 0 in order of their linear index `((u * m + w) * 12 + k) * (m - 1) + z`.
pub fn build_pegasus(m: usize) -> Result<TargetGraph> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("pegasus needs m >= 2, got {m}")));
    }
    let m1 = m - 1;
    let [off0, off1] = PEGASUS_OFFSETS;
    let start = [*off1.iter().min().unwrap(), *off0.iter().min().unwrap()];
    let end = [12 - *off1.iter().max().unwrap(), 12 - *off0.iter().max().unwrap()];
    let in_fabric = |u: usize, w: usize, k: usize| {
        (w != 0 || k >= start[u]) && (w != m1 || k < 12 - end[u])
    };
    let linear = |u: usize, w: usize, k: usize, z: usize| ((u * m + w) * 12 + k) * m1 + z;
    let k_range = |u: usize, w: usize| {
        let lo = if w == 0 { start[u] } else { 0 };
        let hi = 12 - if w == m1 { end[u] } else { 0 };
        lo..hi
    };

    let mut raw: Vec<(usize, usize)> = Vec::new();
    for u in 0..2 {
        for w in 0..m {
            for k in k_range(u, w) {
                for z in 0..m1.saturating_sub(1) {
                    raw.push((linear(u, w, k, z), linear(u, w, k, z + 1)));
                }
            }
            for k in k_range(u, w).filter(|k| k % 2 == 0) {
                for z in 0..m1 {
                    raw.push((linear(u, w, k, z), linear(u, w, k + 1, z)));
                }
            }
        }
    }
    for w in 0..m {
        for kk in 0..12 {
            let lo = if w > 0 { 0 } else { off1[kk] };
            let hi = if w < m1 { 12 } else { off1[kk] };
            for k in lo..hi {
                for z in 0..m1 {
                    let w2 = z + usize::from(kk < off0[k]);
                    let z2 = w - usize::from(k < off1[kk]);
                    if in_fabric(0, w, k) && in_fabric(1, w2, kk) {
                        raw.push((linear(0, w, k, z), linear(1, w2, kk, z2)));
                    }
                }
            }
        }
    }

    let used: BTreeSet<usize> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    let dense: BTreeMap<usize, NodeId> = used.iter().enumerate().map(|(i, &q)| (q, i as NodeId)).collect();
    let mut g = Graph::with_nodes(0..dense.len() as NodeId);
    for (a, b) in raw {
        g.add_edge(dense[&a], dense[&b]);
    }
    TargetGraph::new(g, 15)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Load a target graph from disk. Self-loops and duplicate edges are errors
/// reported with their line number (edge-list) or edge index + 1 (JSON).
pub fn import_target(path: &Path, format: TargetFormat) -> Result<TargetGraph> {
    let text = std::fs::read_to_string(path)?;
    match format {
        TargetFormat::EdgeList => parse_edge_list(path, &text),
        TargetFormat::Json => {
            let repr: TargetRepr =
                serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
            let mut g = Graph::with_nodes(repr.nodes);
            for (i, [u, v]) in repr.edges.into_iter().enumerate() {
                if u == v {
                    return Err(Error::SelfLoop { line: i + 1, node: u });
                }
                if !g.add_edge(u, v) {
                    return Err(Error::DuplicateEdge { line: i + 1, u, v });
                }
            }
            let c_phys = repr.c_phys.unwrap_or_else(|| g.max_degree());
            TargetGraph::new(g, c_phys)
        }
    }
}

pub fn parse_edge_list(path: &Path, text: &str) -> Result<TargetGraph> {
    let mut g = Graph::new();
    let mut c_phys = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(val) = comment.and_then(|c| c.trim().strip_prefix("c_phys:")) {
            let val = val.trim().parse().map_err(|_| parse_err(path, line, "bad c_phys value"))?;
            c_phys = Some(val);
        }
        let ids: Vec<NodeId> = body
            .split_whitespace()
            .map(|tok| tok.parse().map_err(|_| parse_err(path, line, format!("bad node id {tok:?}"))))
            .collect::<Result<_>>()?;
        match ids[..] {
            [] => {}
            [n] => g.add_node(n),
            [u, v] if u == v => return Err(Error::SelfLoop { line, node: u }),
            [u, v] => {
                if !g.add_edge(u, v) {
                    return Err(Error::DuplicateEdge { line, u, v });
                }
            }
            _ => return Err(parse_err(path, line, "expected \"u v\"")),
        }
    }
    let c_phys = c_phys.unwrap_or_else(|| g.max_degree());
    TargetGraph::new(g, c_phys)
}

/// Remove dead qubits, returning the subgraph induced on the survivors.
pub fn apply_yield(g: &TargetGraph, dead: &DeadQubits, seed: u64) -> Result<TargetGraph> {
    let nodes: Vec<NodeId> = g.graph.nodes().collect();
    let dead: BTreeSet<NodeId> = match dead {
        DeadQubits::List(list) => {
            if let Some(&n) = list.iter().find(|n| !g.contains(**n)) {
                return Err(Error::UnknownNode(n));
            }
            list.iter().copied().collect()
        }
        DeadQubits::Fraction(f) => {
            if !(0.0..1.0).contains(f) {
                return Err(Error::InvalidParameter(format!("yield fraction {f} not in [0, 1)")));
            }
            let k = (f * nodes.len() as f64).round() as usize;
            let mut rng = rng_from(seed);
            nodes.choose_multiple(&mut rng, k).copied().collect()
        }
    };
    let keep = nodes.into_iter().filter(|n| !dead.contains(n)).collect();
    Ok(TargetGraph { graph: g.graph.induced(&keep), c_phys: g.c_phys })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chimera_edges_closed_form(m: usize, n: usize, t: usize) -> usize {
        t * t * m * n + t * (n * (m - 1) + m * (n - 1))
    }

    #[test]
    fn chimera_examples() {
        let c = build_chimera(1, 1, 4).unwrap();
        assert_eq!(c.graph().node_count(), 8);
        assert_eq!(c.graph().edge_count(), 16);
        assert!(c.graph().nodes().all(|n| c.graph().degree(n) == 4));

        let c = build_chimera(2, 2, 4).unwrap();
        assert_eq!(c.graph().node_count(), 32);
        assert_eq!(c.graph().edge_count(), 80);
        assert_eq!(c.c_phys(), 6);

        let c = build_chimera(1, 1, 1).unwrap();
        assert_eq!((c.graph().node_count(), c.graph().edge_count()), (2, 1));
    }

    #[test]
    fn chimera_counts_exhaustive() {
        for m in 1..=8 {
            for n in 1..=8 {
                for t in 1..=8 {
                    let c = build_chimera(m, n, t).unwrap();
                    assert_eq!(c.graph().node_count(), 2 * t * m * n);
                    assert_eq!(c.graph().edge_count(), chimera_edges_closed_form(m, n, t));
                    assert!(c.graph().max_degree() <= t + 2);
                }
            }
        }
    }

    #[test]
    fn chimera_rejects_zero_dims() {
        assert!(build_chimera(0, 1, 4).is_err());
    }

    #[test]
    fn pegasus_degree_bounds() {
        let p2 = build_pegasus(2).unwrap();
        assert!(p2.graph().max_degree() <= 15);
        assert!(p2.graph().node_count() > 0);
        // m = 3 has a single external coupler per track segment, so the
        // full degree of 15 first appears at m = 4.
        let p3 = build_pegasus(3).unwrap();
        assert_eq!(p3.graph().max_degree(), 14);
        let p4 = build_pegasus(4).unwrap();
        assert_eq!(p4.graph().max_degree(), 15);
        assert!(p4.graph().is_connected());
        assert!(build_pegasus(1).is_err());
    }

    #[test]
    fn pegasus_fabric_sizes() {
        for m in 2..=6 {
            let p = build_pegasus(m).unwrap();
            assert_eq!(p.graph().node_count(), 24 * m * (m - 1) - 8 * (m - 1), "m = {m}");
        }
    }

    #[test]
    fn pegasus_16_matches_published_totals() {
        let p = build_pegasus(16).unwrap();
        assert_eq!(p.graph().node_count(), 5640);
        assert_eq!(p.graph().edge_count(), 40484);
    }

    #[test]
    fn edge_list_parsing() {
        let p = Path::new("mem");
        let g = parse_edge_list(p, "0 1\n1 2\n2 0\n").unwrap();
        assert_eq!((g.graph().node_count(), g.graph().edge_count()), (3, 3));
        assert_eq!(g.c_phys(), 2);

        match parse_edge_list(p, "5 5\n") {
            Err(Error::SelfLoop { line: 1, node: 5 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list(p, "0 1\n# comment\n1 0\n") {
            Err(Error::DuplicateEdge { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list(p, "0 x\n"), Err(Error::Parse { line: 1, .. })));
        let g = parse_edge_list(p, "# c_phys: 6\n0 1 # trailing\n7\n").unwrap();
        assert_eq!(g.c_phys(), 6);
        assert!(g.contains(7));
    }

    #[test]
    fn yield_examples() {
        let tri = parse_edge_list(Path::new("mem"), "0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(apply_yield(&tri, &DeadQubits::Fraction(0.0), 3).unwrap(), tri);
        let path = apply_yield(&tri, &DeadQubits::List(vec![0]), 3).unwrap();
        assert_eq!(path.graph().edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert!(matches!(
            apply_yield(&tri, &DeadQubits::List(vec![9]), 0),
            Err(Error::UnknownNode(9))
        ));

        let c = build_chimera(4, 4, 4).unwrap();
        let a = apply_yield(&c, &DeadQubits::Fraction(0.5), 11).unwrap();
        let b = apply_yield(&c, &DeadQubits::Fraction(0.5), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graph().node_count(), 64);
    }
}
