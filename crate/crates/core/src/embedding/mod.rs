//! Minor-embeddings: representation, validation, quality scoring, the Chimera
//! clique construction, and the chain-split instance-family generator.

mod generate;
mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::ratio::Rational;
use crate::topology::{build_chimera, chimera_node, TargetGraph};

pub use generate::{generate_family, FamilyMember, GenerationState, InstanceFamily, SplitRecord};
pub use io::{
    export_embedding, import_embedding, read_family, write_family, EmbeddingFile, FamilyManifest, LoadedMember,
    ManifestEntry, FAMILY_SCHEMA,
};

/// Logical problem graph.
pub type SourceGraph = Graph;

/// Map from logical node to its chain of physical qubits, in path order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    /// Content hash (or path) of the target graph these chains address.
    pub target: String,
    pub chains: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Embedding {
    pub fn new(target: impl Into<String>, chains: BTreeMap<NodeId, Vec<NodeId>>) -> Self {
        Embedding { target: target.into(), chains }
    }

    pub fn chain(&self, v: NodeId) -> Option<&[NodeId]> {
        self.chains.get(&v).map(Vec::as_slice)
    }

    /// Total number of physical qubits used (`n_phi`).
    pub fn qubit_count(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn physical_nodes(&self) -> BTreeSet<NodeId> {
        self.chains.values().flatten().copied().collect()
    }

    /// Physical-to-logical owner map. Later chains win on overlap.
    pub fn owners(&self) -> BTreeMap<NodeId, NodeId> {
        self.chains
            .iter()
            .flat_map(|(&v, c)| c.iter().map(move |&p| (p, v)))
            .collect()
    }

    /// Consecutive chain pairs, canonicalised; these carry the chain coupling.
    pub fn chain_edges(&self) -> impl Iterator<Item = (NodeId, (NodeId, NodeId))> + '_ {
        self.chains.iter().flat_map(|(&v, c)| {
            c.windows(2).map(move |w| (v, crate::graph::edge_key(w[0], w[1])))
        })
    }

    /// Whether every chain is a simple path in `gt` in its stored order.
    pub fn is_path_form(&self, gt: &TargetGraph) -> bool {
        self.chains.values().all(|c| is_path(c, gt))
    }
}

pub(crate) fn is_path(chain: &[NodeId], gt: &TargetGraph) -> bool {
    let distinct: BTreeSet<_> = chain.iter().collect();
    !chain.is_empty()
        && distinct.len() == chain.len()
        && chain.windows(2).all(|w| gt.has_edge(w[0], w[1]))
}

/// A failed minor-embedding condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Condition 1: the chain is empty or does not induce a connected subgraph.
    Disconnected { logical: NodeId },
    /// Condition 2: a physical qubit belongs to more than one chain.
    Overlap { physical: NodeId, logical: [NodeId; 2] },
    /// Condition 3: no coupler realises the logical edge.
    MissingEdge { u: NodeId, v: NodeId },
}

impl Violation {
    pub fn condition(&self) -> u8 {
        match self {
            Violation::Disconnected { .. } => 1,
            Violation::Overlap { .. } => 2,
            Violation::MissingEdge { .. } => 3,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disconnected { logical } => write!(f, "condition 1: chain of {logical} is not connected"),
            Violation::Overlap { physical, logical: [a, b] } => {
                write!(f, "condition 2: qubit {physical} shared by {a} and {b}")
            }
            Violation::MissingEdge { u, v } => write!(f, "condition 3: no coupler for edge ({u}, {v})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub n_phi: usize,
    pub lower_bound_sum: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub overhead_ratio: Option<Rational>,
}

fn ser_ratio<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_f64(crate::ratio::to_f64(*r)),
        None => s.serialize_none(),
    }
}

/// Check the three minor-embedding conditions, enumerating every failure.
///
/// Errors (rather than violations) are raised for physical ids missing from
/// `gt` and for a key set that differs from the source graph's nodes.
pub fn validate(emb: &Embedding, gs: &SourceGraph, gt: &TargetGraph) -> Result<EmbeddingReport> {
    check_keys(emb, gs)?;
    if let Some(&p) = emb.chains.values().flatten().find(|p| !gt.contains(**p)) {
        return Err(Error::UnknownNode(p));
    }
    let mut violations = Vec::new();
    for (&v, chain) in &emb.chains {
        let set: BTreeSet<NodeId> = chain.iter().copied().collect();
        if !gt.graph().is_connected_subset(&set) {
            violations.push(Violation::Disconnected { logical: v });
        }
    }
    let mut owner: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (&v, chain) in &emb.chains {
        for &p in chain {
            match owner.get(&p) {
                Some(&u) if u != v => violations.push(Violation::Overlap { physical: p, logical: [u, v] }),
                _ => {
                    owner.insert(p, v);
                }
            }
        }
    }
    for (u, v) in gs.edges() {
        if !chains_touch(&emb.chains[&u], &emb.chains[&v], gt) {
            violations.push(Violation::MissingEdge { u, v });
        }
    }
    // The bound is only defined for c_phys >= 3.
    let lower_bound_sum = if gt.c_phys() >= 3 { lower_bound_sum(gs, gt.c_phys()) } else { 0 };
    let n_phi = emb.qubit_count();
    Ok(EmbeddingReport {
        valid: violations.is_empty(),
        violations,
        n_phi,
        lower_bound_sum,
        overhead_ratio: (lower_bound_sum > 0).then(|| Rational::new(n_phi as u64, lower_bound_sum)),
    })
}

fn check_keys(emb: &Embedding, gs: &SourceGraph) -> Result<()> {
    if let Some(v) = gs.nodes().find(|v| !emb.chains.contains_key(v)) {
        return Err(Error::InvalidEmbedding(format!("logical node {v} has no chain")));
    }
    if let Some(&v) = emb.chains.keys().find(|v| !gs.contains(**v)) {
        return Err(Error::UnknownNode(v));
    }
    Ok(())
}

fn chains_touch(a: &[NodeId], b: &[NodeId], gt: &TargetGraph) -> bool {
    a.iter().any(|&p| b.iter().any(|&q| gt.has_edge(p, q)))
}

/// Minimum path length needed to give a logical node of degree `deg` enough
/// couplers on a topology with `c_phys` couplers per qubit.
///
/// One qubit suffices up to `c_phys` neighbours. A two-qubit path spends one
/// coupler per end on the chain link, reaching `2 c_phys - 2`; every further
/// interior qubit adds `c_phys - 2`.
pub fn chain_lower_bound(deg: u64, c_phys: u64) -> u64 {
    assert!(c_phys >= 3, "c_phys must be at least 3, got {c_phys}");
    let two_qubit_cap = 2 * c_phys - 2;
    if deg <= c_phys {
        1
    } else if deg <= two_qubit_cap {
        2
    } else {
        (deg - two_qubit_cap).div_ceil(c_phys - 2) + 2
    }
}

pub fn lower_bound_sum(gs: &SourceGraph, c_phys: usize) -> u64 {
    gs.nodes()
        .map(|v| chain_lower_bound(gs.degree(v) as u64, c_phys as u64))
        .sum()
}

/// Qubits used over the sum of per-node lower bounds.
///
/// Rejects embeddings with missing, empty or overlapping chains, and any
/// ratio below 1 (only possible for an embedding that cannot be valid).
pub fn overhead_ratio(emb: &Embedding, gs: &SourceGraph, c_phys: usize) -> Result<Rational> {
    check_keys(emb, gs)?;
    if let Some((v, _)) = emb.chains.iter().find(|(_, c)| c.is_empty()) {
        return Err(Error::InvalidEmbedding(format!("chain of {v} is empty")));
    }
    let used = emb.physical_nodes().len();
    if used != emb.qubit_count() {
        return Err(Error::InvalidEmbedding("chains overlap".into()));
    }
    if c_phys < 3 {
        return Err(Error::InvalidParameter(format!("c_phys must be at least 3, got {c_phys}")));
    }
    let bound = lower_bound_sum(gs, c_phys);
    if bound == 0 {
        return Err(Error::Empty("source graph".into()));
    }
    let r = Rational::new(used as u64, bound);
    if r < Rational::from_integer(1) {
        return Err(Error::InvalidEmbedding(format!(
            "{used} qubits is below the lower bound {bound}"
        )));
    }
    Ok(r)
}

/// `2|E| / (|V| (|V| - 1))`.
pub fn density(gs: &SourceGraph) -> Result<Rational> {
    let n = gs.node_count() as u64;
    if n < 2 {
        return Err(Error::TooFewNodes(n as usize));
    }
    Ok(Rational::new(2 * gs.edge_count() as u64, n * (n - 1)))
}

/// The maximal source graph realisable by `emb`: logical nodes are adjacent
/// exactly when some coupler joins their chains.
pub fn induced_source_graph(emb: &Embedding, gt: &TargetGraph) -> SourceGraph {
    let owner = emb.owners();
    let mut gs = Graph::with_nodes(emb.chains.keys().copied());
    for (p, q) in gt.graph().edges() {
        if let (Some(&u), Some(&v)) = (owner.get(&p), owner.get(&q)) {
            if u != v {
                gs.add_edge(u, v);
            }
        }
    }
    gs
}

/// Native clique embedding of `K_{t m}` into a full-yield `C(m, m, t)`.
///
/// Logical node `i t + k` owns shore qubit `k` of the left shore down column
/// `i` (rows `0..=i`), turning at cell `(i, i)` onto the right shore along row
/// `i` (columns `i..m`). Every chain is a path of `m + 1` qubits. Two nodes
/// in the same column block meet inside cell `(i, i)`; nodes `i < i'` meet in
/// cell `(i, i')`.
pub fn clique_embed_chimera(m: usize, t: usize) -> Result<(SourceGraph, Embedding, TargetGraph)> {
    let gt = build_chimera(m, m, t)?;
    let mut chains = BTreeMap::new();
    for i in 0..m {
        for k in 0..t {
            let mut chain: Vec<NodeId> = (0..=i).map(|r| chimera_node(m, t, r, i, 0, k)).collect();
            chain.extend((i..m).map(|c| chimera_node(m, t, i, c, 1, k)));
            chains.insert((i * t + k) as NodeId, chain);
        }
    }
    let emb = Embedding::new(gt.content_hash(), chains);
    let gs = induced_source_graph(&emb, &gt);
    Ok((gs, emb, gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::parse_edge_list;
    use std::path::Path;

    fn target(edges: &str) -> TargetGraph {
        parse_edge_list(Path::new("mem"), edges).unwrap()
    }

    fn emb(chains: &[(NodeId, &[NodeId])]) -> Embedding {
        Embedding::new("t", chains.iter().map(|(v, c)| (*v, c.to_vec())).collect())
    }

    #[test]
    fn validate_examples() {
        let gt = target("0 1\n1 2\n");
        let mut gs = Graph::new();
        gs.add_edge(10, 11);
        let ok = validate(&emb(&[(10, &[0]), (11, &[1])]), &gs, &gt).unwrap();
        assert!(ok.valid);
        assert_eq!(ok.n_phi, 2);

        let overlap = validate(&emb(&[(10, &[0, 1]), (11, &[1, 2])]), &gs, &gt).unwrap();
        assert!(!overlap.valid);
        assert_eq!(
            overlap.violations,
            vec![Violation::Overlap { physical: 1, logical: [10, 11] }]
        );

        let missing = validate(&emb(&[(10, &[0]), (11, &[2])]), &gs, &gt).unwrap();
        assert_eq!(missing.violations, vec![Violation::MissingEdge { u: 10, v: 11 }]);
        assert_eq!(missing.violations[0].condition(), 3);

        let broken = validate(&emb(&[(10, &[0, 2]), (11, &[1])]), &gs, &gt).unwrap();
        assert_eq!(broken.violations, vec![Violation::Disconnected { logical: 10 }]);

        assert!(matches!(
            validate(&emb(&[(10, &[0]), (11, &[9])]), &gs, &gt),
            Err(Error::UnknownNode(9))
        ));
        assert!(validate(&emb(&[(10, &[0])]), &gs, &gt).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(chain_lower_bound(15, 15), 1);
        assert_eq!(chain_lower_bound(28, 15), 2);
        assert_eq!(chain_lower_bound(29, 15), 3);
        assert_eq!(chain_lower_bound(0, 15), 1);
        assert_eq!(chain_lower_bound(31, 6), 8);
    }

    #[test]
    fn overhead_examples() {
        let gt = target("0 1\n");
        let mut gs = Graph::new();
        gs.add_edge(0, 1);
        let e = emb(&[(0, &[0]), (1, &[1])]);
        assert_eq!(overhead_ratio(&e, &gs, 15).unwrap(), Rational::from_integer(1));
        let _ = gt;

        // K_5 with c_phys = 3: each degree-4 node needs 2 qubits.
        let k5 = Graph::complete(5);
        let chains: Vec<(NodeId, Vec<NodeId>)> = vec![
            (0, vec![0, 1, 2]),
            (1, vec![3, 4, 5]),
            (2, vec![6, 7]),
            (3, vec![8, 9]),
            (4, vec![10, 11]),
        ];
        let e = Embedding::new("t", chains.into_iter().collect());
        assert_eq!(overhead_ratio(&e, &k5, 3).unwrap(), Rational::new(6, 5));

        let shared = emb(&[(0, &[0]), (1, &[0])]);
        assert!(overhead_ratio(&shared, &gs, 15).is_err());
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&Graph::complete(4)).unwrap(), Rational::from_integer(1));
        let mut p3 = Graph::new();
        p3.add_edge(0, 1);
        p3.add_edge(1, 2);
        assert_eq!(density(&p3).unwrap(), Rational::new(2, 3));
        assert_eq!(density(&Graph::with_nodes(0..5)).unwrap(), Rational::from_integer(0));
        assert!(density(&Graph::with_nodes([0])).is_err());
    }

    #[test]
    fn induced_examples() {
        let gt = target("0 1\n2\n");
        let gs = induced_source_graph(&emb(&[(5, &[0]), (6, &[1])]), &gt);
        assert_eq!(gs.edges().collect::<Vec<_>>(), vec![(5, 6)]);
        let gs = induced_source_graph(&emb(&[(5, &[0]), (6, &[2])]), &gt);
        assert_eq!(gs.edge_count(), 0);
        assert_eq!(gs.node_count(), 2);
    }

    #[test]
    fn clique_embeddings() {
        for (m, t) in [(1, 4), (2, 4), (3, 4), (8, 4), (3, 2)] {
            let (gs, e, gt) = clique_embed_chimera(m, t).unwrap();
            let n = (m * t) as u32;
            assert_eq!(gs, Graph::complete(n), "m = {m}");
            assert!(e.chains.values().all(|c| c.len() == m + 1));
            assert!(e.is_path_form(&gt));
            assert_eq!(e.qubit_count(), t * m * (m + 1));
            assert!(validate(&e, &gs, &gt).unwrap().valid);
        }
    }

    #[test]
    fn clique_overhead_closed_form() {
        for m in 1..=8usize {
            let t = 4;
            let (gs, e, gt) = clique_embed_chimera(m, t).unwrap();
            let per_node = chain_lower_bound((t * m - 1) as u64, 6);
            let expected = Rational::new((t * m * (m + 1)) as u64, (t * m) as u64 * per_node);
            assert_eq!(overhead_ratio(&e, &gs, gt.c_phys()).unwrap(), expected);
        }
    }
}
