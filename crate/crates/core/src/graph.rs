//! Simple undirected graphs over integer node ids.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

/// Canonical (smaller, larger) form of an undirected edge.
#[inline]
pub fn edge_key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Simple undirected graph: no self-loops, no parallel edges.
///
/// Adjacency is kept in ordered maps so iteration order (and therefore every
/// seeded random choice made over nodes or edges) is deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
    edge_count: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    nodes: Vec<NodeId>,
    edges: Vec<[NodeId; 2]>,
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            nodes: g.nodes().collect(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<GraphRepr> for Graph {
    type Error = String;

    fn try_from(r: GraphRepr) -> Result<Self, String> {
        let mut g = Graph::with_nodes(r.nodes);
        for [u, v] in r.edges {
            if u == v {
                return Err(format!("self-loop on node {u}"));
            }
            if !g.add_edge(u, v) {
                return Err(format!("duplicate edge ({u}, {v})"));
            }
        }
        Ok(g)
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Graph {
            adj: nodes.into_iter().map(|n| (n, BTreeSet::new())).collect(),
            edge_count: 0,
        }
    }

    /// Complete graph on nodes `0..n`.
    pub fn complete(n: u32) -> Self {
        let mut g = Graph::with_nodes(0..n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn add_node(&mut self, n: NodeId) {
        self.adj.entry(n).or_default();
    }

    /// Insert an edge, creating missing endpoints. Returns `false` when the
    /// edge already existed.
    ///
    /// Panics on a self-loop.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        assert_ne!(u, v, "self-loop on node {u}");
        let fresh = self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
        if fresh {
            self.edge_count += 1;
        }
        fresh
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let removed = self.adj.get_mut(&u).is_some_and(|s| s.remove(&v));
        if removed {
            self.adj.get_mut(&v).map(|s| s.remove(&u));
            self.edge_count -= 1;
        }
        removed
    }

    /// Remove every edge incident to `n`, keeping the node.
    pub fn clear_node(&mut self, n: NodeId) {
        let Some(nbrs) = self.adj.get_mut(&n).map(std::mem::take) else {
            return;
        };
        self.edge_count -= nbrs.len();
        for m in nbrs {
            if let Some(s) = self.adj.get_mut(&m) {
                s.remove(&n);
            }
        }
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.adj.contains_key(&n)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn neighbors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.get(&n).into_iter().flatten().copied()
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adj.get(&n).map_or(0, BTreeSet::len)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges in canonical `(u, v)` form with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, s)| s.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Subgraph induced on the nodes in `keep`. Ids not in the graph are ignored.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> Graph {
        let mut g = Graph::with_nodes(keep.iter().copied().filter(|n| self.contains(*n)));
        for (u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Whether `set` is nonempty and induces a connected subgraph.
    pub fn is_connected_subset(&self, set: &BTreeSet<NodeId>) -> bool {
        let Some(&start) = set.iter().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for m in self.neighbors(n) {
                if set.contains(&m) && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen.len() == set.len()
    }

    pub fn is_connected(&self) -> bool {
        let all: BTreeSet<_> = self.nodes().collect();
        all.is_empty() || self.is_connected_subset(&all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_remove_counts() {
        let mut g = Graph::complete(4);
        assert_eq!(g.edge_count(), 6);
        assert!(!g.add_edge(1, 0));
        assert!(g.remove_edge(2, 1));
        assert_eq!(g.edge_count(), 5);
        g.clear_node(0);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(0), 0);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn connectivity_of_subsets() {
        let mut g = Graph::new();
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_node(3);
        assert!(g.is_connected_subset(&BTreeSet::from([0, 1, 2])));
        assert!(!g.is_connected_subset(&BTreeSet::from([0, 2])));
        assert!(!g.is_connected_subset(&BTreeSet::new()));
        assert!(!g.is_connected());
    }

    #[test]
    fn json_rejects_self_loops() {
        let ok: Graph = serde_json::from_str(r#"{"nodes":[0,1],"edges":[[0,1]]}"#).unwrap();
        assert_eq!(ok.edge_count(), 1);
        assert!(serde_json::from_str::<Graph>(r#"{"nodes":[0],"edges":[[0,0]]}"#).is_err());
        assert!(serde_json::from_str::<Graph>(r#"{"nodes":[],"edges":[[0,1],[1,0]]}"#).is_err());
    }
}
