//! Ising and QUBO cost functions, the three benchmark problem generators, and
//! assignment evaluation.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_key, Graph, NodeId};
use crate::rng::rng_from;
use crate::scalar::Scalar;

/// Coefficient grid of the generated instances.
pub const WEIGHT_SCALE: i64 = 128;
/// Penalty on each edge of the weighted MIS QUBO.
pub const MIS_PENALTY: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vartype {
    Spin,
    Binary,
}

/// Total assignment of spins (`-1`/`+1`) or bits (`0`/`1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub kind: Vartype,
    pub values: BTreeMap<NodeId, i8>,
}

impl Assignment {
    pub fn spins(values: impl IntoIterator<Item = (NodeId, i8)>) -> Self {
        Assignment { kind: Vartype::Spin, values: values.into_iter().collect() }
    }

    pub fn bits(values: impl IntoIterator<Item = (NodeId, i8)>) -> Self {
        Assignment { kind: Vartype::Binary, values: values.into_iter().collect() }
    }

    pub fn get(&self, v: NodeId) -> Result<i8> {
        self.values.get(&v).copied().ok_or(Error::MissingVariable(v))
    }

    pub fn to_binary(&self) -> Assignment {
        match self.kind {
            Vartype::Binary => self.clone(),
            Vartype::Spin => Assignment::bits(self.values.iter().map(|(&v, &s)| (v, i8::from(s > 0)))),
        }
    }

    pub fn to_spin(&self) -> Assignment {
        match self.kind {
            Vartype::Spin => self.clone(),
            Vartype::Binary => Assignment::spins(self.values.iter().map(|(&v, &x)| (v, 2 * x - 1))),
        }
    }

    /// Nodes set to 1 (binary) or +1 (spin).
    pub fn selected(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.values.iter().filter(|(_, &x)| x > 0).map(|(&v, _)| v)
    }
}

/// `C(s) = sum h_v s_v + sum J_uv s_u s_v + offset` over spins.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IsingModel<T> {
    h: BTreeMap<NodeId, T>,
    j: BTreeMap<(NodeId, NodeId), T>,
    offset: T,
}

/// `C(x) = sum a_v x_v + sum b_uv x_u x_v + offset` over bits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuboModel<T> {
    linear: BTreeMap<NodeId, T>,
    quadratic: BTreeMap<(NodeId, NodeId), T>,
    offset: T,
}

macro_rules! quadratic_model {
    ($ty:ident, $lin:ident, $quad:ident, $vartype:expr) => {
        impl<T: Scalar> $ty<T> {
            pub fn new() -> Self {
                $ty { $lin: BTreeMap::new(), $quad: BTreeMap::new(), offset: T::zero() }
            }

            pub fn with_variables(vars: impl IntoIterator<Item = NodeId>) -> Self {
                let mut m = Self::new();
                for v in vars {
                    m.add_variable(v);
                }
                m
            }

            pub fn add_variable(&mut self, v: NodeId) {
                self.$lin.entry(v).or_insert_with(T::zero);
            }

            pub fn add_linear(&mut self, v: NodeId, x: T) {
                let e = self.$lin.entry(v).or_insert_with(T::zero);
                *e = *e + x;
            }

            /// Add to the coupling of `(u, v)`. Panics when `u == v`.
            pub fn add_quadratic(&mut self, u: NodeId, v: NodeId, x: T) {
                assert_ne!(u, v, "self-coupling on {u}");
                self.add_variable(u);
                self.add_variable(v);
                let e = self.$quad.entry(edge_key(u, v)).or_insert_with(T::zero);
                *e = *e + x;
            }

            pub fn add_offset(&mut self, x: T) {
                self.offset = self.offset + x;
            }

            pub fn linear(&self) -> &BTreeMap<NodeId, T> {
                &self.$lin
            }

            pub fn quadratic(&self) -> &BTreeMap<(NodeId, NodeId), T> {
                &self.$quad
            }

            pub fn offset(&self) -> T {
                self.offset
            }

            pub fn variables(&self) -> impl Iterator<Item = NodeId> + '_ {
                self.$lin.keys().copied()
            }

            pub fn num_variables(&self) -> usize {
                self.$lin.len()
            }

            pub fn vartype(&self) -> Vartype {
                $vartype
            }

            /// Interaction graph over the model's variables.
            pub fn graph(&self) -> Graph {
                let mut g = Graph::with_nodes(self.variables());
                for &(u, v) in self.$quad.keys() {
                    g.add_edge(u, v);
                }
                g
            }

            /// Every coefficient (and the offset) multiplied by `alpha`.
            pub fn scaled(&self, alpha: T) -> Self {
                $ty {
                    $lin: self.$lin.iter().map(|(&k, &x)| (k, x * alpha)).collect(),
                    $quad: self.$quad.iter().map(|(&k, &x)| (k, x * alpha)).collect(),
                    offset: self.offset * alpha,
                }
            }

            pub fn energy(&self, a: &Assignment) -> Result<T> {
                if a.kind != $vartype {
                    return Err(Error::KindMismatch);
                }
                let mut e = self.offset;
                for (&v, &c) in &self.$lin {
                    e = e + c * T::from_i8(a.get(v)?).unwrap();
                }
                for (&(u, v), &c) in &self.$quad {
                    e = e + c * T::from_i8(a.get(u)? * a.get(v)?).unwrap();
                }
                Ok(e)
            }
        }
    };
}

quadratic_model!(IsingModel, h, j, Vartype::Spin);
quadratic_model!(QuboModel, linear, quadratic, Vartype::Binary);

impl<T: Scalar> IsingModel<T> {
    pub fn h(&self) -> &BTreeMap<NodeId, T> {
        &self.h
    }

    pub fn j(&self) -> &BTreeMap<(NodeId, NodeId), T> {
        &self.j
    }
}

/// Substitute `x = (1 + s) / 2`.
pub fn qubo_to_ising<T: Scalar>(q: &QuboModel<T>) -> IsingModel<T> {
    let half = T::one() / T::two();
    let quarter = half * half;
    let mut m = IsingModel::with_variables(q.variables());
    m.add_offset(q.offset());
    for (&v, &a) in q.linear() {
        m.add_linear(v, a * half);
        m.add_offset(a * half);
    }
    for (&(u, v), &b) in q.quadratic() {
        m.add_quadratic(u, v, b * quarter);
        m.add_linear(u, b * quarter);
        m.add_linear(v, b * quarter);
        m.add_offset(b * quarter);
    }
    m
}

/// Substitute `s = 2x - 1`.
pub fn ising_to_qubo<T: Scalar>(m: &IsingModel<T>) -> QuboModel<T> {
    let two = T::two();
    let mut q = QuboModel::with_variables(m.variables());
    q.add_offset(m.offset());
    for (&v, &h) in m.h() {
        q.add_linear(v, h * two);
        q.add_offset(-h);
    }
    for (&(u, v), &j) in m.j() {
        q.add_quadratic(u, v, j * two * two);
        q.add_linear(u, -j * two);
        q.add_linear(v, -j * two);
        q.add_offset(j);
    }
    q
}

/// Either form of a quadratic cost function.
#[derive(Clone, Debug, PartialEq)]
pub enum Model<T> {
    Ising(IsingModel<T>),
    Qubo(QuboModel<T>),
}

impl<T: Scalar> Model<T> {
    pub fn vartype(&self) -> Vartype {
        match self {
            Model::Ising(_) => Vartype::Spin,
            Model::Qubo(_) => Vartype::Binary,
        }
    }

    /// Energy of `a`, which must match the model's variable kind.
    pub fn evaluate(&self, a: &Assignment) -> Result<T> {
        match self {
            Model::Ising(m) => m.energy(a),
            Model::Qubo(q) => q.energy(a),
        }
    }

    pub fn to_ising(&self) -> IsingModel<T> {
        match self {
            Model::Ising(m) => m.clone(),
            Model::Qubo(q) => qubo_to_ising(q),
        }
    }

    pub fn to_qubo(&self) -> QuboModel<T> {
        match self {
            Model::Ising(m) => ising_to_qubo(m),
            Model::Qubo(q) => q.clone(),
        }
    }

    pub fn num_variables(&self) -> usize {
        match self {
            Model::Ising(m) => m.num_variables(),
            Model::Qubo(q) => q.num_variables(),
        }
    }

    pub fn variables(&self) -> Vec<NodeId> {
        match self {
            Model::Ising(m) => m.variables().collect(),
            Model::Qubo(q) => q.variables().collect(),
        }
    }

    /// Convert a spin assignment to this model's variable kind.
    pub fn from_spins(&self, spins: &Assignment) -> Assignment {
        match self.vartype() {
            Vartype::Spin => spins.to_spin(),
            Vartype::Binary => spins.to_binary(),
        }
    }
}

pub fn evaluate<T: Scalar>(model: &Model<T>, a: &Assignment) -> Result<T> {
    model.evaluate(a)
}

fn grid<T: Scalar>(numerator: i64) -> T {
    T::from_i64(numerator).unwrap() / T::from_i64(WEIGHT_SCALE).unwrap()
}

/// Max-cut as `min sum J_uv s_u s_v`. Unweighted: `J = 1`. Weighted: `J`
/// uniform over the 256 nonzero multiples of 1/128 in `[-1, 1]`, drawn per
/// edge in sorted edge order.
pub fn gen_maxcut<T: Scalar>(gs: &Graph, weighted: bool, seed: u64) -> IsingModel<T> {
    let mut rng = rng_from(seed);
    let mut m = IsingModel::with_variables(gs.nodes());
    for (u, v) in gs.edges() {
        let num = if weighted {
            let i: i64 = rng.gen_range(0..2 * WEIGHT_SCALE);
            if i < WEIGHT_SCALE {
                -(i + 1)
            } else {
                i - WEIGHT_SCALE + 1
            }
        } else {
            WEIGHT_SCALE
        };
        m.add_quadratic(u, v, grid(num));
    }
    m
}

/// Node weights drawn uniformly from `{1/128, ..., 128/128}` in node order.
pub fn draw_mis_weights<T: Scalar>(gs: &Graph, seed: u64) -> BTreeMap<NodeId, T> {
    let mut rng = rng_from(seed);
    gs.nodes()
        .map(|v| (v, grid(rng.gen_range(1..=WEIGHT_SCALE))))
        .collect()
}

/// Weighted MIS as `min -sum w_v x_v + 2 sum x_u x_v`.
pub fn gen_weighted_mis<T: Scalar>(gs: &Graph, seed: u64) -> QuboModel<T> {
    mis_qubo(gs, &draw_mis_weights(gs, seed))
}

pub fn mis_qubo<T: Scalar>(gs: &Graph, weights: &BTreeMap<NodeId, T>) -> QuboModel<T> {
    let mut q = QuboModel::with_variables(gs.nodes());
    for (&v, &w) in weights {
        q.add_linear(v, -w);
    }
    let penalty = T::from_i64(MIS_PENALTY).unwrap();
    for (u, v) in gs.edges() {
        q.add_quadratic(u, v, penalty);
    }
    q
}

/// Node weights of a weighted-MIS QUBO (negated linear terms).
pub fn mis_weights<T: Scalar>(q: &QuboModel<T>) -> BTreeMap<NodeId, T> {
    q.linear().iter().map(|(&v, &a)| (v, -a)).collect()
}

/// `(sum |J| - C(s)) / 2`; for unit weights, the number of cut edges.
pub fn cut_value<T: Scalar>(gs: &Graph, model: &IsingModel<T>, a: &Assignment) -> Result<T> {
    if let Some((&v, _)) = model.h().iter().find(|(_, h)| !h.is_zero()) {
        return Err(Error::NonzeroField(v));
    }
    if let Some(&(u, v)) = model.j().keys().find(|(u, v)| !gs.has_edge(*u, *v)) {
        return Err(Error::InvalidParameter(format!("coupling ({u}, {v}) is not a graph edge")));
    }
    let total: T = model.j().values().map(|j| j.abs()).sum();
    let c = model.energy(&a.to_spin())? - model.offset();
    Ok((total - c) / T::two())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MisCheck<T> {
    pub feasible: bool,
    pub weight: T,
    pub violated_edges: Vec<(NodeId, NodeId)>,
}

pub fn mis_check<T: Scalar>(gs: &Graph, weights: &BTreeMap<NodeId, T>, x: &Assignment) -> MisCheck<T> {
    let x = x.to_binary();
    let on = |v: NodeId| x.values.get(&v).is_some_and(|&b| b > 0);
    let violated_edges: Vec<_> = gs.edges().filter(|&(u, v)| on(u) && on(v)).collect();
    let weight = x
        .selected()
        .map(|v| weights.get(&v).copied().unwrap_or_else(T::zero))
        .sum();
    MisCheck { feasible: violated_edges.is_empty(), weight, violated_edges }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    #[serde(rename = "maxcut")]
    MaxCut,
    #[serde(rename = "wmaxcut")]
    WeightedMaxCut,
    #[serde(rename = "wmis")]
    WeightedMis,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::MaxCut, ProblemKind::WeightedMaxCut, ProblemKind::WeightedMis];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::WeightedMaxCut => "wmaxcut",
            ProblemKind::WeightedMis => "wmis",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut" => Ok(ProblemKind::MaxCut),
            "wmaxcut" => Ok(ProblemKind::WeightedMaxCut),
            "wmis" => Ok(ProblemKind::WeightedMis),
            _ => Err(Error::InvalidParameter(format!("unknown problem kind {s:?}"))),
        }
    }
}

/// One generated benchmark problem on a source graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance<T> {
    pub id: String,
    pub kind: ProblemKind,
    pub graph: Graph,
    pub seed: u64,
    pub model: Model<T>,
    /// Embedding file of the family member this instance was built on.
    pub embedding: Option<String>,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn generate(id: impl Into<String>, kind: ProblemKind, graph: Graph, seed: u64) -> Self {
        let model = match kind {
            ProblemKind::MaxCut => Model::Ising(gen_maxcut(&graph, false, seed)),
            ProblemKind::WeightedMaxCut => Model::Ising(gen_maxcut(&graph, true, seed)),
            ProblemKind::WeightedMis => Model::Qubo(gen_weighted_mis(&graph, seed)),
        };
        ProblemInstance { id: id.into(), kind, graph, seed, model, embedding: None }
    }

    pub fn mis_weights(&self) -> Option<BTreeMap<NodeId, T>> {
        match (&self.kind, &self.model) {
            (ProblemKind::WeightedMis, Model::Qubo(q)) => Some(mis_weights(q)),
            _ => None,
        }
    }

    /// Quantity being maximised: cut value for max-cut, set weight for MIS
    /// (only meaningful on a feasible assignment).
    pub fn metric(&self, a: &Assignment) -> Result<T> {
        match &self.model {
            Model::Ising(m) => cut_value(&self.graph, m, a),
            Model::Qubo(_) => {
                let w = self.mis_weights().ok_or(Error::KindMismatch)?;
                Ok(mis_check(&self.graph, &w, a).weight)
            }
        }
    }
}

/// Instance JSON. Coefficients are integer numerators over `scale` (128),
/// so files are bit-exact. For `wmis`, `h` holds the QUBO linear terms and
/// `J` the quadratic terms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub id: String,
    pub kind: ProblemKind,
    pub graph: Graph,
    pub scale: i64,
    pub h: BTreeMap<NodeId, i64>,
    #[serde(rename = "J")]
    pub j: Vec<(NodeId, NodeId, i64)>,
    pub offset: i64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
}

fn numerator<T: Scalar>(x: T) -> Result<i64> {
    let scaled = x.as_f64() * WEIGHT_SCALE as f64;
    if scaled.fract() != 0.0 || !scaled.is_finite() {
        return Err(Error::OffGrid(x.as_f64()));
    }
    Ok(scaled as i64)
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn to_file(&self) -> Result<InstanceFile> {
        let (lin, quad, offset) = match &self.model {
            Model::Ising(m) => (m.h(), m.j(), m.offset()),
            Model::Qubo(q) => (q.linear(), q.quadratic(), q.offset()),
        };
        Ok(InstanceFile {
            id: self.id.clone(),
            kind: self.kind,
            graph: self.graph.clone(),
            scale: WEIGHT_SCALE,
            h: lin.iter().map(|(&v, &x)| Ok((v, numerator(x)?))).collect::<Result<_>>()?,
            j: quad.iter().map(|(&(u, v), &x)| Ok((u, v, numerator(x)?))).collect::<Result<_>>()?,
            offset: numerator(offset)?,
            seed: self.seed,
            embedding: self.embedding.clone(),
        })
    }

    pub fn from_file(f: InstanceFile) -> Result<Self> {
        if f.scale <= 0 {
            return Err(Error::InvalidParameter(format!("bad scale {}", f.scale)));
        }
        let c = |n: i64| T::from_i64(n).unwrap() / T::from_i64(f.scale).unwrap();
        if let Some(&(u, _, _)) = f.j.iter().find(|(u, v, _)| u == v) {
            return Err(Error::InvalidParameter(format!("self-coupling on {u}")));
        }
        let model = match f.kind {
            ProblemKind::WeightedMis => {
                let mut q = QuboModel::with_variables(f.graph.nodes());
                f.h.iter().for_each(|(&v, &n)| q.add_linear(v, c(n)));
                f.j.iter().for_each(|&(u, v, n)| q.add_quadratic(u, v, c(n)));
                q.add_offset(c(f.offset));
                Model::Qubo(q)
            }
            ProblemKind::MaxCut | ProblemKind::WeightedMaxCut => {
                let mut m = IsingModel::with_variables(f.graph.nodes());
                f.h.iter().for_each(|(&v, &n)| m.add_linear(v, c(n)));
                f.j.iter().for_each(|&(u, v, n)| m.add_quadratic(u, v, c(n)));
                m.add_offset(c(f.offset));
                Model::Ising(m)
            }
        };
        Ok(ProblemInstance { id: f.id, kind: f.kind, graph: f.graph, seed: f.seed, model, embedding: f.embedding })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file()?)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_file(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn qubo_to_ising_example() {
        let mut q = QuboModel::<f64>::new();
        q.add_quadratic(0, 1, 4.0);
        q.add_linear(0, -2.0);
        q.add_linear(1, -2.0);
        q.add_offset(1.0);
        let m = qubo_to_ising(&q);
        assert_eq!(m.j()[&(0, 1)], 1.0);
        assert_eq!(m.h()[&0], 0.0);
        assert_eq!(m.h()[&1], 0.0);
        assert_eq!(m.offset(), 0.0);
        for bits in 0..4i8 {
            let x = Assignment::bits([(0, bits & 1), (1, bits >> 1)]);
            assert_eq!(q.energy(&x).unwrap(), m.energy(&x.to_spin()).unwrap());
        }
    }

    #[test]
    fn zero_models_convert_to_zero() {
        let q = QuboModel::<f64>::with_variables([0, 1]);
        let m = qubo_to_ising(&q);
        assert!(m.h().values().all(|x| *x == 0.0) && m.j().is_empty() && m.offset() == 0.0);
        assert_eq!(ising_to_qubo(&m), q);
    }

    #[test]
    fn maxcut_generation() {
        let m = gen_maxcut::<f64>(&triangle(), false, 0);
        assert_eq!(m.j().len(), 3);
        assert!(m.j().values().all(|&j| j == 1.0));
        assert!(m.h().values().all(|&h| h == 0.0));

        let g = Graph::complete(12);
        let w = gen_maxcut::<f64>(&g, true, 9);
        for &j in w.j().values() {
            let n = j * 128.0;
            assert_eq!(n.fract(), 0.0);
            assert!(n != 0.0 && n.abs() <= 128.0);
        }
        assert_eq!(w, gen_maxcut::<f64>(&g, true, 9));
        assert_ne!(w, gen_maxcut::<f64>(&g, true, 10));
    }

    #[test]
    fn weighted_maxcut_covers_both_signs() {
        let w = gen_maxcut::<f64>(&Graph::complete(30), true, 1);
        assert!(w.j().values().any(|&j| j < 0.0));
        assert!(w.j().values().any(|&j| j > 0.0));
    }

    #[test]
    fn mis_generation() {
        let g = Graph::complete(6);
        let q = gen_weighted_mis::<f64>(&g, 4);
        assert!(q.quadratic().values().all(|&b| b == 2.0));
        for w in mis_weights(&q).values() {
            assert!(*w > 0.0 && *w <= 1.0 && (w * 128.0).fract() == 0.0);
        }
        assert_eq!(q, gen_weighted_mis::<f64>(&g, 4));
    }

    #[test]
    fn single_edge_mis_optimum() {
        let mut g = Graph::new();
        g.add_edge(0, 1);
        let weights = BTreeMap::from([(0, 1.0), (1, 1.0 / 128.0)]);
        let q = mis_qubo(&g, &weights);
        let best = (0..4i8)
            .map(|b| {
                let x = Assignment::bits([(0, b & 1), (1, b >> 1)]);
                (q.energy(&x).unwrap(), x)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        assert_eq!(best.0, -1.0);
        assert_eq!(best.1, Assignment::bits([(0, 1), (1, 0)]));
    }

    #[test]
    fn empty_graph_mis_selects_all() {
        let g = Graph::with_nodes(0..3);
        let q = gen_weighted_mis::<f64>(&g, 2);
        let all = Assignment::bits((0..3).map(|v| (v, 1)));
        let total: f64 = mis_weights(&q).values().sum();
        assert_eq!(q.energy(&all).unwrap(), -total);
    }

    #[test]
    fn evaluate_examples() {
        let m = Model::Ising(gen_maxcut::<f64>(&triangle(), false, 0));
        let s = Assignment::spins([(0, 1), (1, 1), (2, -1)]);
        assert_eq!(m.evaluate(&s).unwrap(), -1.0);

        let mut ferro = IsingModel::<f64>::new();
        ferro.add_quadratic(0, 1, -1.0);
        assert_eq!(ferro.energy(&Assignment::spins([(0, 1), (1, 1)])).unwrap(), -1.0);

        let mut empty = IsingModel::<f64>::new();
        empty.add_offset(2.5);
        assert_eq!(empty.energy(&Assignment::spins([])).unwrap(), 2.5);

        assert!(matches!(m.evaluate(&Assignment::spins([(0, 1)])), Err(Error::MissingVariable(1))));
        assert!(matches!(m.evaluate(&s.to_binary()), Err(Error::KindMismatch)));
    }

    #[test]
    fn cut_value_examples() {
        let g = triangle();
        let m = gen_maxcut::<f64>(&g, false, 0);
        let s = Assignment::spins([(0, 1), (1, 1), (2, -1)]);
        assert_eq!(cut_value(&g, &m, &s).unwrap(), 2.0);
        let same = Assignment::spins([(0, 1), (1, 1), (2, 1)]);
        assert_eq!(cut_value(&g, &m, &same).unwrap(), 0.0);

        let mut e = Graph::new();
        e.add_edge(0, 1);
        let m1 = gen_maxcut::<f64>(&e, false, 0);
        assert_eq!(cut_value(&e, &m1, &Assignment::spins([(0, 1), (1, -1)])).unwrap(), 1.0);

        let mut biased = m1.clone();
        biased.add_linear(0, 0.5);
        assert!(matches!(cut_value(&e, &biased, &Assignment::spins([(0, 1), (1, -1)])), Err(Error::NonzeroField(0))));
    }

    #[test]
    fn mis_check_examples() {
        let mut e = Graph::new();
        e.add_edge(0, 1);
        let w = BTreeMap::from([(0, 0.5), (1, 0.25)]);
        let c = mis_check(&e, &w, &Assignment::bits([(0, 1), (1, 1)]));
        assert!(!c.feasible);
        assert_eq!(c.violated_edges, vec![(0, 1)]);

        let c = mis_check(&e, &w, &Assignment::bits([(0, 0), (1, 0)]));
        assert!(c.feasible && c.weight == 0.0);

        let mut p3 = Graph::new();
        p3.add_edge(1, 2);
        p3.add_edge(2, 3);
        let w = BTreeMap::from([(1, 0.125), (2, 1.0), (3, 0.5)]);
        let c = mis_check(&p3, &w, &Assignment::bits([(1, 1), (2, 0), (3, 1)]));
        assert!(c.feasible);
        assert_eq!(c.weight, 0.625);
    }

    #[test]
    fn instance_file_is_exact() {
        let g = Graph::complete(5);
        for kind in ProblemKind::ALL {
            let inst = ProblemInstance::<f64>::generate("x", kind, g.clone(), 3);
            let back = ProblemInstance::<f64>::from_file(inst.to_file().unwrap()).unwrap();
            assert_eq!(back, inst);
        }
        let f = ProblemInstance::<f64>::generate("t", ProblemKind::MaxCut, triangle(), 0).to_file().unwrap();
        assert!(f.j.iter().all(|&(_, _, n)| n == 128));
    }

    #[test]
    fn off_grid_coefficients_are_rejected() {
        let mut m = IsingModel::<f64>::new();
        m.add_quadratic(0, 1, 0.001);
        let inst = ProblemInstance {
            id: "x".into(),
            kind: ProblemKind::MaxCut,
            graph: m.graph(),
            seed: 0,
            model: Model::Ising(m),
            embedding: None,
        };
        assert!(matches!(inst.to_file(), Err(Error::OffGrid(_))));
    }
}
