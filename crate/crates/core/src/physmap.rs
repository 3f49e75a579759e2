//! Pushing logical models onto the hardware graph and pulling samples back.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embedding::{is_path, Embedding};
use crate::error::{Error, Result};
use crate::graph::{edge_key, NodeId};
use crate::problems::{Assignment, IsingModel, Vartype};
use crate::rng::{rng_from, Rng};
use crate::scalar::Scalar;
use crate::topology::TargetGraph;

/// Default prefactor of [`torque_compensation_strength`].
pub const TORQUE_PREFACTOR: f64 = 1.414;

/// Ising model over physical qubits with ferromagnetic chain couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalModel<T> {
    pub ising: IsingModel<T>,
    pub chain_edges: BTreeSet<(NodeId, NodeId)>,
    pub chain_strength: T,
}

impl<T: Scalar> PhysicalModel<T> {
    /// Divide every coefficient (chain couplings included) by the largest
    /// magnitude, mapping the model into `[-1, 1]`. Returns the divisor.
    pub fn rescaled(&self) -> (Self, T) {
        let max = self
            .ising
            .h()
            .values()
            .chain(self.ising.j().values())
            .fold(T::zero(), |m, x| m.max(x.abs()));
        if max.is_zero() {
            return (self.clone(), T::one());
        }
        let inv = T::one() / max;
        let model = PhysicalModel {
            ising: self.ising.scaled(inv),
            chain_edges: self.chain_edges.clone(),
            chain_strength: self.chain_strength * inv,
        };
        (model, max)
    }
}

/// Spread each `h_v` evenly over the qubits of its chain and each `J_uv`
/// evenly over every coupler joining the two chains; consecutive chain
/// qubits get `-strength`.
pub fn embed_problem<T: Scalar>(
    m: &IsingModel<T>,
    emb: &Embedding,
    gt: &TargetGraph,
    strength: T,
) -> Result<PhysicalModel<T>> {
    if !(strength > T::zero()) {
        return Err(Error::InvalidParameter(format!("chain strength must be positive, got {strength}")));
    }
    let mut owner = BTreeMap::new();
    for v in m.variables() {
        let chain = emb.chain(v).ok_or_else(|| Error::InvalidEmbedding(format!("no chain for {v}")))?;
        if !is_path(chain, gt) {
            return Err(Error::InvalidEmbedding(format!("chain of {v} is not a path in the target")));
        }
        for &p in chain {
            if let Some(u) = owner.insert(p, v) {
                return Err(Error::InvalidEmbedding(format!("qubit {p} shared by {u} and {v}")));
            }
        }
    }

    let mut phys = IsingModel::with_variables(owner.keys().copied());
    phys.add_offset(m.offset());
    for (&v, &h) in m.h() {
        let chain = emb.chain(v).unwrap();
        let share = h / T::from_usize_lossy(chain.len());
        for &p in chain {
            phys.add_linear(p, share);
        }
    }
    for (&(u, v), &j) in m.j() {
        let (cu, cv) = (emb.chain(u).unwrap(), emb.chain(v).unwrap());
        let couplers: Vec<(NodeId, NodeId)> = cu
            .iter()
            .flat_map(|&p| cv.iter().filter(move |&&q| gt.has_edge(p, q)).map(move |&q| (p, q)))
            .collect();
        if couplers.is_empty() {
            return Err(Error::InvalidEmbedding(format!("no coupler joins the chains of {u} and {v}")));
        }
        let share = j / T::from_usize_lossy(couplers.len());
        for (p, q) in couplers {
            phys.add_quadratic(p, q, share);
        }
    }
    let mut chain_edges = BTreeSet::new();
    for v in m.variables() {
        for w in emb.chain(v).unwrap().windows(2) {
            chain_edges.insert(edge_key(w[0], w[1]));
            phys.add_quadratic(w[0], w[1], -strength);
        }
    }
    Ok(PhysicalModel { ising: phys, chain_edges, chain_strength: strength })
}

/// `prefactor * sqrt(mean J^2) * sqrt(mean degree)`, a mirror of the vendor's
/// uniform torque compensation.
pub fn torque_compensation_strength<T: Scalar>(m: &IsingModel<T>, prefactor: T) -> Result<T> {
    let couplings = m.j();
    if couplings.is_empty() {
        return Err(Error::NoCouplings);
    }
    let k = T::from_usize_lossy(couplings.len());
    let rms = (couplings.values().map(|&j| j * j).sum::<T>() / k).sqrt();
    let mean_degree = T::two() * k / T::from_usize_lossy(m.num_variables());
    Ok(prefactor * rms * mean_degree.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unembedded {
    pub assignment: Assignment,
    pub broken: BTreeSet<NodeId>,
    /// Chains whose vote was tied and settled by a coin.
    pub ties: usize,
}

/// Majority vote per chain; ties are settled by a fair coin from `rng`.
pub fn unembed_majority_with(s: &Assignment, emb: &Embedding, rng: &mut Rng) -> Result<Unembedded> {
    let s = s.to_spin();
    let mut values = BTreeMap::new();
    let mut broken = BTreeSet::new();
    let mut ties = 0;
    for (&v, chain) in &emb.chains {
        let mut sum = 0i64;
        let mut ups = 0usize;
        for &p in chain {
            let x = s.get(p)?;
            sum += i64::from(x);
            ups += usize::from(x > 0);
        }
        if ups != 0 && ups != chain.len() {
            broken.insert(v);
        }
        let value = match sum.signum() {
            0 => {
                ties += 1;
                if rng.gen_bool(0.5) {
                    1
                } else {
                    -1
                }
            }
            sign => sign as i8,
        };
        values.insert(v, value);
    }
    Ok(Unembedded { assignment: Assignment::spins(values), broken, ties })
}

pub fn unembed_majority(s: &Assignment, emb: &Embedding, seed: u64) -> Result<Unembedded> {
    unembed_majority_with(s, emb, &mut rng_from(seed))
}

/// Copy each logical value across its chain.
pub fn embed_assignment(a: &Assignment, emb: &Embedding) -> Result<Assignment> {
    let mut values = BTreeMap::new();
    for (&v, chain) in &emb.chains {
        let x = a.get(v)?;
        values.extend(chain.iter().map(|&p| (p, x)));
    }
    Ok(Assignment { kind: a.kind, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSpace {
    Physical,
    Logical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub assignment: BTreeMap<NodeId, i8>,
    pub energy: T,
    pub occurrences: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub shots: usize,
    pub sweeps: usize,
    pub seed: u64,
    #[serde(default)]
    pub tie_breaks: usize,
}

/// Distinct samples with occurrence counts, sorted by energy then assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet<T> {
    pub space: SampleSpace,
    pub vartype: Vartype,
    pub samples: Vec<Sample<T>>,
    pub meta: SampleMeta,
}

impl<T: Scalar> SampleSet<T> {
    /// Aggregate raw samples (assignment, energy) into counted distinct ones.
    pub fn from_raw(
        space: SampleSpace,
        vartype: Vartype,
        raw: impl IntoIterator<Item = (BTreeMap<NodeId, i8>, T)>,
        meta: SampleMeta,
    ) -> Self {
        let mut counts: BTreeMap<BTreeMap<NodeId, i8>, (T, usize)> = BTreeMap::new();
        for (a, e) in raw {
            counts.entry(a).or_insert((e, 0)).1 += 1;
        }
        let mut samples: Vec<Sample<T>> = counts
            .into_iter()
            .map(|(assignment, (energy, occurrences))| Sample { assignment, energy, occurrences })
            .collect();
        samples.sort_by(|a, b| {
            a.energy
                .partial_cmp(&b.energy)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.assignment.cmp(&b.assignment))
        });
        SampleSet { space, vartype, samples, meta }
    }

    pub fn total_occurrences(&self) -> usize {
        self.samples.iter().map(|s| s.occurrences).sum()
    }

    pub fn best(&self) -> Option<&Sample<T>> {
        self.samples.first()
    }

    pub fn assignment(&self, i: usize) -> Assignment {
        Assignment { kind: self.vartype, values: self.samples[i].assignment.clone() }
    }
}

/// Fraction of (sample, chain) pairs whose chain disagrees, weighted by
/// occurrences.
pub fn chain_break_fraction<T: Scalar>(ss: &SampleSet<T>, emb: &Embedding) -> Result<f64> {
    if ss.space != SampleSpace::Physical {
        return Err(Error::InvalidParameter("chain breaks need physical samples".into()));
    }
    let chains = emb.chains.len();
    let total = ss.total_occurrences() * chains;
    if total == 0 {
        return Ok(0.0);
    }
    let mut broken = 0usize;
    for s in &ss.samples {
        let mut k = 0;
        for chain in emb.chains.values() {
            let first = *s.assignment.get(&chain[0]).ok_or(Error::MissingVariable(chain[0]))?;
            for p in &chain[1..] {
                let x = *s.assignment.get(p).ok_or(Error::MissingVariable(*p))?;
                if x != first {
                    k += 1;
                    break;
                }
            }
        }
        broken += k * s.occurrences;
    }
    Ok(broken as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{clique_embed_chimera, induced_source_graph};
    use crate::problems::gen_maxcut;
    use crate::topology::parse_edge_list;
    use std::path::Path;

    fn target(s: &str) -> TargetGraph {
        parse_edge_list(Path::new("m"), s).unwrap()
    }

    #[test]
    fn singleton_chains_copy_model() {
        let gt = target("0 1\n1 2\n");
        let emb = Embedding::new("t", [(0, vec![0]), (1, vec![1]), (2, vec![2])].into_iter().collect());
        let mut m = IsingModel::<f64>::new();
        m.add_linear(0, 0.5);
        m.add_quadratic(0, 1, 1.0);
        m.add_quadratic(1, 2, -0.25);
        let p = embed_problem(&m, &emb, &gt, 2.0).unwrap();
        assert!(p.chain_edges.is_empty());
        assert_eq!(p.ising, m);
    }

    #[test]
    fn spreading_examples() {
        let gt = target("0 1\n1 2\n2 3\n3 4\n0 5\n1 6\n5 6\n");
        let emb = Embedding::new("t", [(0, vec![0, 1, 2, 3]), (1, vec![5, 6])].into_iter().collect());
        let mut m = IsingModel::<f64>::new();
        m.add_linear(0, 1.0);
        m.add_quadratic(0, 1, 1.0);
        let p = embed_problem(&m, &emb, &gt, 1.5).unwrap();
        for q in [0, 1, 2, 3] {
            assert_eq!(p.ising.h()[&q], 0.25);
        }
        assert_eq!(p.ising.j()[&(0, 5)], 0.5);
        assert_eq!(p.ising.j()[&(1, 6)], 0.5);
        assert_eq!(p.ising.j()[&(5, 6)], -1.5);
        assert_eq!(p.chain_edges.len(), 4);
        assert!(embed_problem(&m, &emb, &gt, 0.0).is_err());
    }

    #[test]
    fn torque_examples() {
        let g = crate::graph::Graph::complete(4); // 3-regular
        let m = gen_maxcut::<f64>(&g, false, 0);
        let s = torque_compensation_strength(&m, 1.414).unwrap();
        assert!((s - 1.414 * 3f64.sqrt()).abs() < 1e-12);
        assert!((s - 2.449).abs() < 1e-3);
        let half = torque_compensation_strength(&m, 0.5).unwrap();
        let one = torque_compensation_strength(&m, 1.0).unwrap();
        assert!((half * 2.0 - one).abs() < 1e-12);

        let mut e = IsingModel::<f64>::new();
        e.add_quadratic(0, 1, 1.0);
        assert!((torque_compensation_strength(&e, 1.414).unwrap() - 1.414).abs() < 1e-12);
        assert!(matches!(
            torque_compensation_strength(&IsingModel::<f64>::with_variables([0]), 1.0),
            Err(Error::NoCouplings)
        ));
    }

    #[test]
    fn majority_examples() {
        let emb = Embedding::new("t", [(0, vec![0, 1, 2])].into_iter().collect());
        let u = unembed_majority(&Assignment::spins([(0, 1), (1, 1), (2, 1)]), &emb, 0).unwrap();
        assert_eq!(u.assignment.get(0).unwrap(), 1);
        assert!(u.broken.is_empty());
        let u = unembed_majority(&Assignment::spins([(0, 1), (1, 1), (2, -1)]), &emb, 0).unwrap();
        assert_eq!(u.assignment.get(0).unwrap(), 1);
        assert!(u.broken.contains(&0));

        let even = Embedding::new("t", [(0, vec![0, 1])].into_iter().collect());
        let s = Assignment::spins([(0, 1), (1, -1)]);
        let a = unembed_majority(&s, &even, 17).unwrap();
        let b = unembed_majority(&s, &even, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ties, 1);
        assert!(a.broken.contains(&0));
        let outcomes: BTreeSet<i8> = (0..32)
            .map(|seed| unembed_majority(&s, &even, seed).unwrap().assignment.get(0).unwrap())
            .collect();
        assert_eq!(outcomes.len(), 2);

        assert!(matches!(
            unembed_majority(&Assignment::spins([(0, 1)]), &emb, 0),
            Err(Error::MissingVariable(1))
        ));
    }

    #[test]
    fn embed_then_unembed_is_identity() {
        let (_, emb, _) = clique_embed_chimera(2, 4).unwrap();
        let a = Assignment::spins((0..8).map(|v| (v, if v % 3 == 0 { 1 } else { -1 })));
        let u = unembed_majority(&embed_assignment(&a, &emb).unwrap(), &emb, 0).unwrap();
        assert_eq!(u.assignment, a);
        assert!(u.broken.is_empty());
    }

    #[test]
    fn chain_break_examples() {
        let emb = Embedding::new("t", [(0, vec![0, 1]), (1, vec![2, 3])].into_iter().collect());
        let meta = SampleMeta::default();
        let intact = BTreeMap::from([(0, 1), (1, 1), (2, -1), (3, -1)]);
        let one_broken = BTreeMap::from([(0, 1), (1, -1), (2, -1), (3, -1)]);
        let all_broken = BTreeMap::from([(0, 1), (1, -1), (2, 1), (3, -1)]);

        let ss = SampleSet::from_raw(SampleSpace::Physical, Vartype::Spin, [(intact.clone(), 0.0)], meta.clone());
        assert_eq!(chain_break_fraction(&ss, &emb).unwrap(), 0.0);
        let ss = SampleSet::from_raw(SampleSpace::Physical, Vartype::Spin, [(all_broken, 0.0)], meta.clone());
        assert_eq!(chain_break_fraction(&ss, &emb).unwrap(), 1.0);
        let ss = SampleSet::from_raw(
            SampleSpace::Physical,
            Vartype::Spin,
            [(intact.clone(), 0.0), (intact, 0.0), (one_broken.clone(), 1.0), (one_broken, 1.0)],
            meta.clone(),
        );
        assert_eq!(ss.total_occurrences(), 4);
        assert_eq!(chain_break_fraction(&ss, &emb).unwrap(), 0.25);

        let logical = SampleSet::<f64> { space: SampleSpace::Logical, ..ss };
        assert!(chain_break_fraction(&logical, &emb).is_err());
    }

    #[test]
    fn rescale_maps_into_unit_range() {
        let (gs, emb, gt) = clique_embed_chimera(2, 4).unwrap();
        let m = gen_maxcut::<f64>(&induced_source_graph(&emb, &gt), true, 3);
        let _ = gs;
        let p = embed_problem(&m, &emb, &gt, 4.0).unwrap();
        let (r, div) = p.rescaled();
        assert_eq!(div, 4.0);
        assert_eq!(r.chain_strength, 1.0);
        assert!(r.ising.j().values().all(|j| j.abs() <= 1.0));
    }
}
