//! Chain-split instance generation.
//!
//! Starting from a clique embedding, a random logical node whose chain has at
//! least two qubits is split into two halves; the halves become two logical
//! nodes and the source graph is recomputed as the maximal graph the chains
//! realise. Repeating lowers density while every instance keeps exactly the
//! physical qubits of the starting embedding.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use super::{density, is_path, Embedding, SourceGraph};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::ratio::{to_f64, Rational};
use crate::rng::{derive_rng, derive_seed, Rng};
use crate::topology::TargetGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitRecord {
    pub step: usize,
    pub node: NodeId,
    pub new_node: NodeId,
    pub sizes: (usize, usize),
}

/// Source graph, embedding and random stream of one generation run.
#[derive(Clone, Debug)]
pub struct GenerationState {
    source: SourceGraph,
    emb: Embedding,
    owner: BTreeMap<NodeId, NodeId>,
    rng: Rng,
    split_log: Vec<SplitRecord>,
    next_id: NodeId,
}

impl GenerationState {
    /// Start from a valid path-form embedding. The source graph is taken as
    /// given; it is replaced by the induced graph at the first split.
    pub fn new(source: SourceGraph, emb: Embedding, rng: Rng) -> Self {
        let owner = emb.owners();
        let next_id = emb.chains.keys().next_back().map_or(0, |v| v + 1);
        GenerationState { source, emb, owner, rng, split_log: Vec::new(), next_id }
    }

    pub fn source(&self) -> &SourceGraph {
        &self.source
    }

    pub fn embedding(&self) -> &Embedding {
        &self.emb
    }

    pub fn split_log(&self) -> &[SplitRecord] {
        &self.split_log
    }

    pub fn into_parts(self) -> (SourceGraph, Embedding) {
        (self.source, self.emb)
    }

    pub fn splittable(&self) -> Vec<NodeId> {
        self.emb
            .chains
            .iter()
            .filter(|(_, c)| c.len() >= 2)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Split the chain of `v`: `v` keeps the first `ceil(L/2)` qubits and a
    /// fresh node takes the remaining `floor(L/2)`.
    pub fn split_chain(&mut self, v: NodeId, gt: &TargetGraph) -> Result<NodeId> {
        let chain = self.emb.chains.get_mut(&v).ok_or(Error::UnknownNode(v))?;
        if chain.len() < 2 {
            return Err(Error::SingletonChain(v));
        }
        if !is_path(chain, gt) {
            return Err(Error::InvalidEmbedding(format!("chain of {v} is not a path")));
        }
        let keep = chain.len().div_ceil(2);
        let tail = chain.split_off(keep);
        let fresh = self.next_id;
        self.next_id += 1;
        for &p in &tail {
            self.owner.insert(p, fresh);
        }
        self.split_log.push(SplitRecord {
            step: self.split_log.len(),
            node: v,
            new_node: fresh,
            sizes: (keep, tail.len()),
        });
        self.emb.chains.insert(fresh, tail);

        self.source.clear_node(v);
        self.source.add_node(fresh);
        for x in [v, fresh] {
            for &p in &self.emb.chains[&x] {
                for q in gt.graph().neighbors(p) {
                    match self.owner.get(&q) {
                        Some(&y) if y != x => {
                            self.source.add_edge(x, y);
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(fresh)
    }

    /// Split a uniformly chosen splittable node.
    pub fn split_random(&mut self, gt: &TargetGraph) -> Result<NodeId> {
        let candidates = self.splittable();
        if candidates.is_empty() {
            return Err(Error::Empty("no chain with two or more qubits".into()));
        }
        let v = candidates[self.rng.gen_range(0..candidates.len())];
        self.split_chain(v, gt)?;
        Ok(v)
    }

    /// Split until the density is at most `target`.
    pub fn split_until(&mut self, target: Rational, gt: &TargetGraph) -> Result<()> {
        loop {
            let d = density(&self.source)?;
            if d <= target {
                return Ok(());
            }
            if self.splittable().is_empty() {
                return Err(Error::UnreachableDensity { target: to_f64(target), reached: to_f64(d) });
            }
            self.split_random(gt)?;
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub id: String,
    pub target_density: Rational,
    pub density: Rational,
    pub seed: u64,
    pub splits: usize,
    pub source: SourceGraph,
    pub embedding: Embedding,
}

/// Instances generated from one start embedding; all share its qubits.
#[derive(Clone, Debug)]
pub struct InstanceFamily {
    pub target_hash: String,
    pub physical_nodes: BTreeSet<NodeId>,
    pub members: Vec<FamilyMember>,
}

/// Generate `count` instances per target density.
///
/// Each instance is an independent run from `start` with its own stream
/// derived from `(seed, density index, repetition)`, stopping at the first
/// graph whose density is at most the target. Runs execute on the rayon pool;
/// the result does not depend on scheduling.
pub fn generate_family(
    start: (&SourceGraph, &Embedding),
    gt: &TargetGraph,
    densities: &[Rational],
    count: usize,
    seed: u64,
) -> Result<InstanceFamily> {
    let (gs, emb) = start;
    if !emb.is_path_form(gt) {
        return Err(Error::InvalidEmbedding("start chains must be paths in the target".into()));
    }
    let report = super::validate(emb, gs, gt)?;
    if !report.valid {
        return Err(Error::InvalidEmbedding(report.violations[0].to_string()));
    }
    let d0 = density(gs)?;
    if densities.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("densities must be sorted descending".into()));
    }
    if let Some(d) = densities.iter().find(|&&d| d >= d0) {
        return Err(Error::InvalidParameter(format!(
            "target density {} is not below the start density {}",
            to_f64(*d),
            to_f64(d0)
        )));
    }

    let jobs: Vec<(usize, usize)> =
        (0..densities.len()).flat_map(|di| (0..count).map(move |r| (di, r))).collect();
    let members = jobs
        .par_iter()
        .map(|&(di, r)| {
            let path = [di as u64, r as u64];
            let run_seed = derive_seed(seed, &path);
            let mut state = GenerationState::new(gs.clone(), emb.clone(), derive_rng(seed, &path));
            state.split_until(densities[di], gt)?;
            let splits = state.split_log().len();
            let (source, embedding) = state.into_parts();
            Ok(FamilyMember {
                id: format!("d{di:02}-i{r:03}"),
                target_density: densities[di],
                density: density(&source)?,
                seed: run_seed,
                splits,
                source,
                embedding,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceFamily {
        target_hash: emb.target.clone(),
        physical_nodes: emb.physical_nodes(),
        members,
    })
}
