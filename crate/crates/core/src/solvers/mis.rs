//! Independent-set post-processing and the random maximal-set baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{require, Diagnostics, SolveResult};
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::problems::{mis_qubo, Assignment};
use crate::rng::{derive_rng, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Repair {
    pub assignment: Assignment,
    pub removals: usize,
    /// Violated edges whose endpoints had equal weight (settled by a coin).
    pub ties: usize,
}

/// Repeatedly pick a uniformly random violated edge and drop its lighter
/// endpoint until the selection is independent. Only removes nodes.
pub fn mis_repair<T: Scalar>(gs: &Graph, weights: &BTreeMap<NodeId, T>, x: &Assignment, rng: &mut Rng) -> Repair {
    let mut x = x.to_binary();
    let mut on: BTreeSet<NodeId> = x.selected().collect();
    let mut violated: Vec<(NodeId, NodeId)> = gs
        .edges()
        .filter(|(u, v)| on.contains(u) && on.contains(v))
        .collect();
    let (mut removals, mut ties) = (0, 0);
    let weight = |v: NodeId| weights.get(&v).copied().unwrap_or_else(T::zero);
    // Edges made stale by an earlier removal are skipped, so each accepted
    // pick is uniform over the edges still violated.
    while !violated.is_empty() {
        let (u, v) = violated.swap_remove(rng.gen_range(0..violated.len()));
        if !(on.contains(&u) && on.contains(&v)) {
            continue;
        }
        let drop = match weight(u).partial_cmp(&weight(v)) {
            Some(std::cmp::Ordering::Greater) => v,
            Some(std::cmp::Ordering::Less) => u,
            _ => {
                ties += 1;
                if rng.gen_bool(0.5) {
                    u
                } else {
                    v
                }
            }
        };
        on.remove(&drop);
        x.values.insert(drop, 0);
        removals += 1;
    }
    Repair { assignment: x, removals, ties }
}

/// Random sequential maximal independent sets: visit nodes in a random
/// order, taking each node none of whose neighbours is taken. Keeps the
/// heaviest set over `shots` draws.
pub fn random_mis<T: Scalar>(
    gs: &Graph,
    weights: &BTreeMap<NodeId, T>,
    shots: usize,
    seed: u64,
) -> Result<SolveResult<T>> {
    require(shots >= 1, "random MIS needs at least one shot")?;
    let clock = Instant::now();
    let nodes: Vec<NodeId> = gs.nodes().collect();
    let weight = |v: &NodeId| weights.get(v).copied().unwrap_or_else(T::zero);
    let mut best: Option<(T, BTreeSet<NodeId>)> = None;
    for shot in 0..shots {
        let mut rng = derive_rng(seed, &[shot as u64]);
        let mut order = nodes.clone();
        order.shuffle(&mut rng);
        let mut taken = BTreeSet::new();
        for v in order {
            if gs.neighbors(v).all(|u| !taken.contains(&u)) {
                taken.insert(v);
            }
        }
        let w: T = taken.iter().map(weight).sum();
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, taken));
        }
    }
    let (_, set) = best.unwrap();
    let assignment = Assignment::bits(nodes.iter().map(|&v| (v, i8::from(set.contains(&v)))));
    let energy = mis_qubo(gs, weights).energy(&assignment)?;
    Ok(SolveResult {
        solver: "random-mis".into(),
        assignment,
        energy,
        samples: None,
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        diagnostics: Diagnostics::default(),
    })
}
