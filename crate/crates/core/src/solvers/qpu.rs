//! Embed, anneal, unembed: the annealer pipeline with simulated annealing in
//! place of the quantum processor.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{mis_repair, simulated_annealing, Diagnostics, SolveBudget, SolveResult};
use crate::embedding::Embedding;
use crate::error::Result;
use crate::physmap::{
    chain_break_fraction, embed_problem, torque_compensation_strength, unembed_majority_with, SampleMeta,
    SampleSet, SampleSpace, TORQUE_PREFACTOR,
};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::rng::derive_rng;
use crate::scalar::Scalar;
use crate::topology::TargetGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ChainStrength {
    Fixed { value: f64 },
    UniformTorque { prefactor: f64 },
}

impl Default for ChainStrength {
    fn default() -> Self {
        ChainStrength::UniformTorque { prefactor: TORQUE_PREFACTOR }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QpuConfig {
    #[serde(default)]
    pub strength: ChainStrength,
    /// Divide the physical model by its largest coefficient before sampling.
    #[serde(default)]
    pub rescale: bool,
}

/// Spread the instance over `emb`, sample the physical model with
/// `budget.shots` anneals of `budget.sweeps` sweeps, majority-vote each shot
/// back to logical variables (repairing MIS samples), and keep the best.
pub fn qpu_emulate<T: Scalar>(
    inst: &ProblemInstance<T>,
    emb: &Embedding,
    gt: &TargetGraph,
    budget: &SolveBudget,
    cfg: &QpuConfig,
) -> Result<SolveResult<T>> {
    let clock = Instant::now();
    let ising = inst.model.to_ising();
    let strength = match cfg.strength {
        ChainStrength::Fixed { value } => T::from_f64_lossy(value),
        ChainStrength::UniformTorque { prefactor } => torque_compensation_strength(&ising, T::from_f64_lossy(prefactor))?,
    };
    let mut phys = embed_problem(&ising, emb, gt, strength)?;
    if cfg.rescale {
        phys = phys.rescaled().0;
    }
    let mut physical = simulated_annealing(&phys.ising, budget.shots, budget.sweeps, budget.seed)?;
    physical.space = SampleSpace::Physical;
    let breaks = chain_break_fraction(&physical, emb)?;

    let weights = match inst.kind {
        ProblemKind::WeightedMis => inst.mis_weights(),
        _ => None,
    };
    let mut rng = derive_rng(budget.seed, &[u64::MAX]);
    let (mut ties, mut repairs) = (0, 0);
    let mut raw = Vec::with_capacity(budget.shots);
    for i in 0..physical.samples.len() {
        let sample = physical.assignment(i);
        for _ in 0..physical.samples[i].occurrences {
            let un = unembed_majority_with(&sample, emb, &mut rng)?;
            ties += un.ties;
            let mut a = inst.model.from_spins(&un.assignment);
            if let Some(w) = &weights {
                let r = mis_repair(&inst.graph, w, &a, &mut rng);
                repairs += r.removals;
                ties += r.ties;
                a = r.assignment;
            }
            let e = inst.model.evaluate(&a)?;
            raw.push((a.values, e));
        }
    }
    let logical = SampleSet::from_raw(
        SampleSpace::Logical,
        inst.model.vartype(),
        raw,
        SampleMeta { shots: budget.shots, sweeps: budget.sweeps, seed: budget.seed, tie_breaks: ties },
    );
    let assignment = logical.assignment(0);
    let energy = logical.samples[0].energy;
    Ok(SolveResult {
        solver: "qpu-emu".into(),
        assignment,
        energy,
        samples: Some(logical),
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        diagnostics: Diagnostics {
            chain_break_fraction: Some(breaks),
            chain_strength: Some(strength.as_f64()),
            repairs: weights.as_ref().map(|_| repairs),
            tie_breaks: Some(ties),
            iterations: None,
        },
    })
}

/// Simulated annealing directly on the logical model. MIS samples are
/// repaired before evaluation, as in [`qpu_emulate`].
pub fn anneal_solve<T: Scalar>(inst: &ProblemInstance<T>, budget: &SolveBudget) -> Result<SolveResult<T>> {
    let clock = Instant::now();
    let ss = simulated_annealing(&inst.model.to_ising(), budget.shots, budget.sweeps, budget.seed)?;
    let Some(w) = inst.mis_weights() else {
        let best = ss.best().expect("at least one shot");
        let assignment = inst.model.from_spins(&ss.assignment(0));
        return Ok(SolveResult {
            solver: "sa".into(),
            energy: best.energy,
            assignment,
            samples: Some(ss),
            elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
            diagnostics: Diagnostics::default(),
        });
    };
    let mut rng = derive_rng(budget.seed, &[u64::MAX]);
    let (mut ties, mut repairs) = (0, 0);
    let mut raw = Vec::with_capacity(budget.shots);
    for i in 0..ss.samples.len() {
        let a = inst.model.from_spins(&ss.assignment(i));
        for _ in 0..ss.samples[i].occurrences {
            let r = mis_repair(&inst.graph, &w, &a, &mut rng);
            repairs += r.removals;
            ties += r.ties;
            let e = inst.model.evaluate(&r.assignment)?;
            raw.push((r.assignment.values, e));
        }
    }
    let logical = SampleSet::from_raw(
        SampleSpace::Logical,
        inst.model.vartype(),
        raw,
        SampleMeta { shots: budget.shots, sweeps: budget.sweeps, seed: budget.seed, tie_breaks: ties },
    );
    Ok(SolveResult {
        solver: "sa".into(),
        assignment: logical.assignment(0),
        energy: logical.samples[0].energy,
        samples: Some(logical),
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        diagnostics: Diagnostics { repairs: Some(repairs), tie_breaks: Some(ties), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{clique_embed_chimera, induced_source_graph};
    use crate::graph::Graph;
    use crate::solvers::{exact_solver, EXACT_MAX_VARS};
    use crate::topology::parse_edge_list;
    use std::path::Path;

    #[test]
    fn singleton_chains_match_plain_annealing() {
        let gt = parse_edge_list(Path::new("m"), "0 1\n1 2\n2 3\n3 0\n0 2\n").unwrap();
        let emb = Embedding::new("t", (0..4).map(|v| (v, vec![v])).collect());
        let gs = induced_source_graph(&emb, &gt);
        let inst = ProblemInstance::<f64>::generate("x", ProblemKind::WeightedMaxCut, gs, 4);
        let budget = SolveBudget::sampling(64, 20, 9);
        let r = qpu_emulate(&inst, &emb, &gt, &budget, &QpuConfig::default()).unwrap();
        let plain = simulated_annealing(&inst.model.to_ising(), 64, 20, 9).unwrap();
        assert_eq!(r.energy, plain.best().unwrap().energy);
        assert_eq!(r.diagnostics.chain_break_fraction, Some(0.0));
        let energies = |ss: &SampleSet<f64>| {
            let mut v: Vec<(u64, usize)> = ss.samples.iter().map(|s| (s.energy.to_bits(), s.occurrences)).collect();
            v.sort();
            v
        };
        assert_eq!(energies(r.samples.as_ref().unwrap()), energies(&plain));
    }

    #[test]
    fn k8_clique_maxcut_reaches_optimum() {
        let (_, emb, gt) = clique_embed_chimera(2, 4).unwrap();
        let gs = induced_source_graph(&emb, &gt);
        assert_eq!(gs, Graph::complete(8));
        let inst = ProblemInstance::<f64>::generate("k8", ProblemKind::MaxCut, gs, 0);
        let opt = exact_solver(&inst.model, EXACT_MAX_VARS).unwrap();
        let r = qpu_emulate(&inst, &emb, &gt, &SolveBudget::sampling(500, 160, 1), &QpuConfig::default()).unwrap();
        assert_eq!(r.energy, opt.energy);
        assert_eq!(r.samples.as_ref().unwrap().total_occurrences(), 500);
    }

    #[test]
    fn zero_strength_rejected() {
        let (_, emb, gt) = clique_embed_chimera(1, 4).unwrap();
        let inst = ProblemInstance::<f64>::generate("k4", ProblemKind::MaxCut, induced_source_graph(&emb, &gt), 0);
        let cfg = QpuConfig { strength: ChainStrength::Fixed { value: 0.0 }, rescale: false };
        assert!(qpu_emulate(&inst, &emb, &gt, &SolveBudget::sampling(4, 4, 0), &cfg).is_err());
    }

    #[test]
    fn mis_samples_are_repaired() {
        let (_, emb, gt) = clique_embed_chimera(2, 4).unwrap();
        let gs = induced_source_graph(&emb, &gt);
        let inst = ProblemInstance::<f64>::generate("mis", ProblemKind::WeightedMis, gs.clone(), 2);
        let cfg = QpuConfig { strength: ChainStrength::Fixed { value: 0.3 }, rescale: true };
        let r = qpu_emulate(&inst, &emb, &gt, &SolveBudget::sampling(200, 8, 3), &cfg).unwrap();
        let w = inst.mis_weights().unwrap();
        for i in 0..r.samples.as_ref().unwrap().samples.len() {
            let a = r.samples.as_ref().unwrap().assignment(i);
            assert!(crate::problems::mis_check(&gs, &w, &a).feasible);
        }
        assert!(r.diagnostics.repairs.is_some());
    }

    #[test]
    fn logical_annealing_on_triangle() {
        let inst = ProblemInstance::<f64>::generate("t", ProblemKind::MaxCut, Graph::complete(3), 0);
        let r = anneal_solve(&inst, &SolveBudget::sampling(20, 50, 1)).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(inst.metric(&r.assignment).unwrap(), 2.0);
        let mis = ProblemInstance::<f64>::generate("m", ProblemKind::WeightedMis, Graph::complete(4), 3);
        let r = anneal_solve(&mis, &SolveBudget::sampling(20, 50, 1)).unwrap();
        let w = mis.mis_weights().unwrap();
        assert!(crate::problems::mis_check(&mis.graph, &w, &r.assignment).feasible);
        let best = w.values().cloned().fold(0.0, f64::max);
        assert_eq!(mis.metric(&r.assignment).unwrap(), best);
    }
}
