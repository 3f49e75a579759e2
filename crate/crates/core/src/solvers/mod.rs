//! Classical optimisers and the annealer stand-in.

mod anneal;
mod exact;
mod mis;
mod qpu;
mod tabu;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::physmap::SampleSet;
use crate::problems::{Assignment, IsingModel, Model};
use crate::scalar::Scalar;

pub use anneal::{beta_range, geometric_schedule, simulated_annealing, SWEEPS_PER_MICROSECOND};
pub use exact::{exact_solver, EXACT_MAX_VARS};
pub use mis::{mis_repair, random_mis, Repair};
pub use qpu::{anneal_solve, qpu_emulate, ChainStrength, QpuConfig};
pub use tabu::{default_tenure, tabu_search};

/// Work allowed to one solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveBudget {
    #[serde(default)]
    pub wall_time_ms: Option<u64>,
    /// Iteration cap for tabu search; makes time-limited runs replayable.
    #[serde(default)]
    pub iter_cap: Option<u64>,
    #[serde(default = "one")]
    pub shots: usize,
    #[serde(default = "one")]
    pub sweeps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { wall_time_ms: None, iter_cap: None, shots: 1, sweeps: 1, seed: 0 }
    }
}

impl SolveBudget {
    pub fn iterations(cap: u64, seed: u64) -> Self {
        SolveBudget { iter_cap: Some(cap), seed, ..Default::default() }
    }

    pub fn sampling(shots: usize, sweeps: usize, seed: u64) -> Self {
        SolveBudget { shots, sweeps, seed, ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_break_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_strength: Option<f64>,
    /// Nodes removed by MIS repair, summed over samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repairs: Option<usize>,
    /// Coin flips used by majority vote and repair ties.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_breaks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult<T> {
    pub solver: String,
    pub assignment: Assignment,
    pub energy: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSet<T>>,
    pub elapsed_ms: f64,
    pub diagnostics: Diagnostics,
}

/// Dense spin form of an Ising model with CSR adjacency.
#[derive(Clone, Debug)]
pub(crate) struct SpinSystem<T> {
    pub vars: Vec<NodeId>,
    pub h: Vec<T>,
    pub start: Vec<usize>,
    pub nbr: Vec<usize>,
    pub w: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> SpinSystem<T> {
    pub fn new(m: &IsingModel<T>) -> Self {
        let vars: Vec<NodeId> = m.variables().collect();
        let index: BTreeMap<NodeId, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut lists: Vec<Vec<(usize, T)>> = vec![Vec::new(); vars.len()];
        for (&(u, v), &j) in m.j() {
            let (a, b) = (index[&u], index[&v]);
            lists[a].push((b, j));
            lists[b].push((a, j));
        }
        let mut start = Vec::with_capacity(vars.len() + 1);
        let (mut nbr, mut w) = (Vec::new(), Vec::new());
        start.push(0);
        for l in lists {
            for (b, j) in l {
                nbr.push(b);
                w.push(j);
            }
            start.push(nbr.len());
        }
        SpinSystem { h: vars.iter().map(|v| m.h()[v]).collect(), vars, start, nbr, w, offset: m.offset() }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.start[i]..self.start[i + 1];
        self.nbr[r.clone()].iter().copied().zip(self.w[r].iter().copied())
    }

    pub fn fields(&self, s: &[i8]) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                self.neighbors(i)
                    .fold(self.h[i], |f, (j, w)| f + w * T::from_i8(s[j]).unwrap())
            })
            .collect()
    }

    pub fn energy(&self, s: &[i8]) -> T {
        let mut e = self.offset;
        for i in 0..self.len() {
            let si = T::from_i8(s[i]).unwrap();
            e = e + self.h[i] * si;
            for (j, w) in self.neighbors(i).filter(|&(j, _)| j > i) {
                e = e + w * si * T::from_i8(s[j]).unwrap();
            }
        }
        e
    }

    /// Flip spin `i` and update the local fields of its neighbours.
    #[inline]
    pub fn flip(&self, s: &mut [i8], fields: &mut [T], i: usize) {
        s[i] = -s[i];
        let two_si = T::from_i8(2 * s[i]).unwrap();
        for (j, w) in self.neighbors(i) {
            fields[j] = fields[j] + w * two_si;
        }
    }

    pub fn assignment(&self, s: &[i8]) -> Assignment {
        Assignment::spins(self.vars.iter().copied().zip(s.iter().copied()))
    }
}

/// Re-evaluate a spin result on the caller's model (Ising or QUBO form).
pub(crate) fn finish<T: Scalar>(model: &Model<T>, spins: &Assignment) -> Result<(Assignment, T)> {
    let a = model.from_spins(spins);
    let e = model.evaluate(&a)?;
    Ok((a, e))
}

pub(crate) fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_system_energy_matches_model() {
        let mut m = IsingModel::<f64>::new();
        m.add_linear(3, 0.5);
        m.add_quadratic(3, 9, -1.0);
        m.add_quadratic(9, 4, 0.25);
        m.add_offset(1.0);
        let sys = SpinSystem::new(&m);
        let s = vec![1, -1, 1];
        let a = sys.assignment(&s);
        assert_eq!(sys.energy(&s), m.energy(&a).unwrap());
        let mut s2 = s.clone();
        let mut f = sys.fields(&s2);
        sys.flip(&mut s2, &mut f, 1);
        assert_eq!(f, sys.fields(&s2));
    }
}
