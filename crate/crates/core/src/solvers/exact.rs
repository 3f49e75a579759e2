//! Exhaustive reference solver.

use std::time::Instant;

use super::{finish, Diagnostics, SolveResult, SpinSystem};
use crate::error::{Error, Result};
use crate::problems::Model;
use crate::scalar::Scalar;

pub const EXACT_MAX_VARS: usize = 26;

/// Global optimum by Gray-code enumeration: consecutive states differ in one
/// spin, so each step costs one local-field update. The first state reaching
/// the minimum is returned.
pub fn exact_solver<T: Scalar>(model: &Model<T>, max_vars: usize) -> Result<SolveResult<T>> {
    let n = model.num_variables();
    if n > max_vars.min(63) {
        return Err(Error::TooManyVariables { vars: n, max: max_vars });
    }
    let clock = Instant::now();
    let sys = SpinSystem::new(&model.to_ising());
    let mut s = vec![-1i8; n];
    let mut fields = sys.fields(&s);
    let mut energy = sys.energy(&s);
    let mut best = energy;
    let mut best_s = s.clone();
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        energy = energy - T::two() * T::from_i8(s[i]).unwrap() * fields[i];
        sys.flip(&mut s, &mut fields, i);
        if energy < best {
            best = energy;
            best_s.copy_from_slice(&s);
        }
    }
    let (assignment, energy) = finish(model, &sys.assignment(&best_s))?;
    Ok(SolveResult {
        solver: "exact".into(),
        assignment,
        energy,
        samples: None,
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        diagnostics: Diagnostics { iterations: Some(1u64 << n), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problems::{cut_value, gen_maxcut, mis_qubo, IsingModel};
    use std::collections::BTreeMap;

    #[test]
    fn triangle_maxcut() {
        let g = Graph::complete(3);
        let m = gen_maxcut::<f64>(&g, false, 0);
        let r = exact_solver(&Model::Ising(m.clone()), EXACT_MAX_VARS).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(cut_value(&g, &m, &r.assignment).unwrap(), 2.0);
    }

    #[test]
    fn single_edge_mis() {
        let mut g = Graph::new();
        g.add_edge(0, 1);
        let q = mis_qubo(&g, &BTreeMap::from([(0, 1.0), (1, 1.0)]));
        let r = exact_solver(&Model::Qubo(q), EXACT_MAX_VARS).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(r.assignment.selected().count(), 1);
    }

    #[test]
    fn single_spin() {
        let mut m = IsingModel::<f64>::new();
        m.add_linear(0, 3.0);
        let r = exact_solver(&Model::Ising(m), EXACT_MAX_VARS).unwrap();
        assert_eq!(r.assignment.get(0).unwrap(), -1);
        assert_eq!(r.energy, -3.0);
    }

    #[test]
    fn rejects_large_models() {
        let m = IsingModel::<f64>::with_variables(0..30);
        assert!(matches!(
            exact_solver(&Model::Ising(m), EXACT_MAX_VARS),
            Err(Error::TooManyVariables { vars: 30, max: 26 })
        ));
    }
}
