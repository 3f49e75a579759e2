//! Single-flip tabu search with aspiration.

use std::time::Instant;

use rand::Rng as _;

use super::{finish, require, Diagnostics, SolveBudget, SolveResult, SpinSystem};
use crate::error::Result;
use crate::problems::Model;
use crate::rng::rng_from;
use crate::scalar::Scalar;

/// `ceil(n / 4)`, at least 1.
pub fn default_tenure(n: usize) -> usize {
    n.div_ceil(4).max(1)
}

/// Tabu search from a seeded random start.
///
/// Every iteration flips the best non-tabu spin (ties broken uniformly);
/// a tabu spin is allowed when the flip would beat the best energy seen.
/// A flipped spin stays tabu for `tenure` iterations. Local fields are kept
/// incrementally, so a flip costs O(degree) and move selection O(n).
///
/// Runs until `iter_cap` iterations or `wall_time_ms`, whichever comes
/// first. Only iteration-capped runs are reproducible; the iteration count
/// is reported so a timed run can be replayed.
pub fn tabu_search<T: Scalar>(model: &Model<T>, budget: &SolveBudget, tenure: Option<usize>) -> Result<SolveResult<T>> {
    require(
        budget.iter_cap.is_some() || budget.wall_time_ms.is_some(),
        "tabu search needs an iteration cap or a wall-time limit",
    )?;
    let clock = Instant::now();
    let sys = SpinSystem::new(&model.to_ising());
    let n = sys.len();
    let tenure = tenure.unwrap_or_else(|| default_tenure(n));
    let mut rng = rng_from(budget.seed);

    let mut s: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let mut fields = sys.fields(&s);
    let mut energy = sys.energy(&s);
    let mut best = energy;
    let mut best_s = s.clone();
    let mut tabu_until = vec![0u64; n];
    let eps = T::from_f64_lossy(1e-12);
    let cap = budget.iter_cap.unwrap_or(u64::MAX);
    let deadline = budget.wall_time_ms.map(|ms| ms as f64);

    let mut iter = 0u64;
    while n > 0 && iter < cap {
        if iter.is_multiple_of(64) {
            if let Some(limit) = deadline {
                if clock.elapsed().as_secs_f64() * 1e3 >= limit {
                    break;
                }
            }
        }
        let mut chosen = None;
        let mut chosen_delta = T::infinity();
        let mut ties = 0u32;
        for i in 0..n {
            let delta = -T::two() * T::from_i8(s[i]).unwrap() * fields[i];
            let allowed = tabu_until[i] <= iter || energy + delta < best - eps;
            if !allowed {
                continue;
            }
            if delta < chosen_delta - eps {
                chosen = Some(i);
                chosen_delta = delta;
                ties = 1;
            } else if (delta - chosen_delta).abs() <= eps {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    chosen = Some(i);
                }
            }
        }
        // Only reachable when every spin is tabu (n <= tenure).
        let i = match chosen {
            Some(i) => i,
            None => (0..n).min_by_key(|&i| tabu_until[i]).unwrap(),
        };
        let delta = -T::two() * T::from_i8(s[i]).unwrap() * fields[i];
        sys.flip(&mut s, &mut fields, i);
        energy = energy + delta;
        tabu_until[i] = iter + 1 + tenure as u64;
        if energy < best - eps {
            best = energy;
            best_s.copy_from_slice(&s);
        }
        iter += 1;
    }

    let (assignment, energy) = finish(model, &sys.assignment(&best_s))?;
    Ok(SolveResult {
        solver: "tabu".into(),
        assignment,
        energy,
        samples: None,
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        diagnostics: Diagnostics { iterations: Some(iter), ..Default::default() },
    })
}
