//! Metropolis simulated annealing, used as the annealer stand-in.

use rand::Rng as _;
use rayon::prelude::*;

use super::{require, SpinSystem};
use crate::error::Result;
use crate::physmap::{SampleMeta, SampleSet, SampleSpace};
use crate::problems::{IsingModel, Vartype};
use crate::rng::derive_rng;
use crate::scalar::Scalar;

/// Sweeps standing in for one microsecond of anneal time.
pub const SWEEPS_PER_MICROSECOND: f64 = 16.0;

/// Inverse-temperature range from coefficient magnitudes.
///
/// Hot end: `ln 2 / max_i (|h_i| + sum_j |J_ij|)`, so the largest possible
/// flip is still accepted with probability about 1/2. Cold end:
/// `ln(100 sweeps) / min nonzero |coefficient|`, so the smallest excitation
/// is rarely accepted by the last sweep.
pub fn beta_range<T: Scalar>(m: &IsingModel<T>, sweeps: usize) -> (f64, f64) {
    let sys = SpinSystem::new(m);
    beta_range_of(&sys, sweeps)
}

fn beta_range_of<T: Scalar>(sys: &SpinSystem<T>, sweeps: usize) -> (f64, f64) {
    let mut max_field = 0.0f64;
    let mut min_coef = f64::INFINITY;
    for i in 0..sys.len() {
        let h = sys.h[i].as_f64().abs();
        let mut total = h;
        if h > 0.0 {
            min_coef = min_coef.min(h);
        }
        for (_, w) in sys.neighbors(i) {
            let w = w.as_f64().abs();
            total += w;
            if w > 0.0 {
                min_coef = min_coef.min(w);
            }
        }
        max_field = max_field.max(total);
    }
    if max_field == 0.0 {
        return (1.0, 1.0);
    }
    let hot = std::f64::consts::LN_2 / max_field;
    let cold = (100.0 * sweeps as f64).ln() / min_coef;
    (hot.min(cold), cold)
}

/// `sweeps` inverse temperatures interpolated geometrically from `hot` to
/// `cold`; a single sweep runs at `cold`.
pub fn geometric_schedule(hot: f64, cold: f64, sweeps: usize) -> Vec<f64> {
    if sweeps <= 1 {
        return vec![cold; sweeps];
    }
    let ratio = (cold / hot).ln() / (sweeps - 1) as f64;
    (0..sweeps).map(|k| hot * (ratio * k as f64).exp()).collect()
}

/// Run `shots` independent anneals of `sweeps` Metropolis sweeps each.
///
/// Shot `k` starts from a uniformly random state drawn from the stream
/// `(seed, k)`, so results do not depend on how shots are scheduled across
/// threads. Returns every shot's final state, aggregated.
pub fn simulated_annealing<T: Scalar>(m: &IsingModel<T>, shots: usize, sweeps: usize, seed: u64) -> Result<SampleSet<T>> {
    require(shots >= 1, "simulated annealing needs at least one shot")?;
    require(sweeps >= 1, "simulated annealing needs at least one sweep")?;
    let sys = SpinSystem::new(m);
    let (hot, cold) = beta_range_of(&sys, sweeps);
    let betas: Vec<T> = geometric_schedule(hot, cold, sweeps)
        .into_iter()
        .map(T::from_f64_lossy)
        .collect();

    let finals: Vec<Vec<i8>> = (0..shots)
        .into_par_iter()
        .map(|shot| anneal_once(&sys, &betas, seed, shot as u64))
        .collect();
    let raw = finals.into_iter().map(|s| {
        let e = sys.energy(&s);
        (sys.vars.iter().copied().zip(s).collect(), e)
    });
    Ok(SampleSet::from_raw(
        SampleSpace::Logical,
        Vartype::Spin,
        raw,
        SampleMeta { shots, sweeps, seed, tie_breaks: 0 },
    ))
}

fn anneal_once<T: Scalar>(sys: &SpinSystem<T>, betas: &[T], seed: u64, shot: u64) -> Vec<i8> {
    let mut rng = derive_rng(seed, &[shot]);
    let n = sys.len();
    let mut s: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let mut fields = sys.fields(&s);
    // exp(-40) is below the resolution of a uniform double draw.
    let cutoff = T::from_f64_lossy(40.0);
    for &beta in betas {
        for i in 0..n {
            let delta = -T::two() * T::from_i8(s[i]).unwrap() * fields[i];
            let accept = if delta <= T::zero() {
                true
            } else {
                let x = beta * delta;
                x < cutoff && T::from_f64_lossy(rng.gen::<f64>()) < (-x).exp()
            };
            if accept {
                sys.flip(&mut s, &mut fields, i);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ferromagnet() -> IsingModel<f64> {
        let mut m = IsingModel::new();
        m.add_quadratic(0, 1, -1.0);
        m
    }

    #[test]
    fn schedule_endpoints() {
        let s = geometric_schedule(0.1, 10.0, 5);
        assert!((s[0] - 0.1).abs() < 1e-12 && (s[4] - 10.0).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_schedule(0.1, 2.0, 1), vec![2.0]);
        let (hot, cold) = beta_range(&ferromagnet(), 50);
        assert!((hot - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((cold - 5000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ferromagnet_ground_states() {
        // P(ground) per shot is far above 0.95; >= 95/100 fails with
        // negligible binomial probability.
        let ss = simulated_annealing(&ferromagnet(), 100, 50, 7).unwrap();
        let ground: usize = ss
            .samples
            .iter()
            .filter(|s| s.assignment[&0] == s.assignment[&1])
            .map(|s| s.occurrences)
            .sum();
        assert_eq!(ss.total_occurrences(), 100);
        assert!(ground >= 95, "{ground}");
    }

    #[test]
    fn bad_budgets() {
        assert!(simulated_annealing(&ferromagnet(), 10, 0, 0).is_err());
        assert!(simulated_annealing(&ferromagnet(), 0, 10, 0).is_err());
    }

    #[test]
    fn single_spin_field() {
        let mut m = IsingModel::<f64>::new();
        m.add_linear(0, -2.0);
        let ss = simulated_annealing(&m, 20, 10, 1).unwrap();
        assert_eq!(ss.best().unwrap().assignment[&0], 1);
        assert_eq!(ss.best().unwrap().energy, -2.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = crate::graph::Graph::complete(8);
        let m = crate::problems::gen_maxcut::<f64>(&g, true, 2);
        assert_eq!(simulated_annealing(&m, 30, 20, 5).unwrap(), simulated_annealing(&m, 30, 20, 5).unwrap());
    }

    #[test]
    fn works_in_single_precision() {
        let mut m = IsingModel::<f32>::new();
        m.add_quadratic(0, 1, -1.0);
        m.add_linear(0, 0.25);
        let ss = simulated_annealing(&m, 20, 20, 0).unwrap();
        assert_eq!(ss.best().unwrap().energy, -1.25);
    }
}
