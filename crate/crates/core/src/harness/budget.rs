use serde::{Deserialize, Serialize};

use crate::solvers::SWEEPS_PER_MICROSECOND;

/// Fixed-budget accounting of one annealer access: programming once, then
/// per shot the anneal plus readout and inter-shot delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBudgetModel {
    pub programming_ms: f64,
    pub per_shot_overhead_us: f64,
    pub anneal_time_us: f64,
    pub total_budget_ms: f64,
}

impl Default for TimeBudgetModel {
    fn default() -> Self {
        TimeBudgetModel {
            programming_ms: 20.0,
            per_shot_overhead_us: 195.0,
            anneal_time_us: 1.0,
            total_budget_ms: 1000.0,
        }
    }
}

impl TimeBudgetModel {
    pub fn with_anneal_us(&self, anneal_time_us: f64) -> Self {
        TimeBudgetModel { anneal_time_us, ..self.clone() }
    }
}

/// `floor((total - programming) / (anneal + overhead))`, never negative.
pub fn shots_for_budget(tb: &TimeBudgetModel) -> usize {
    let per_shot_us = tb.anneal_time_us + tb.per_shot_overhead_us;
    assert!(per_shot_us > 0.0, "per-shot time must be positive");
    let available_us = (tb.total_budget_ms - tb.programming_ms) * 1e3;
    if available_us <= 0.0 {
        return 0;
    }
    (available_us / per_shot_us).floor() as usize
}

pub fn sweeps_to_anneal_us(sweeps: usize) -> f64 {
    sweeps as f64 / SWEEPS_PER_MICROSECOND
}

pub fn anneal_us_to_sweeps(us: f64) -> usize {
    ((us * SWEEPS_PER_MICROSECOND).round() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_examples() {
        let tb = TimeBudgetModel::default();
        assert_eq!(shots_for_budget(&tb), 5000);
        let long = shots_for_budget(&tb.with_anneal_us(1000.0));
        assert!((long as f64 - 820.0).abs() <= 0.02 * 820.0);
        let none = TimeBudgetModel { total_budget_ms: 20.0, ..tb };
        assert_eq!(shots_for_budget(&none), 0);
    }

    #[test]
    fn sweep_mapping() {
        assert_eq!(anneal_us_to_sweeps(1.0), 16);
        assert_eq!(anneal_us_to_sweeps(1000.0), 16000);
        assert_eq!(sweeps_to_anneal_us(160), 10.0);
    }
}
