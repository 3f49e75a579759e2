//! Benchmark orchestration: fixed-budget shot accounting, experiment runs,
//! reference values, reports and LP export.

pub mod bench;
pub mod budget;
pub mod lp;
pub mod report;
pub mod stats;

pub use bench::{
    approximation_ratio, parse_reference_csv, prepare, reference_solution, run_benchmark, run_prepared,
    sha256_hex, sweep_scan, BenchCase, BenchOutcome, CliqueSpec, DensityValue, ErrorRecord, ExperimentConfig, Prepared,
    ReferencePolicy, RunRecord, ScanConfig, ScanRow, SolverKind, SolverSpec, TopologySpec, RESULTS_SCHEMA,
};
pub use budget::{anneal_us_to_sweeps, shots_for_budget, sweeps_to_anneal_us, TimeBudgetModel};
pub use lp::{export_lp, lp_string};
pub use report::{boxplot_svg, emit_report, results_csv, summarize_outcome, write_scan, GroupSummary, Summary};
pub use stats::{summarize, SummaryStats};
