use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::budget::{anneal_us_to_sweeps, shots_for_budget, sweeps_to_anneal_us, TimeBudgetModel};
use super::stats::summarize;
use crate::embedding::{
    clique_embed_chimera, generate_family, import_embedding, Embedding, InstanceFamily, SourceGraph,
};
use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::ratio::{format_rational, parse_rational, to_f64, Rational};
use crate::rng::{derive_rng, derive_seed};
use crate::solvers::{
    anneal_solve, exact_solver, mis_repair, qpu_emulate, random_mis, tabu_search, QpuConfig, SolveBudget,
    SolveResult, EXACT_MAX_VARS,
};
use crate::topology::{apply_yield, build_chimera, build_pegasus, import_target, DeadQubits, TargetFormat, TargetGraph};

pub const RESULTS_SCHEMA: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    Chimera { m: usize, n: usize, t: usize },
    Pegasus { m: usize },
    Import { path: PathBuf },
}

impl TopologySpec {
    pub fn build(&self) -> Result<TargetGraph> {
        match self {
            TopologySpec::Chimera { m, n, t } => build_chimera(*m, *n, *t),
            TopologySpec::Pegasus { m } => build_pegasus(*m),
            TopologySpec::Import { path } => import_target(path, TargetFormat::from_path(path)),
        }
    }
}

/// Start embedding for instance generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CliqueSpec {
    /// Native clique on a full-yield Chimera C(m, m, t).
    Chimera { m: usize, t: usize },
    /// Embedding JSON whose chains must be paths in the configured target.
    Import { path: PathBuf },
}

/// Densities may be written as numbers or as strings (`"0.1"`, `"1/4"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityValue {
    Text(String),
    Number(f64),
}

impl DensityValue {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            DensityValue::Text(s) => parse_rational(s),
            DensityValue::Number(x) => parse_rational(&x.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Tabu,
    Sa,
    QpuEmu,
    RandomMis,
    Exact,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Tabu => "tabu",
            SolverKind::Sa => "sa",
            SolverKind::QpuEmu => "qpu-emu",
            SolverKind::RandomMis => "random-mis",
            SolverKind::Exact => "exact",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::InvalidParameter(format!("unknown solver '{s}'")))
    }
}

/// One configured solver. The budget's seed is ignored: every run gets a
/// seed derived from the experiment seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: SolverKind,
    #[serde(flatten)]
    pub budget: SolveBudget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tenure: Option<usize>,
    #[serde(default)]
    pub qpu: QpuConfig,
}

impl SolverSpec {
    pub fn new(kind: SolverKind, budget: SolveBudget) -> Self {
        SolverSpec { id: None, kind, budget, tenure: None, qpu: QpuConfig::default() }
    }

    pub fn name(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.kind.as_str().to_string())
    }

    fn applies_to(&self, inst: &ProblemInstance<f64>) -> Result<()> {
        match self.kind {
            SolverKind::RandomMis if inst.kind != ProblemKind::WeightedMis => {
                Err(Error::InvalidParameter("random-mis applies only to wmis".into()))
            }
            SolverKind::Exact if inst.model.num_variables() > EXACT_MAX_VARS => Err(Error::TooManyVariables {
                vars: inst.model.num_variables(),
                max: EXACT_MAX_VARS,
            }),
            _ => Ok(()),
        }
    }

    /// Run on one instance with every work limit multiplied by `scale`.
    /// MIS answers are repaired to feasibility whatever the solver.
    pub fn run(
        &self,
        inst: &ProblemInstance<f64>,
        placement: Option<(&Embedding, &TargetGraph)>,
        seed: u64,
        scale: u64,
    ) -> Result<SolveResult<f64>> {
        self.applies_to(inst)?;
        let b = &self.budget;
        let budget = SolveBudget {
            wall_time_ms: b.wall_time_ms.map(|t| t * scale),
            iter_cap: b.iter_cap.map(|c| c * scale),
            shots: b.shots * scale as usize,
            sweeps: b.sweeps,
            seed,
        };
        let mut r = match self.kind {
            SolverKind::Tabu => tabu_search(&inst.model, &budget, self.tenure)?,
            SolverKind::Sa => anneal_solve(inst, &budget)?,
            SolverKind::QpuEmu => {
                let (emb, gt) = placement
                    .ok_or_else(|| Error::InvalidParameter("qpu-emu needs an embedding and a target".into()))?;
                qpu_emulate(inst, emb, gt, &budget, &self.qpu)?
            }
            SolverKind::RandomMis => random_mis(&inst.graph, &inst.mis_weights().unwrap(), budget.shots, seed)?,
            SolverKind::Exact => exact_solver(&inst.model, EXACT_MAX_VARS)?,
        };
        if let (Some(w), SolverKind::Tabu | SolverKind::Exact) = (inst.mis_weights(), self.kind) {
            let mut rng = derive_rng(seed, &[u64::MAX - 1]);
            let fixed = mis_repair(&inst.graph, &w, &r.assignment, &mut rng);
            r.diagnostics.repairs = Some(fixed.removals);
            r.energy = inst.model.evaluate(&fixed.assignment)?;
            r.assignment = fixed.assignment;
        }
        r.solver = self.name();
        Ok(r)
    }
}

/// How the per-instance reference value (the denominator of the
/// approximation ratio) is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ReferencePolicy {
    /// Exact when the instance is small enough, else best-of-solvers.
    Auto {
        #[serde(default = "default_multiplier")]
        multiplier: u64,
    },
    Exact,
    /// Best metric over the configured solvers rerun with `multiplier`
    /// times their budget, and over the benchmark runs themselves.
    BestOfSolvers {
        #[serde(default = "default_multiplier")]
        multiplier: u64,
    },
    /// CSV rows `instance_id,reference`; a header line is allowed.
    Import { path: PathBuf },
}

fn default_multiplier() -> u64 {
    60
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        ReferencePolicy::Auto { multiplier: default_multiplier() }
    }
}

pub fn parse_reference_csv(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, value) = line.split_once(',').ok_or_else(|| Error::Parse {
            path: PathBuf::from("reference"),
            line: i + 1,
            msg: "expected 'instance_id,reference'".into(),
        })?;
        match value.trim().parse::<f64>() {
            Ok(v) => {
                out.insert(id.trim().to_string(), v);
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: PathBuf::from("reference"),
                    line: i + 1,
                    msg: format!("bad reference value '{}'", value.trim()),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    #[serde(default, rename = "yield", skip_serializing_if = "Option::is_none")]
    pub yield_: Option<DeadQubits>,
    pub clique: CliqueSpec,
    pub densities: Vec<DensityValue>,
    pub instances_per_density: usize,
    pub problems: Vec<ProblemKind>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub reference: ReferencePolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Fill the `elapsed_ms` column. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub time_model: TimeBudgetModel,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON form, ignoring output location and
    /// thread count since neither affects results.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { output_dir: None, jobs: None, ..self.clone() };
        sha256_hex(serde_json::to_string(&canonical).expect("config serialises").as_bytes())
    }

    pub fn densities(&self) -> Result<Vec<Rational>> {
        self.densities.iter().map(DensityValue::to_rational).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.densities.is_empty() {
            return bad("no densities configured");
        }
        if self.instances_per_density == 0 {
            return bad("instances_per_density must be positive");
        }
        if self.problems.is_empty() {
            return bad("no problems configured");
        }
        if self.solvers.is_empty() {
            return bad("no solvers configured");
        }
        let mut names: Vec<String> = self.solvers.iter().map(SolverSpec::name).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("solver ids must be unique");
        }
        self.densities().map(|_| ())
    }
}

/// One instance ready to solve: the problem, its embedding, and its family
/// bucket.
#[derive(Clone, Debug)]
pub struct BenchCase {
    pub instance: ProblemInstance<f64>,
    pub embedding: Embedding,
    pub target_density: Rational,
    pub member: usize,
    pub problem: usize,
}

impl BenchCase {
    pub fn density(&self) -> f64 {
        to_f64(self.target_density)
    }
}

pub struct Prepared {
    pub target: TargetGraph,
    pub family: InstanceFamily,
    pub cases: Vec<BenchCase>,
    pub config_hash: String,
}

pub fn start_embedding(cfg: &ExperimentConfig, gt: &TargetGraph) -> Result<(SourceGraph, Embedding)> {
    match &cfg.clique {
        CliqueSpec::Chimera { m, t } => {
            let (gs, emb, _) = clique_embed_chimera(*m, *t)?;
            if !emb.is_path_form(gt) {
                return Err(Error::InvalidEmbedding(format!(
                    "Chimera clique C({m},{m},{t}) is not available in the configured target"
                )));
            }
            Ok((gs, emb))
        }
        CliqueSpec::Import { path } => import_embedding(path, gt),
    }
}

/// Build the target, generate the instance family and the problem instances.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let mut target = cfg.topology.build()?;
    if let Some(dead) = &cfg.yield_ {
        target = apply_yield(&target, dead, derive_seed(cfg.seed, &[0]))?;
    }
    let (gs, emb) = start_embedding(cfg, &target)?;
    let family = generate_family((&gs, &emb), &target, &cfg.densities()?, cfg.instances_per_density, cfg.seed)?;
    let mut cases = Vec::with_capacity(family.members.len() * cfg.problems.len());
    for (mi, m) in family.members.iter().enumerate() {
        for (pi, &kind) in cfg.problems.iter().enumerate() {
            let seed = derive_seed(cfg.seed, &[1, mi as u64, pi as u64]);
            let mut instance = ProblemInstance::generate(format!("{}-{}", m.id, kind.as_str()), kind, m.source.clone(), seed);
            instance.embedding = Some(format!("embeddings/{}.json", m.id));
            cases.push(BenchCase {
                instance,
                embedding: m.embedding.clone(),
                target_density: m.target_density,
                member: mi,
                problem: pi,
            });
        }
    }
    Ok(Prepared { target, family, cases, config_hash: cfg.hash() })
}

/// One solver run on one instance; a row of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub problem: ProblemKind,
    pub density: f64,
    pub n_logical: usize,
    pub n_physical: usize,
    pub solver: String,
    pub seed: u64,
    pub best_energy: f64,
    pub metric: f64,
    pub reference: Option<f64>,
    pub ratio: Option<f64>,
    pub elapsed_ms: Option<f64>,
    pub chain_break_fraction: Option<f64>,
    pub repairs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub instance_id: String,
    pub solver: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub config_hash: String,
    pub records: Vec<RunRecord>,
    pub errors: Vec<ErrorRecord>,
}

/// Reference value for one case. `known` holds metrics already achieved on
/// it, which best-of-solvers includes so that no ratio exceeds one.
pub fn reference_solution(
    case: &BenchCase,
    policy: &ReferencePolicy,
    solvers: &[SolverSpec],
    gt: &TargetGraph,
    seed: u64,
    imported: Option<&BTreeMap<String, f64>>,
    known: &[f64],
) -> Result<f64> {
    let inst = &case.instance;
    match policy {
        ReferencePolicy::Auto { multiplier } => {
            let p = if inst.model.num_variables() <= EXACT_MAX_VARS {
                ReferencePolicy::Exact
            } else {
                ReferencePolicy::BestOfSolvers { multiplier: *multiplier }
            };
            reference_solution(case, &p, solvers, gt, seed, imported, known)
        }
        ReferencePolicy::Exact => {
            let r = exact_solver(&inst.model, EXACT_MAX_VARS)?;
            inst.metric(&r.assignment)
        }
        ReferencePolicy::BestOfSolvers { multiplier } => {
            let mut best = known.iter().copied().fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
            for (si, spec) in solvers.iter().enumerate() {
                if spec.applies_to(inst).is_err() {
                    continue;
                }
                let s = derive_seed(seed, &[3, case.member as u64, case.problem as u64, si as u64]);
                let r = spec.run(inst, Some((&case.embedding, gt)), s, *multiplier)?;
                let m = inst.metric(&r.assignment)?;
                best = Some(best.map_or(m, |b| b.max(m)));
            }
            best.ok_or_else(|| Error::MissingReference(inst.id.clone()))
        }
        ReferencePolicy::Import { .. } => imported
            .and_then(|t| t.get(&inst.id).copied())
            .ok_or_else(|| Error::MissingReference(inst.id.clone())),
    }
}

fn load_reference_table(policy: &ReferencePolicy) -> Result<Option<BTreeMap<String, f64>>> {
    match policy {
        ReferencePolicy::Import { path } => Ok(Some(parse_reference_csv(&std::fs::read_to_string(path)?)?)),
        _ => Ok(None),
    }
}

/// Ratio of achieved to reference metric; undefined for a zero reference.
pub fn approximation_ratio(metric: f64, reference: f64) -> Option<f64> {
    (reference > 0.0).then(|| metric / reference)
}

fn run_case(
    cfg: &ExperimentConfig,
    gt: &TargetGraph,
    case: &BenchCase,
    table: Option<&BTreeMap<String, f64>>,
) -> (Vec<RunRecord>, Vec<ErrorRecord>) {
    let inst = &case.instance;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (si, spec) in cfg.solvers.iter().enumerate() {
        let seed = derive_seed(cfg.seed, &[2, case.member as u64, case.problem as u64, si as u64]);
        let outcome = spec
            .run(inst, Some((&case.embedding, gt)), seed, 1)
            .and_then(|r| inst.metric(&r.assignment).map(|m| (r, m)));
        match outcome {
            Ok((r, metric)) => records.push(RunRecord {
                instance_id: inst.id.clone(),
                problem: inst.kind,
                density: case.density(),
                n_logical: inst.graph.node_count(),
                n_physical: case.embedding.qubit_count(),
                solver: spec.name(),
                seed,
                best_energy: r.energy,
                metric,
                reference: None,
                ratio: None,
                elapsed_ms: cfg.record_timing.then_some(r.elapsed_ms),
                chain_break_fraction: r.diagnostics.chain_break_fraction,
                repairs: r.diagnostics.repairs,
            }),
            Err(e) => errors.push(ErrorRecord { instance_id: inst.id.clone(), solver: spec.name(), message: e.to_string() }),
        }
    }
    let known: Vec<f64> = records.iter().map(|r| r.metric).collect();
    match reference_solution(case, &cfg.reference, &cfg.solvers, gt, cfg.seed, table, &known) {
        Ok(reference) => {
            for r in &mut records {
                r.reference = Some(reference);
                r.ratio = approximation_ratio(r.metric, reference);
            }
        }
        Err(e) => errors.push(ErrorRecord { instance_id: inst.id.clone(), solver: "reference".into(), message: e.to_string() }),
    }
    (records, errors)
}

/// Run every configured solver on every instance. Failures are captured per
/// run; records come back sorted by (instance id, solver id) whatever the
/// thread count.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchOutcome> {
    let prepared = prepare(cfg)?;
    run_prepared(cfg, &prepared)
}

pub fn run_prepared(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<BenchOutcome> {
    let table = load_reference_table(&cfg.reference)?;
    let parts: Vec<_> = prepared
        .cases
        .par_iter()
        .map(|case| run_case(cfg, &prepared.target, case, table.as_ref()))
        .collect();
    let (mut records, mut errors) = (Vec::new(), Vec::new());
    for (r, e) in parts {
        records.extend(r);
        errors.extend(e);
    }
    records.sort_by(|a, b| (&a.instance_id, &a.solver).cmp(&(&b.instance_id, &b.solver)));
    errors.sort_by(|a, b| (&a.instance_id, &a.solver).cmp(&(&b.instance_id, &b.solver)));
    Ok(BenchOutcome { config_hash: prepared.config_hash.clone(), records, errors })
}

/// Annealing-time scan at a fixed access-time budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub sweeps: Vec<usize>,
    #[serde(default)]
    pub time_model: TimeBudgetModel,
    /// Upper bound on shots per point, to keep desk runs short.
    #[serde(default)]
    pub max_shots: Option<usize>,
    #[serde(default)]
    pub qpu: QpuConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub problem: ProblemKind,
    pub density: String,
    pub sweeps: usize,
    pub anneal_us: f64,
    pub shots: usize,
    pub n: usize,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
}

/// For each sweep count, convert to an anneal time, derive the shot count
/// the budget allows, and run the annealer emulation on every case. Rows are
/// grouped by (problem, target density, sweeps).
pub fn sweep_scan(
    cases: &[BenchCase],
    references: &[f64],
    gt: &TargetGraph,
    scan: &ScanConfig,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    if cases.is_empty() {
        return Err(Error::Empty("sweep scan instances".into()));
    }
    if scan.sweeps.is_empty() || scan.sweeps.contains(&0) {
        return Err(Error::InvalidParameter("sweep list must be non-empty and positive".into()));
    }
    assert_eq!(cases.len(), references.len());
    let mut rows = Vec::new();
    for (k, &sweeps) in scan.sweeps.iter().enumerate() {
        let anneal_us = sweeps_to_anneal_us(sweeps);
        let mut shots = shots_for_budget(&scan.time_model.with_anneal_us(anneal_us));
        if let Some(cap) = scan.max_shots {
            shots = shots.min(cap);
        }
        if shots == 0 {
            return Err(Error::InvalidParameter(format!("budget leaves no shots at {sweeps} sweeps")));
        }
        let ratios: Vec<Result<Option<f64>>> = cases
            .par_iter()
            .zip(references)
            .enumerate()
            .map(|(ci, (case, &reference))| {
                let budget = SolveBudget::sampling(shots, sweeps, derive_seed(seed, &[4, k as u64, ci as u64]));
                let r = qpu_emulate(&case.instance, &case.embedding, gt, &budget, &scan.qpu)?;
                Ok(approximation_ratio(case.instance.metric(&r.assignment)?, reference))
            })
            .collect();
        let mut groups: BTreeMap<(usize, std::cmp::Reverse<Rational>), Vec<f64>> = BTreeMap::new();
        let mut sizes: BTreeMap<(usize, std::cmp::Reverse<Rational>), usize> = BTreeMap::new();
        for (case, ratio) in cases.iter().zip(ratios) {
            let key = (case.problem, std::cmp::Reverse(case.target_density));
            *sizes.entry(key).or_default() += 1;
            let g = groups.entry(key).or_default();
            if let Some(x) = ratio? {
                g.push(x);
            }
        }
        for (key, values) in groups {
            let stats = summarize(&values).ok();
            let case = cases.iter().find(|c| c.problem == key.0).unwrap();
            rows.push(ScanRow {
                problem: case.instance.kind,
                density: format_rational(key.1 .0),
                sweeps,
                anneal_us,
                shots,
                n: sizes[&key],
                mean_ratio: stats.as_ref().map(|s| s.mean),
                std_ratio: stats.map(|s| s.std),
            });
        }
    }
    Ok(rows)
}

pub fn sweeps_for_anneal_times(us: &[f64]) -> Vec<usize> {
    us.iter().map(|&t| anneal_us_to_sweeps(t)).collect()
}
