use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use qabench_core::embedding::{
    clique_embed_chimera, export_embedding, generate_family, import_embedding, read_family, validate,
    write_family, FAMILY_SCHEMA,
};
use qabench_core::harness::{
    emit_report, export_lp, prepare, reference_solution, run_prepared, sha256_hex, sweep_scan, write_scan,
    DensityValue, ExperimentConfig, ReferencePolicy, ScanConfig, SolverKind, SolverSpec, RESULTS_SCHEMA,
};
use qabench_core::problems::{ProblemInstance, ProblemKind, WEIGHT_SCALE};
use qabench_core::ratio::{format_rational, parse_rational};
use qabench_core::rng::derive_seed;
use qabench_core::solvers::{ChainStrength, QpuConfig, SolveBudget};
use qabench_core::topology::{
    apply_yield, build_chimera, build_pegasus, import_target, DeadQubits, TargetFormat, TargetGraph,
};
use qabench_core::Instance;

#[derive(Parser)]
#[command(name = "qabench", about = "Embedded benchmark instances and annealer-emulation solvers")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or import a hardware target graph.
    Topology(TopologyArgs),
    /// Produce a start embedding and its validation report.
    Embed(EmbedArgs),
    /// Generate an instance family by chain splitting.
    Generate(GenerateArgs),
    /// Draw problem instances over every member of a family.
    Instantiate(InstantiateArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run a benchmark experiment from a config file.
    Bench(BenchArgs),
    /// Write an instance as an LP file for external MIP solvers.
    ExportLp(ExportLpArgs),
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["chimera", "pegasus", "import"])))]
struct TopologyArgs {
    /// Chimera C(m, n, t).
    #[arg(long, num_args = 3, value_names = ["M", "N", "T"])]
    chimera: Option<Vec<usize>>,
    /// Pegasus P(m).
    #[arg(long, value_name = "M")]
    pegasus: Option<usize>,
    /// Edge-list (.txt) or JSON target file.
    #[arg(long, value_name = "PATH")]
    import: Option<PathBuf>,
    /// Fraction of qubits to remove at random.
    #[arg(long = "yield", value_name = "F", conflicts_with = "dead")]
    yield_fraction: Option<f64>,
    /// Explicit dead qubit ids, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    dead: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.txt` writes an edge list, anything else JSON. Default: JSON on stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("start").required(true).args(["chimera_clique", "import"])))]
struct EmbedArgs {
    /// Native clique on Chimera C(m, m, t).
    #[arg(long, value_name = "M")]
    chimera_clique: Option<usize>,
    /// Shore size for --chimera-clique.
    #[arg(long, default_value_t = 4, value_name = "T")]
    shore: usize,
    /// Embedding JSON to validate against --target.
    #[arg(long, value_name = "PATH", requires = "target")]
    import: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    target: Option<PathBuf>,
    /// Where to write the embedding JSON.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write the clique's target graph here.
    #[arg(long, value_name = "PATH")]
    target_out: Option<PathBuf>,
    /// Validation report path. Default: stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_name = "PATH")]
    target: PathBuf,
    /// Start embedding; chains must be paths in the target.
    #[arg(long, value_name = "PATH")]
    embedding: PathBuf,
    /// Descending target densities, e.g. 0.9,0.5,0.1.
    #[arg(long, value_delimiter = ',', required = true, value_name = "LIST")]
    densities: Vec<String>,
    /// Instances per density.
    #[arg(long, value_name = "N")]
    count: usize,
    #[arg(long)]
    seed: u64,
    /// Family directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct InstantiateArgs {
    #[arg(long, value_name = "DIR")]
    family: PathBuf,
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemKind,
    #[arg(long)]
    seed: u64,
    /// Output directory. Default: <family>/instances.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    #[arg(long, value_parser = parse_solver)]
    solver: SolverKind,
    /// Family directory holding the embedding and target (qpu-emu).
    #[arg(long, value_name = "DIR")]
    family: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "target", conflicts_with = "family")]
    embedding: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "embedding")]
    target: Option<PathBuf>,
    /// Wall-clock limit for tabu search.
    #[arg(long, value_name = "MS")]
    time_ms: Option<u64>,
    /// Iteration cap for tabu search.
    #[arg(long, value_name = "N")]
    iter_cap: Option<u64>,
    #[arg(long, default_value_t = 100)]
    shots: usize,
    #[arg(long, default_value_t = 160)]
    sweeps: usize,
    #[arg(long)]
    tenure: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed chain strength instead of uniform torque compensation.
    #[arg(long, value_name = "J")]
    chain_strength: Option<f64>,
    #[arg(long, default_value_t = qabench_core::physmap::TORQUE_PREFACTOR)]
    torque_prefactor: f64,
    /// Rescale the physical model into [-1, 1] before sampling.
    #[arg(long)]
    rescale: bool,
    /// Include the full sample set in the output.
    #[arg(long)]
    samples: bool,
    /// Report elapsed wall time (output is then no longer byte-stable).
    #[arg(long)]
    record_timing: bool,
    /// Output path. Default: stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Report directory; overrides the config's output_dir.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    instances: Option<usize>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    densities: Option<Vec<String>>,
    /// Fill the elapsed_ms column (results are then no longer byte-stable).
    #[arg(long)]
    record_timing: bool,
    /// Run an annealing-time scan over these sweep counts instead of the benchmark.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    scan_sweeps: Option<Vec<usize>>,
    /// Cap on shots per scan point.
    #[arg(long, value_name = "N", requires = "scan_sweeps")]
    scan_max_shots: Option<usize>,
}

#[derive(Args, Serialize)]
struct ExportLpArgs {
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// For wmis: linear objective with explicit edge constraints.
    #[arg(long)]
    mis_constraints: bool,
}

fn parse_problem(s: &str) -> std::result::Result<ProblemKind, String> {
    s.parse().map_err(|_| format!("expected one of maxcut, wmaxcut, wmis; got '{s}'"))
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse().map_err(|_| format!("expected one of tabu, sa, qpu-emu, random-mis, exact; got '{s}'"))
}

fn print_resolved<T: Serialize>(name: &str, args: &T) {
    eprintln!("{name}: {}", serde_json::to_string(args).expect("args serialise"));
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn load_target(path: &Path) -> Result<TargetGraph> {
    import_target(path, TargetFormat::from_path(path)).with_context(|| format!("reading target {}", path.display()))
}

fn cmd_topology(a: TopologyArgs) -> Result<()> {
    print_resolved("topology", &a);
    let mut gt = match (&a.chimera, a.pegasus, &a.import) {
        (Some(c), _, _) => build_chimera(c[0], c[1], c[2])?,
        (_, Some(m), _) => build_pegasus(m)?,
        (_, _, Some(p)) => load_target(p)?,
        _ => unreachable!("clap enforces one source"),
    };
    if let Some(f) = a.yield_fraction {
        gt = apply_yield(&gt, &DeadQubits::Fraction(f), a.seed)?;
    } else if !a.dead.is_empty() {
        gt = apply_yield(&gt, &DeadQubits::List(a.dead.clone()), a.seed)?;
    }
    eprintln!(
        "{} nodes, {} edges, c_phys {}, hash {}",
        gt.graph().node_count(),
        gt.graph().edge_count(),
        gt.c_phys(),
        gt.content_hash()
    );
    match &a.out {
        Some(p) => gt.write(p, TargetFormat::from_path(p))?,
        None => println!("{}", gt.to_json()),
    }
    Ok(())
}

fn cmd_embed(a: EmbedArgs) -> Result<()> {
    print_resolved("embed", &a);
    let (gs, emb, gt) = match (a.chimera_clique, &a.import) {
        (Some(m), _) => {
            let (gs, emb, built) = clique_embed_chimera(m, a.shore)?;
            let gt = match &a.target {
                Some(p) => load_target(p)?,
                None => built,
            };
            (gs, emb, gt)
        }
        (_, Some(p)) => {
            let gt = load_target(a.target.as_ref().expect("clap requires --target"))?;
            let (gs, emb) = import_embedding(p, &gt).with_context(|| format!("importing {}", p.display()))?;
            (gs, emb, gt)
        }
        _ => unreachable!("clap enforces one start"),
    };
    let report = validate(&emb, &gs, &gt)?;
    export_embedding(&emb, None, &a.out)?;
    if let Some(p) = &a.target_out {
        gt.write(p, TargetFormat::from_path(p))?;
    }
    write_or_print(a.report.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    if !report.valid {
        bail!("embedding is invalid: {}", report.violations[0]);
    }
    Ok(())
}

#[derive(Serialize)]
struct GenerateManifestInput {
    target_hash: String,
    embedding_hash: String,
    densities: Vec<String>,
    count: usize,
    seed: u64,
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    print_resolved("generate", &a);
    let gt = load_target(&a.target)?;
    let (gs, emb) = import_embedding(&a.embedding, &gt).with_context(|| format!("importing {}", a.embedding.display()))?;
    let densities = a
        .densities
        .iter()
        .map(|d| parse_rational(d).with_context(|| format!("density '{d}'")))
        .collect::<Result<Vec<_>>>()?;
    let input = GenerateManifestInput {
        target_hash: gt.content_hash(),
        embedding_hash: sha256_hex(&std::fs::read(&a.embedding)?),
        densities: densities.iter().map(|&d| format_rational(d)).collect(),
        count: a.count,
        seed: a.seed,
    };
    let config_hash = sha256_hex(serde_json::to_string(&input)?.as_bytes());
    let family = generate_family((&gs, &emb), &gt, &densities, a.count, a.seed)?;
    let manifest = write_family(&family, &gt, &a.out, &config_hash)?;
    eprintln!("{} instances written to {} (config {})", manifest.instances.len(), a.out.display(), config_hash);
    Ok(())
}

fn cmd_instantiate(a: InstantiateArgs) -> Result<()> {
    print_resolved("instantiate", &a);
    let (_, _, members) = read_family(&a.family).with_context(|| format!("reading family {}", a.family.display()))?;
    let out = a.out.clone().unwrap_or_else(|| a.family.join("instances"));
    std::fs::create_dir_all(&out)?;
    for (i, m) in members.iter().enumerate() {
        let id = format!("{}-{}", m.entry.id, a.problem.as_str());
        let mut inst = Instance::generate(id.clone(), a.problem, m.source.clone(), derive_seed(a.seed, &[i as u64]));
        inst.embedding = Some(m.entry.embedding_file.clone());
        inst.write(&out.join(format!("{id}.json")))?;
    }
    eprintln!("{} {} instances written to {}", members.len(), a.problem.as_str(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    instance_id: String,
    problem: ProblemKind,
    metric: f64,
    result: qabench_core::SolveResult,
}

fn family_of(instance: &Path) -> Option<PathBuf> {
    let dir = instance.parent()?.parent()?;
    dir.join("manifest.json").exists().then(|| dir.to_path_buf())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    print_resolved("solve", &a);
    let inst = ProblemInstance::<f64>::read(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let placement = if a.solver != SolverKind::QpuEmu {
        None
    } else if let (Some(e), Some(t)) = (&a.embedding, &a.target) {
        let gt = load_target(t)?;
        let (_, emb) = import_embedding(e, &gt)?;
        Some((emb, gt))
    } else {
        let dir = a
            .family
            .clone()
            .or_else(|| family_of(&a.instance))
            .ok_or_else(|| anyhow!("qpu-emu needs --family or --embedding with --target"))?;
        let file = inst.embedding.clone().ok_or_else(|| anyhow!("instance {} names no embedding", inst.id))?;
        let gt = load_target(&dir.join("target.json"))?;
        let (_, emb) = import_embedding(&dir.join(&file), &gt)?;
        Some((emb, gt))
    };
    let budget = SolveBudget {
        wall_time_ms: a.time_ms,
        iter_cap: a.iter_cap,
        shots: a.shots,
        sweeps: a.sweeps,
        seed: a.seed,
    };
    let strength = match a.chain_strength {
        Some(value) => ChainStrength::Fixed { value },
        None => ChainStrength::UniformTorque { prefactor: a.torque_prefactor },
    };
    let spec = SolverSpec {
        qpu: QpuConfig { strength, rescale: a.rescale },
        tenure: a.tenure,
        ..SolverSpec::new(a.solver, budget)
    };
    let mut result = spec.run(&inst, placement.as_ref().map(|(e, g)| (e, g)), a.seed, 1)?;
    let metric = inst.metric(&result.assignment)?;
    if !a.samples {
        result.samples = None;
    }
    eprintln!("{}: energy {} metric {}", inst.id, result.energy, metric);
    let out = SolveOutput { instance_id: inst.id.clone(), problem: inst.kind, metric, result };
    let mut value = serde_json::to_value(&out)?;
    if !a.record_timing {
        value["result"].as_object_mut().expect("result is an object").remove("elapsed_ms");
    }
    write_or_print(a.out.as_deref(), &serde_json::to_string_pretty(&value)?)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config).with_context(|| format!("reading config {}", a.config.display()))?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.instances {
        cfg.instances_per_density = n;
    }
    if let Some(d) = &a.densities {
        cfg.densities = d.iter().cloned().map(DensityValue::Text).collect();
    }
    if a.record_timing {
        cfg.record_timing = true;
    }
    if let Some(o) = &a.out {
        cfg.output_dir = Some(o.clone());
    }
    let dir = cfg.output_dir.clone().ok_or_else(|| anyhow!("no output directory: pass --out or set output_dir"))?;
    eprintln!("bench: {}", serde_json::to_string(&cfg)?);
    let hash = cfg.hash();
    eprintln!("config hash {hash}");

    let prepared = prepare(&cfg)?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    write_family(&prepared.family, &prepared.target, &dir.join("family"), &hash)?;

    if let Some(sweeps) = a.scan_sweeps {
        let policy = match &cfg.reference {
            ReferencePolicy::Import { .. } => bail!("sweep scans need a computed reference policy"),
            p => p.clone(),
        };
        let references = prepared
            .cases
            .iter()
            .map(|c| {
                reference_solution(c, &policy, &cfg.solvers, &prepared.target, cfg.seed, None, &[])
                    .with_context(|| format!("reference for {}", c.instance.id))
            })
            .collect::<Result<Vec<_>>>()?;
        let qpu = cfg.solvers.iter().find(|s| s.kind == SolverKind::QpuEmu).map(|s| s.qpu.clone()).unwrap_or_default();
        let scan = ScanConfig { sweeps, time_model: cfg.time_model.clone(), max_shots: a.scan_max_shots, qpu };
        let rows = sweep_scan(&prepared.cases, &references, &prepared.target, &scan, cfg.seed)?;
        write_scan(&rows, &dir.join("scan.csv"))?;
        eprintln!("{} scan rows written to {}", rows.len(), dir.join("scan.csv").display());
        return Ok(());
    }

    let outcome = run_prepared(&cfg, &prepared)?;
    let summary = emit_report(&outcome, &dir)?;
    eprintln!("{} runs, {} errors, report in {}", summary.runs, summary.errors, dir.display());
    Ok(())
}

fn cmd_export_lp(a: ExportLpArgs) -> Result<()> {
    print_resolved("export-lp", &a);
    let inst = ProblemInstance::<f64>::read(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    if a.mis_constraints && inst.kind != ProblemKind::WeightedMis {
        bail!("--mis-constraints applies only to wmis instances, {} is {}", inst.id, inst.kind.as_str());
    }
    export_lp(&inst.model, a.mis_constraints.then_some(&inst.graph), &a.out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let jobs = cli.jobs.or_else(|| match &cli.cmd {
        Cmd::Bench(b) => ExperimentConfig::load(&b.config).ok().and_then(|c| c.jobs),
        _ => None,
    });
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    match cli.cmd {
        Cmd::Topology(a) => cmd_topology(a),
        Cmd::Embed(a) => cmd_embed(a),
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Instantiate(a) => cmd_instantiate(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::ExportLp(a) => cmd_export_lp(a),
    }
}

fn main() -> ExitCode {
    let version: &'static str = Box::leak(
        format!(
            "{} (family manifest schema {FAMILY_SCHEMA}, results schema {RESULTS_SCHEMA}, coefficient scale {WEIGHT_SCALE})",
            env!("CARGO_PKG_VERSION")
        )
        .into_boxed_str(),
    );
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
