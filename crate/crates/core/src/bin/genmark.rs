//! Command-line driver: solve, build trajectories, discover graphs, plan
//! with a graph, benchmark, export and validate.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use genmark::discovery::{satisfies, Graph};
use genmark::features::GenerationConfig;
use genmark::pddl::{ground, load_domain, load_problem, DomainDef, ProblemDef};
use genmark::pipeline::{discover, plan_annotated, solve_training};
use genmark::search::{
    self, parse_plan_text, plan_text, HelperKind, SearchConfig, SearchOutcome, SearchStats,
};
use genmark::statefns::Phi;
use genmark::trajectory::{
    execute_plan, load_trajectories, save_trajectories, GoalAnnotatedTask, TrajectorySet,
};

const EXIT_ERROR: u8 = 1;
const EXIT_UNSOLVABLE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "genmark",
    version,
    about = "Generalized landmark discovery and landmark-guided planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a problem with a helper heuristic alone.
    Solve(SolveArgs),
    /// Execute training plans and write a trajectory file.
    Trajectories(TrajectoriesArgs),
    /// Generate features, preprocess and discover a landmark graph.
    Discover(DiscoverArgs),
    /// Solve a problem guided by a landmark graph.
    Plan(PlanArgs),
    /// Run a benchmark manifest and write a CSV.
    Bench(BenchArgs),
    /// Convert a graph file to Graphviz DOT.
    ExportDot(ExportDotArgs),
    /// Check a plan, and optionally that its trajectory satisfies a graph.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct Limits {
    /// Search time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    max_expansions: Option<u64>,
    /// Cap on stored search nodes.
    #[arg(long)]
    max_states: Option<usize>,
}

impl Limits {
    fn validate(&self) -> Result<()> {
        if self.timeout.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            bail!("--timeout must be positive");
        }
        if self.max_expansions == Some(0) || self.max_states == Some(0) {
            bail!("caps must be positive");
        }
        Ok(())
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// hadd, hmax or goalcount.
    #[arg(long, default_value = "hadd")]
    helper: HelperKind,
    /// A* on g + h instead of greedy best-first.
    #[arg(long)]
    astar: bool,
    #[command(flatten)]
    limits: Limits,
    /// Plan file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Statistics JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct TrajectoriesArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long = "problem", required = true, num_args = 1..)]
    problems: Vec<PathBuf>,
    /// One plan file per problem, in the same order. Without plans every
    /// problem is solved with the built-in planner.
    #[arg(long = "plan", num_args = 1..)]
    plans: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiscoverArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    trajectories: PathBuf,
    /// Feature configuration b1..b5.
    #[arg(long, default_value = "b1")]
    beta: String,
    /// Overrides the preset's complexity limit.
    #[arg(long)]
    complexity: Option<usize>,
    /// Overrides the preset's feature limit.
    #[arg(long)]
    features: Option<usize>,
    /// Overrides the preset's generation time limit, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, default_value = "phi4")]
    preprocess: Phi,
    /// Graph JSON; the DOT rendering is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// hadd, hmax, goalcount, or none for the landmark value alone.
    #[arg(long, default_value = "hadd")]
    helper: String,
    #[arg(long, overrides_with = "no_prune")]
    prune: bool,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    astar: bool,
    #[command(flatten)]
    limits: Limits,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML manifest; relative paths resolve against its directory.
    manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    graph: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Trajectories(a) => cmd_trajectories(a).map(|_| 0),
        Cmd::Discover(a) => cmd_discover(a).map(|_| 0),
        Cmd::Plan(a) => cmd_plan(a),
        Cmd::Bench(a) => cmd_bench(a).map(|_| 0),
        Cmd::ExportDot(a) => cmd_export_dot(a).map(|_| 0),
        Cmd::Validate(a) => cmd_validate(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read_domain(path: &Path) -> Result<DomainDef> {
    load_domain(path).with_context(|| format!("reading domain {}", path.display()))
}

fn read_problem(path: &Path, domain: &DomainDef) -> Result<ProblemDef> {
    load_problem(path, domain).with_context(|| format!("reading problem {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading graph {}", path.display()))?;
    Graph::from_json(&text).with_context(|| format!("parsing graph {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn search_config(
    helper: Option<HelperKind>,
    astar: bool,
    prune: bool,
    limits: &Limits,
) -> SearchConfig {
    SearchConfig {
        helper,
        astar,
        prune,
        max_expansions: limits.max_expansions,
        max_states: limits.max_states,
        time_limit: limits.timeout.map(Duration::from_secs_f64),
    }
}

/// Writes plan and statistics and maps the outcome to an exit code.
fn report(outcome: &SearchOutcome, out: Option<&Path>, stats: Option<&Path>) -> Result<u8> {
    let s = outcome.stats();
    if let Some(path) = stats {
        write(path, &s.to_json())?;
    }
    match outcome {
        SearchOutcome::Solved { plan, stats } => {
            let text = plan_text(plan, stats);
            match out {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
            eprintln!(
                "solved: {} actions, {} expanded, {:.3}s",
                plan.len(),
                stats.expanded,
                stats.wall_time
            );
            Ok(0)
        }
        SearchOutcome::Unsolvable { stats } => {
            eprintln!("unsolvable: {} expanded", stats.expanded);
            Ok(EXIT_UNSOLVABLE)
        }
        SearchOutcome::ResourceLimit { stats, reason } => {
            eprintln!("resource limit ({reason}): {} expanded", stats.expanded);
            Ok(EXIT_RESOURCE)
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<u8> {
    a.limits.validate()?;
    let domain = read_domain(&a.domain)?;
    let problem = read_problem(&a.problem, &domain)?;
    let task = ground(&domain, &problem)?;
    let config = search_config(Some(a.helper), a.astar, false, &a.limits);
    let outcome = search::plan(&task, None, &config)?;
    report(&outcome, a.out.as_deref(), a.stats.as_deref())
}

fn cmd_trajectories(a: TrajectoriesArgs) -> Result<()> {
    if !a.plans.is_empty() && a.plans.len() != a.problems.len() {
        bail!(
            "usage: {} problems but {} plans",
            a.problems.len(),
            a.plans.len()
        );
    }
    let domain = read_domain(&a.domain)?;
    let problems = a
        .problems
        .iter()
        .map(|p| read_problem(p, &domain))
        .collect::<Result<Vec<_>>>()?;
    let runs = if a.plans.is_empty() {
        solve_training(&domain, &problems, &SearchConfig::default())?
    } else {
        let mut runs = Vec::with_capacity(problems.len());
        for (p, path) in problems.into_iter().zip(&a.plans) {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading plan {}", path.display()))?;
            runs.push((p, parse_plan_text(&text)));
        }
        runs
    };
    let set = TrajectorySet::build(&domain, &runs)?;
    save_trajectories(&set, &a.out)?;
    let lens: Vec<String> = set
        .trajectories
        .iter()
        .map(|t| format!("{}:{}", t.task_id, t.len()))
        .collect();
    eprintln!(
        "wrote {} trajectories ({} states: {})",
        set.trajectories.len(),
        set.total_states(),
        lens.join(" ")
    );
    Ok(())
}

fn cmd_discover(a: DiscoverArgs) -> Result<()> {
    let domain = read_domain(&a.domain)?;
    let set = load_trajectories(&a.trajectories, &domain)?;
    let mut config = GenerationConfig::preset(&a.beta)?;
    if let Some(c) = a.complexity {
        config.complexity_limit = c;
    }
    if let Some(f) = a.features {
        config.feature_limit = f;
    }
    if let Some(t) = a.timeout {
        if !(t > 0.0 && t.is_finite()) {
            bail!("--timeout must be positive");
        }
        config.time_limit = Duration::from_secs_f64(t);
    }
    let (graph, r) = discover(&set, &config, a.preprocess)?;
    eprintln!(
        "pool {} features, {} after {} ({:.3}s); discovery {:.3}s",
        r.pool_size,
        r.preprocessed_size,
        a.preprocess,
        r.generation_time.as_secs_f64(),
        r.discovery_time.as_secs_f64()
    );
    eprintln!(
        "graph: {} nodes, {} loops",
        graph.nodes.len(),
        graph.loops.len()
    );
    write(&a.out, &graph.to_json())?;
    write(&a.out.with_extension("dot"), &graph.to_dot())?;
    Ok(())
}

fn cmd_plan(a: PlanArgs) -> Result<u8> {
    a.limits.validate()?;
    let helper = match a.helper.as_str() {
        "none" => None,
        h => Some(h.parse::<HelperKind>().map_err(|e| anyhow!(e))?),
    };
    let domain = read_domain(&a.domain)?;
    let problem = read_problem(&a.problem, &domain)?;
    let graph = read_graph(&a.graph)?;
    let config = search_config(helper, a.astar, !a.no_prune, &a.limits);
    let outcome = plan_annotated(&domain, &problem, Some(&graph), &config)?;
    report(&outcome, a.out.as_deref(), a.stats.as_deref())
}

fn cmd_export_dot(a: ExportDotArgs) -> Result<()> {
    let dot = read_graph(&a.graph)?.to_dot();
    match a.out {
        Some(path) => write(&path, &dot),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<()> {
    let domain = read_domain(&a.domain)?;
    let problem = read_problem(&a.problem, &domain)?;
    let text = fs::read_to_string(&a.plan)
        .with_context(|| format!("reading plan {}", a.plan.display()))?;
    let plan = parse_plan_text(&text);
    let task = GoalAnnotatedTask::new(&domain, &problem)?;
    let traj = execute_plan(&task.task, &plan)?;
    println!("valid plan: {} actions", plan.len());
    if let Some(path) = a.graph {
        let graph = read_graph(&path)?;
        search::check_fingerprint(&graph, &domain)?;
        let trace = satisfies(&graph, &traj);
        if !trace.satisfied {
            bail!(
                "trajectory does not satisfy the graph (occurrences {:?})",
                trace.occurrences
            );
        }
        println!("graph satisfied: occurrences {:?}", trace.occurrences);
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    domain: PathBuf,
    instances: Vec<PathBuf>,
    configs: Vec<BenchConfig>,
    timeout: Option<f64>,
    max_expansions: Option<u64>,
    max_states: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    name: String,
    #[serde(default = "default_helper")]
    helper: String,
    graph: Option<PathBuf>,
    #[serde(default = "default_true")]
    prune: bool,
}

fn default_helper() -> String {
    "hadd".into()
}

fn default_true() -> bool {
    true
}

struct Row {
    instance: String,
    config: String,
    stats: Option<SearchStats>,
    status: &'static str,
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.jobs == 0 {
        bail!("--jobs must be positive");
    }
    let text = fs::read_to_string(&a.manifest)
        .with_context(|| format!("reading {}", a.manifest.display()))?;
    let m: Manifest =
        toml::from_str(&text).with_context(|| format!("parsing {}", a.manifest.display()))?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    Limits {
        timeout: m.timeout,
        max_expansions: m.max_expansions,
        max_states: m.max_states,
    }
    .validate()?;
    let names: BTreeMap<&str, usize> = m
        .configs
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    if names.len() != m.configs.len() {
        bail!("configuration names must be unique");
    }

    let exe = std::env::current_exe()?;
    let scratch = tempfile::tempdir()?;
    let runs: Vec<(PathBuf, &BenchConfig)> = m
        .instances
        .iter()
        .flat_map(|i| m.configs.iter().map(move |c| (resolve(i), c)))
        .collect();
    let rows: Mutex<Vec<Option<Row>>> = Mutex::new((0..runs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let domain = resolve(&m.domain);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.min(runs.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some((instance, config)) = runs.get(k) else {
                    break;
                };
                let stats_path = scratch.path().join(format!("{k}.json"));
                let graph = config.graph.as_deref().map(&resolve);
                let row = run_one(
                    &exe,
                    &domain,
                    instance,
                    config,
                    graph.as_deref(),
                    &m,
                    &stats_path,
                );
                rows.lock().unwrap()[k] = Some(row);
            });
        }
    });
    let rows: Vec<Row> = rows
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every run finished"))
        .collect();

    let mut csv = String::from("instance,heuristic,expanded,plan_length,time,status\n");
    for r in &rows {
        let (exp, len, time) = match &r.stats {
            Some(s) => (
                s.expanded.to_string(),
                s.plan_length.map(|l| l.to_string()).unwrap_or_default(),
                format!("{:.3}", s.wall_time),
            ),
            None => Default::default(),
        };
        csv.push_str(&format!(
            "{},{},{exp},{len},{time},{}\n",
            r.instance, r.config, r.status
        ));
    }
    let mut summary = String::from("config solved unsolvable resource-limit error\n");
    for c in &m.configs {
        let count = |st: &str| {
            rows.iter()
                .filter(|r| r.config == c.name && r.status == st)
                .count()
        };
        summary.push_str(&format!(
            "{} {} {} {} {}\n",
            c.name,
            count("solved"),
            count("unsolvable"),
            count("resource-limit"),
            count("error")
        ));
    }
    match a.out {
        Some(path) => {
            write(&path, &csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

/// One instance run in a child process. A child that outlives its time
/// limit by a margin is killed and counted as a resource limit.
fn run_one(
    exe: &Path,
    domain: &Path,
    instance: &Path,
    config: &BenchConfig,
    graph: Option<&Path>,
    m: &Manifest,
    stats_path: &Path,
) -> Row {
    let name = instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut cmd = Command::new(exe);
    match graph {
        Some(g) => {
            cmd.arg("plan").arg("--graph").arg(g);
            if !config.prune {
                cmd.arg("--no-prune");
            }
        }
        None => {
            cmd.arg("solve");
        }
    }
    cmd.arg("--domain")
        .arg(domain)
        .arg("--problem")
        .arg(instance);
    cmd.arg("--helper")
        .arg(&config.helper)
        .arg("--stats")
        .arg(stats_path);
    cmd.arg("--out").arg(stats_path.with_extension("plan"));
    if let Some(t) = m.timeout {
        cmd.arg("--timeout").arg(t.to_string());
    }
    if let Some(n) = m.max_expansions {
        cmd.arg("--max-expansions").arg(n.to_string());
    }
    if let Some(n) = m.max_states {
        cmd.arg("--max-states").arg(n.to_string());
    }
    cmd.stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null());
    let hard = m.timeout.map(|t| Duration::from_secs_f64(t * 1.5 + 5.0));
    let status = match cmd.spawn() {
        Err(_) => "error",
        Ok(mut child) => {
            let start = Instant::now();
            loop {
                match child.try_wait() {
                    Ok(Some(st)) => {
                        break match st.code() {
                            Some(0) => "solved",
                            Some(2) => "unsolvable",
                            Some(3) => "resource-limit",
                            _ => "error",
                        }
                    }
                    Ok(None) if hard.is_some_and(|h| start.elapsed() > h) => {
                        let _ = child.kill();
                        let _ = child.wait();
                        break "resource-limit";
                    }
                    Ok(None) => std::thread::sleep(Duration::from_millis(5)),
                    Err(_) => break "error",
                }
            }
        }
    };
    let stats = fs::read_to_string(stats_path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    Row {
        instance: name,
        config: config.name.clone(),
        stats,
        status,
    }
}
