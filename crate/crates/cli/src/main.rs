use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Rendezvous of two identical anonymous agents on port-labeled graphs.
#[derive(Parser, Debug)]
#[command(name = "symrv", version, about)]
struct Cli {
    /// Directory of cached exploration sequences (default: $SYMRV_CACHE_DIR
    /// or a directory under the system temp dir).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Print view classes, and for a node pair its Shrink and feasibility threshold.
    Analyze(AnalyzeArgs),
    /// Simulate two agents from one configuration.
    Run(RunArgs),
    /// Find or build an exploration sequence.
    Uxs(UxsArgs),
    /// Run a batch of configurations.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    K2,
    Path,
    Ring,
    Torus,
    Tree,
    SymTree,
    Qh,
    Qhat,
}

#[derive(Args, Debug, Clone)]
struct FamilyParams {
    /// Number of nodes (path, ring).
    #[arg(long)]
    m: Option<usize>,
    /// Torus rows.
    #[arg(long)]
    a: Option<usize>,
    /// Torus columns.
    #[arg(long)]
    b: Option<usize>,
    /// Depth of Q_h / Q̂_h.
    #[arg(long)]
    h: Option<usize>,
    /// Children per internal node (tree, sym-tree).
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Height (tree, sym-tree).
    #[arg(long, default_value_t = 2)]
    height: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[command(flatten)]
    params: FamilyParams,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: GraphFormat,
    /// Metadata file for qhat (default: <out>.meta.json when --out is set).
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    graph: PathBuf,
    u: Option<usize>,
    v: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RunAlgo {
    Universal,
    Symmrv,
    Asymmrv,
    MoveAlways,
    Wait,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum UxsMode {
    /// Verified universal sequences for small sizes, the graph's own sequence otherwise.
    Verified,
    /// The graph's own covering sequence for every size.
    Instance,
}

#[derive(Args, Debug)]
struct RunArgs {
    graph: PathBuf,
    u: usize,
    v: usize,
    delta: u64,
    #[arg(long, value_enum, default_value = "universal")]
    algo: RunAlgo,
    /// Size hypothesis for symmrv / asymmrv (default: true size).
    #[arg(long)]
    n: Option<u64>,
    /// Shrink hypothesis for symmrv (default: true Shrink, at least 1).
    #[arg(long)]
    d: Option<u64>,
    /// Delay hypothesis for symmrv / asymmrv (default: the actual delay).
    #[arg(long)]
    hyp_delta: Option<u64>,
    /// Rounds allowed after the later agent appears.
    #[arg(long, default_value_t = symrv::sim::INFEASIBLE_PROBE_BUDGET)]
    budget: u64,
    /// Write the per-round trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "verified")]
    uxs: UxsMode,
    /// Largest size with a searched universal sequence.
    #[arg(long, default_value_t = symrv::uxs::DEFAULT_VERIFIED_CAP)]
    verified_cap: usize,
}

#[derive(Args, Debug)]
struct UxsArgs {
    /// Search a universal sequence for this size.
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    n: Option<usize>,
    /// Build a covering sequence for this graph.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Search node budget.
    #[arg(long, default_value_t = symrv::uxs::DEFAULT_SEARCH_BUDGET)]
    budget: u64,
    /// Write the sequence file here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the sequence as JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BenchAlgo {
    Universal,
    SymmrvKnown,
    MoveAlways,
    Wait,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Stics {
    /// Every ordered pair of distinct nodes with every delay in range.
    All,
    /// Root and each member of Z for every even D <= h, with delay D (qhat only).
    ZPairs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OutFormat {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Every graph with this many nodes.
    #[arg(long, conflicts_with_all = ["family", "graph"])]
    enumerate: Option<usize>,
    /// Keep one graph per isomorphism class of the enumeration.
    #[arg(long, requires = "enumerate")]
    dedup: bool,
    /// A generated family.
    #[arg(long, value_enum, conflicts_with = "graph")]
    family: Option<Family>,
    #[command(flatten)]
    params: FamilyParams,
    /// Graph files.
    #[arg(long)]
    graph: Vec<PathBuf>,
    /// Inclusive delay range `a..b` (or a single value).
    #[arg(long, default_value = "0..4")]
    delta: String,
    #[arg(long, value_enum, default_value = "all")]
    stics: Stics,
    /// Default: universal, or symmrv-known for z-pairs.
    #[arg(long, value_enum)]
    algo: Option<BenchAlgo>,
    /// Fixed budget; default is the guaranteed bound (feasible) or 100000 rounds.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Results file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: OutFormat,
    /// Exit with status 2 if any meeting outcome disagrees with feasibility.
    #[arg(long)]
    check_feasibility: bool,
    /// Write the complexity report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = symrv::uxs::DEFAULT_VERIFIED_CAP)]
    verified_cap: usize,
}

/// Failure classes, mapped to exit codes 1 (usage), 2 (mismatch), 3 (I/O).
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Mismatch(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

pub fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

pub fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cache = match &cli.cache_dir {
        Some(dir) => symrv::uxs::UxsCache::new(dir),
        None => symrv::uxs::UxsCache::from_env(),
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Run(a) => commands::run(a, &cache),
        Command::Uxs(a) => commands::uxs(a, &cache),
        Command::Bench(a) => commands::bench(a, &cache),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Mismatch(e) | Failure::Io(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
