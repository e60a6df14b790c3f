//! Command-line front end: load → preprocess → project → solve, sample or
//! enumerate → report.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::digraph::WeightedDigraph;
use crate::dynamics::{self, DenseSolver, DEFAULT_DENSE_LIMIT, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::forest;
use crate::hypergraph::{random_hypergraph, random_opinions, Hypergraph};
use crate::io::{self, LoadStats, ReportFormat, RunReport, SimplexDatasetRef};
use crate::projection::Projection;
use crate::sampler::{self, SamplerConfig, DEFAULT_TAU};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "hyperfj", version, about = "Friedkin-Johnsen opinion dynamics on hypergraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Node, hyperedge and arc counts of an input hypergraph.
    Stats(StatsArgs),
    /// Write the projected graph as an arc list.
    Project(ProjectArgs),
    /// Exact equilibrium (dense solve or fixed-point iteration).
    Solve(SolveArgs),
    /// Forest-sampling estimate of the equilibrium.
    Sample(SampleArgs),
    /// Run the exact solver and the sampler on the same input and compare.
    Compare(CompareArgs),
    /// Brute-force in-forest enumeration on a small graph.
    Enumerate(EnumerateArgs),
    /// Sampler timings over a ladder of synthetic graph sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionArg {
    Clique,
    Directed,
}

impl From<ProjectionArg> for Projection {
    fn from(p: ProjectionArg) -> Self {
        match p {
            ProjectionArg::Clique => Projection::Clique,
            ProjectionArg::Directed => Projection::Directed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaArg {
    Uniform,
    Powerlaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Exact,
    Iterate,
}

/// Where the hypergraph comes from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Hyperedge list: one comma-separated hyperedge per line, optional `; weight`.
    #[arg(long, conflicts_with_all = ["nverts", "simplices", "dataset"])]
    pub hyperedges: Option<PathBuf>,
    /// Simplex-format vertex counts file.
    #[arg(long, requires = "simplices")]
    pub nverts: Option<PathBuf>,
    /// Simplex-format concatenated vertex file.
    #[arg(long, requires = "nverts")]
    pub simplices: Option<PathBuf>,
    /// Dataset name inside `--dataset-dir` (reads `<name>-nverts.txt`, `<name>-simplices.txt`).
    #[arg(long, conflicts_with_all = ["nverts", "simplices"])]
    pub dataset: Option<String>,
    #[arg(long, default_value = ".")]
    pub dataset_dir: PathBuf,
    /// Keep hyperedges with a single member.
    #[arg(long)]
    pub keep_singletons: bool,
    /// Set every hyperedge weight to 1.
    #[arg(long)]
    pub unit_weights: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "directed")]
    pub projection: ProjectionArg,
    #[arg(long, value_enum, default_value = "powerlaw")]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 1)]
    pub gamma_seed: u64,
    /// Internal opinions, one per line. Uniform random on [0,1] when absent.
    #[arg(long)]
    pub opinions: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub opinion_seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "directed")]
    pub projection: ProjectionArg,
    #[arg(long, value_enum, default_value = "powerlaw")]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 1)]
    pub gamma_seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnumerateArgs {
    /// Arc list (`source target weight` per line) instead of a hypergraph.
    #[arg(long, conflicts_with_all = ["hyperedges", "nverts", "simplices", "dataset"])]
    pub arcs: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "directed")]
    pub projection: ProjectionArg,
    #[arg(long, value_enum, default_value = "uniform")]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 1)]
    pub gamma_seed: u64,
    /// Also emit the matrix of ε(Γ_ij)/ε(Γ).
    #[arg(long)]
    pub matrix: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Target n + m values of the synthetic directed projections.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10_000usize, 20_000, 40_000, 80_000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Timed repetitions per size; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A loaded and preprocessed hypergraph.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub hypergraph: Hypergraph,
    pub load: LoadStats,
    pub singletons_removed: usize,
}

pub fn load_input(args: &InputArgs) -> Result<Prepared> {
    let (raw, load) = if let Some(path) = &args.hyperedges {
        let l = io::load_hyperedge_list(path)?;
        (l.hypergraph, l.stats)
    } else if let (Some(nv), Some(sx)) = (&args.nverts, &args.simplices) {
        let l = io::load_simplex_dataset(&SimplexDatasetRef::new(nv, sx))?;
        (l.hypergraph, l.stats)
    } else if let Some(name) = &args.dataset {
        let l = io::load_simplex_dataset(&SimplexDatasetRef::in_dir(&args.dataset_dir, name))?;
        (l.hypergraph, l.stats)
    } else {
        return Err(Error::Config(
            "no input: pass --hyperedges, --nverts/--simplices or --dataset".into(),
        ));
    };
    let mut h = if args.keep_singletons {
        raw.clone()
    } else {
        raw.filter_singletons()
    };
    if args.unit_weights {
        h = h.unit_edge_weights();
    }
    Ok(Prepared {
        singletons_removed: raw.edge_count() - h.edge_count(),
        hypergraph: h,
        load,
    })
}

fn apply_gamma(h: &Hypergraph, gamma: GammaArg, seed: u64) -> Hypergraph {
    match gamma {
        GammaArg::Uniform => h.uniform_gamma(),
        GammaArg::Powerlaw => h.powerlaw_gamma(seed),
    }
}

pub fn build_graph(h: &Hypergraph, projection: ProjectionArg, gamma: GammaArg, seed: u64) -> Result<WeightedDigraph> {
    let weighted = match projection {
        ProjectionArg::Clique => h.clone(),
        ProjectionArg::Directed => apply_gamma(h, gamma, seed),
    };
    Ok(Projection::from(projection).apply(&weighted)?)
}

fn opinions(model: &ModelArgs, n: usize) -> Result<Vec<f64>> {
    match &model.opinions {
        Some(path) => {
            let x = io::load_opinions(path)?;
            if x.len() != n {
                return Err(Error::Config(format!(
                    "{} holds {} opinions for {n} nodes",
                    path.display(),
                    x.len()
                )));
            }
            Ok(x)
        }
        None => Ok(random_opinions(n, model.opinion_seed)),
    }
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<String> {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|source| io::IoError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn config_echo<T: Serialize>(command: &str, args: &T) -> serde_json::Value {
    json!({ "command": command, "args": args })
}

fn stats(args: &StatsArgs) -> Result<String> {
    let p = load_input(&args.input)?;
    let h = &p.hypergraph;
    let directed = Projection::Directed.apply(&h.uniform_gamma())?;
    let out = json!({
        "nodes": h.node_count(),
        "hyperedges": h.edge_count(),
        "raw_hyperedges": p.load.hyperedges,
        "singletons_removed": p.singletons_removed,
        "duplicate_members_removed": p.load.duplicate_members_removed,
        "skipped_lines": p.load.skipped_lines,
        "directed_arcs": directed.arc_count(),
        "undirected_edges": directed.arc_count() / 2,
        "isolated_nodes": (0..h.node_count()).filter(|&i| directed.out_degree(i) == 0.0).count(),
    });
    Ok(serde_json::to_string_pretty(&out).expect("json"))
}

fn project(args: &ProjectArgs) -> Result<String> {
    let p = load_input(&args.input)?;
    let g = build_graph(&p.hypergraph, args.projection, args.gamma, args.gamma_seed)?;
    emit(io::format_arc_list(&g), &args.out)
}

fn solve(args: &SolveArgs) -> Result<String> {
    let p = load_input(&args.input)?;
    let m = &args.model;
    let g = build_graph(&p.hypergraph, m.projection, m.gamma, m.gamma_seed)?;
    let x = opinions(m, g.node_count())?;
    let start = Instant::now();
    let eq = match args.method {
        MethodArg::Exact => DenseSolver::new(args.dense_limit).equilibrium(&g, &x)?,
        MethodArg::Iterate => {
            let it = dynamics::fj_iterate(&g, &x, args.tol, args.max_iter)?;
            dynamics::EquilibriumReport::from_opinions(it.z)
        }
    };
    let report = RunReport {
        n: g.node_count(),
        m: g.arc_count(),
        overall_internal: dynamics::overall_opinion(&x),
        overall_expressed: eq.overall,
        polarization: eq.polarization,
        tau: None,
        seed: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: config_echo("solve", args),
        x,
        z: eq.z,
    };
    emit(report.render(args.output.format.into()), &args.output.out)
}

fn sampler_config(s: &SamplingArgs) -> SamplerConfig {
    SamplerConfig::new(s.tau, s.seed).with_workers(s.workers)
}

fn sample(args: &SampleArgs) -> Result<String> {
    let p = load_input(&args.input)?;
    let m = &args.model;
    let g = build_graph(&p.hypergraph, m.projection, m.gamma, m.gamma_seed)?;
    let x = opinions(m, g.node_count())?;
    let cfg = sampler_config(&args.sampling);
    let start = Instant::now();
    let est = sampler::estimate(&g, &x, &cfg)?;
    let report = RunReport {
        n: g.node_count(),
        m: g.arc_count(),
        overall_internal: dynamics::overall_opinion(&x),
        overall_expressed: est.overall_hat,
        polarization: est.polarization_hat,
        tau: Some(est.tau),
        seed: Some(est.seed),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: config_echo("sample", args),
        x,
        z: est.z_hat,
    };
    emit(report.render(args.output.format.into()), &args.output.out)
}

/// Exact-vs-sampled comparison on one graph.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub n: usize,
    pub m: usize,
    pub overall_internal: f64,
    pub overall_exact: f64,
    pub overall_sampled: f64,
    pub polarization_exact: f64,
    pub polarization_sampled: f64,
    pub max_abs_error: f64,
    pub polarization_abs_error: f64,
    /// Fraction of nodes with `|ẑ_i − z_i| ≤ 5·stderr_i`.
    pub within_five_stderr: f64,
    pub tau: usize,
    pub seed: u64,
    pub exact_seconds: f64,
    pub sample_seconds: f64,
}

pub fn compare_on(g: &WeightedDigraph, x: &[f64], cfg: &SamplerConfig, dense_limit: usize) -> Result<Comparison> {
    let t0 = Instant::now();
    let eq = DenseSolver::new(dense_limit).equilibrium(g, x)?;
    let exact_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (est, se) = sampler::estimate_with_stderr(g, x, cfg)?;
    let sample_seconds = t1.elapsed().as_secs_f64();
    let errs: Vec<f64> = est.z_hat.iter().zip(&eq.z).map(|(a, b)| (a - b).abs()).collect();
    let within = errs
        .iter()
        .zip(&se)
        .filter(|(e, s)| **e <= 5.0 * **s + ROUNDING_FLOOR)
        .count();
    Ok(Comparison {
        n: g.node_count(),
        m: g.arc_count(),
        overall_internal: dynamics::overall_opinion(x),
        overall_exact: eq.overall,
        overall_sampled: est.overall_hat,
        polarization_exact: eq.polarization,
        polarization_sampled: est.polarization_hat,
        max_abs_error: errs.iter().cloned().fold(0.0, f64::max),
        polarization_abs_error: (est.polarization_hat - eq.polarization).abs(),
        within_five_stderr: if errs.is_empty() {
            1.0
        } else {
            within as f64 / errs.len() as f64
        },
        tau: cfg.tau,
        seed: cfg.seed,
        exact_seconds,
        sample_seconds,
    })
}

/// Absolute slack for nodes whose estimator has zero variance, where the
/// exact solve and the sample mean can still differ by rounding.
pub const ROUNDING_FLOOR: f64 = 1e-12;

fn compare(args: &CompareArgs) -> Result<String> {
    let p = load_input(&args.input)?;
    let m = &args.model;
    let g = build_graph(&p.hypergraph, m.projection, m.gamma, m.gamma_seed)?;
    let x = opinions(m, g.node_count())?;
    let c = compare_on(&g, &x, &sampler_config(&args.sampling), args.dense_limit)?;
    let mut v = serde_json::to_value(&c).expect("json");
    v["config"] = config_echo("compare", args);
    emit(serde_json::to_string_pretty(&v).expect("json"), &args.out)
}

fn enumerate(args: &EnumerateArgs) -> Result<String> {
    let g = match &args.arcs {
        Some(path) => io::load_arc_list(path)?,
        None => {
            let p = load_input(&args.input)?;
            build_graph(&p.hypergraph, args.projection, args.gamma, args.gamma_seed)?
        }
    };
    let family = forest::enumerate_in_forests(&g)?;
    let exact = forest::exact_forest_weights(&g)?;
    let mut out = json!({
        "nodes": g.node_count(),
        "arcs": g.arc_count(),
        "forest_count": family.len(),
        "forest_weight": family.total_weight(),
        "forest_weight_exact": exact.total.to_string(),
    });
    if args.matrix {
        let n = g.node_count();
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| exact.rooted[i][j].clone()).map(|w| ratio_to_f64(&w, &exact.total)).collect())
            .collect();
        let rooted: Vec<Vec<String>> = exact
            .rooted
            .iter()
            .map(|row| row.iter().map(|w| w.to_string()).collect())
            .collect();
        out["omega"] = json!(m);
        out["rooted_weight_exact"] = json!(rooted);
    }
    emit(serde_json::to_string_pretty(&out).expect("json"), &args.out)
}

fn ratio_to_f64(num: &num_rational::BigRational, den: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    (num / den).to_f64().unwrap_or(f64::NAN)
}

/// Synthetic hypergraph whose directed projection has roughly `target`
/// nodes plus arcs, at a fixed density: `n = target / 8` nodes and
/// size-3 hyperedges contributing six arcs each.
pub fn bench_hypergraph(target: usize, seed: u64) -> Hypergraph {
    let n = (target / 8).max(3);
    let edges = target.saturating_sub(n) / 6;
    random_hypergraph(n, edges, 3, 3, seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchPoint {
    pub target: usize,
    pub n: usize,
    pub m: usize,
    pub n_plus_m: usize,
    pub elapsed_seconds: f64,
}

pub fn bench_points(args: &BenchArgs) -> Result<Vec<BenchPoint>> {
    let mut out = Vec::new();
    for &target in &args.sizes {
        let h = bench_hypergraph(target, args.seed).powerlaw_gamma(args.seed);
        let g = Projection::Directed.apply(&h)?;
        let x = random_opinions(g.node_count(), args.seed);
        let cfg = SamplerConfig::new(args.tau, args.seed).with_workers(args.workers);
        let mut times = Vec::with_capacity(args.repeats.max(1));
        for _ in 0..args.repeats.max(1) {
            let t = Instant::now();
            std::hint::black_box(sampler::estimate(&g, &x, &cfg)?);
            times.push(t.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        out.push(BenchPoint {
            target,
            n: g.node_count(),
            m: g.arc_count(),
            n_plus_m: g.node_count() + g.arc_count(),
            elapsed_seconds: times[times.len() / 2],
        });
    }
    Ok(out)
}

fn bench(args: &BenchArgs) -> Result<String> {
    let points = bench_points(args)?;
    let out = json!({ "points": points, "config": config_echo("bench", args) });
    emit(serde_json::to_string_pretty(&out).expect("json"), &args.out)
}

/// Runs one parsed command and returns what should be printed on stdout.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Stats(a) => stats(a),
        Command::Project(a) => project(a),
        Command::Solve(a) => solve(a),
        Command::Sample(a) => sample(a),
        Command::Compare(a) => compare(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Bench(a) => bench(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    run(&cli)
}

/// Machine-readable error object.
pub fn error_json(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}
