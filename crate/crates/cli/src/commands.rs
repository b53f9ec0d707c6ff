use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use zdlab::deploy::{optimize_exhaustive, optimize_ga, GaConfig, DEFAULT_EXHAUSTIVE_CAP};
use zdlab::field::{cooperator_ratio, evaluate, Deployment, RatioMode};
use zdlab::game::{payoff_vectors, GameShape, PayoffScale, State};
use zdlab::network::{betweenness, degree_stats, generate, ingest_trace, parse_trace, read_graph, write_graph, Graph, Topology};
use zdlab::zd::{feasible_l_range, incentive_menu, synthesize, verify_enforcement, OutsiderProfile, PhiInterval, ZdParams};

use crate::config::ExperimentConfig;
use crate::sweep::{run_sweep, write_csv, write_outputs};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "zdlab", version, about = "ZD alliance synthesis and ZD placement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic topology and write it as a graph file.
    Topo(TopoArgs),
    /// Build a graph from a contact trace.
    Ingest(IngestArgs),
    /// Synthesize a ZD alliance strategy and report it.
    Synth(SynthArgs),
    /// Check the enforced payoff relation against random outsiders.
    Verify(VerifyArgs),
    /// Evaluate the cooperation field of one ZD deployment.
    Field(FieldArgs),
    /// Find the best placement of K ZD nodes.
    Opt(OptArgs),
    /// Run a configured K-sweep and write CSV results.
    Sweep(SweepArgs),
    /// Per-node degree and betweenness.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct TopoArgs {
    #[arg(long, value_parser = parse_topology)]
    pub topology: Topology,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub min_contacts: usize,
    /// Accepted for uniformity; ingestion is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ShapeArgs {
    /// Total number of players N.
    #[arg(long)]
    pub players: usize,
    /// Number of leaders; defaults to N.
    #[arg(long)]
    pub leaders: Option<usize>,
    /// Alliance size n_A; defaults to N - 1.
    #[arg(long)]
    pub alliance: Option<usize>,
    /// Enhancement factor r; defaults to 2N + 3.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub chi: f64,
    #[arg(long)]
    pub l: f64,
    /// Fix the scaling factor instead of taking the interval midpoint.
    #[arg(long)]
    pub phi: Option<f64>,
}

impl ShapeArgs {
    fn shape(&self) -> Result<GameShape, CliError> {
        let n = self.players;
        let alliance = self.alliance.unwrap_or(n.saturating_sub(1));
        let leaders = self.leaders.unwrap_or(n);
        let r = self.r.unwrap_or(2.0 * n as f64 + 3.0);
        Ok(GameShape::new(n, leaders, alliance, r)?)
    }

    fn params(&self) -> Result<ZdParams, CliError> {
        let mut params = ZdParams::new(self.shape()?, self.chi, self.l);
        params.phi = self.phi;
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Accepted for uniformity; synthesis is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Number of random outsider profiles.
    #[arg(long, default_value_t = 20)]
    pub draws: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Clone)]
pub struct GraphArgs {
    /// Graph file; alternatively give --topology and --n.
    #[arg(long, conflicts_with = "topology")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_parser = parse_topology, requires = "n")]
    pub topology: Option<Topology>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
}

impl GraphArgs {
    fn load(&self, seed: u64) -> Result<Graph, CliError> {
        match (&self.graph, self.topology, self.n) {
            (Some(path), _, _) => read_graph_file(path),
            (None, Some(t), Some(n)) => Ok(generate(t, n, seed, self.density)?),
            _ => Err(CliError::Config("give --graph FILE or --topology T --n N".into())),
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ScaleArgs {
    /// r(n) = a·n^k + b
    #[arg(long, default_value_t = 2.0)]
    pub scale_a: f64,
    #[arg(long, default_value_t = 1)]
    pub scale_k: u32,
    #[arg(long, default_value_t = 3.0)]
    pub scale_b: f64,
}

impl ScaleArgs {
    fn scale(&self) -> Result<PayoffScale, CliError> {
        let scale = PayoffScale::new(self.scale_a, self.scale_k, self.scale_b)?;
        if !scale.is_dilemma_everywhere() {
            return Err(CliError::Config(format!("payoff scale {scale} gives r <= 1 for some group size")));
        }
        Ok(scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Expected,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scale: ScaleArgs,
    /// Comma-separated ZD node ids.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub zd: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Expected)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write per-node values as CSV.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scale: ScaleArgs,
    #[arg(long)]
    pub k: usize,
    /// Enumerate every placement instead of running the genetic search.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 300)]
    pub generations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output` in the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-node CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: zdlab::Error| e.to_string())
}

fn read_graph_file(path: &Path) -> Result<Graph, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_graph(BufReader::new(file))?)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit_graph<W: Write>(g: &Graph, target: &Option<PathBuf>, out: &mut W) -> Result<(), CliError> {
    match target {
        Some(path) => {
            write_graph(g, create(path)?)?;
            writeln!(out, "wrote {} nodes, {} edges to {}", g.node_count(), g.edge_count(), path.display()).map_err(CliError::io)
        }
        None => Ok(write_graph(g, out)?),
    }
}

fn json<W: Write, T: Serialize>(value: &T, out: &mut W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out).map_err(CliError::io)
}

/// Execute one command, writing its report to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Topo(a) => {
            let g = generate(a.topology, a.n, a.seed, a.density)?;
            emit_graph(&g, &a.out, out)
        }
        Command::Ingest(a) => {
            let file = std::fs::File::open(&a.trace)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.trace.display())))?;
            let trace = ingest_trace(parse_trace(BufReader::new(file))?, a.min_contacts)?;
            emit_graph(&trace.graph, &a.out, out)
        }
        Command::Synth(a) => synth(&a, out),
        Command::Verify(a) => verify(&a, out),
        Command::Field(a) => field(&a, out),
        Command::Opt(a) => opt(&a, out),
        Command::Sweep(a) => sweep(&a, out),
        Command::Metrics(a) => metrics(&a, out),
    }
}

#[derive(Debug, Serialize)]
struct FEntry {
    state: String,
    f: f64,
}

#[derive(Debug, Serialize)]
struct TableEntry {
    action: char,
    cooperators: usize,
    p: f64,
}

#[derive(Debug, Serialize)]
struct SynthReport {
    players: usize,
    leaders: usize,
    alliance: usize,
    r: f64,
    chi: f64,
    l: f64,
    l_range: (f64, f64),
    phi: f64,
    phi_interval: PhiInterval,
    opposite_interval: Option<PhiInterval>,
    /// Reward and punishment available against a single outsider.
    menu: Option<(f64, f64)>,
    f: Vec<FEntry>,
    table: Vec<TableEntry>,
    residual: f64,
}

/// Add the feasible `l` range to an infeasibility message.
fn explain_infeasible(params: &ZdParams, e: zdlab::Error) -> CliError {
    let err = CliError::from(e);
    match (err, feasible_l_range(params.chi, &params.shape)) {
        (CliError::Infeasible(msg), Ok((lo, hi))) if params.l < lo || params.l > hi => {
            let bound = if params.l < lo { format!("l_min = {lo}") } else { format!("l_max = {hi}") };
            CliError::Infeasible(format!("{msg} (l = {} violates {bound}; feasible range [{lo}, {hi}])", params.l))
        }
        (err, _) => err,
    }
}

fn synth<W: Write>(a: &SynthArgs, out: &mut W) -> Result<(), CliError> {
    let params = a.shape.params()?;
    let shape = params.shape;
    let result = synthesize(&params, &payoff_vectors(&shape)).map_err(|e| explain_infeasible(&params, e))?;
    let report = SynthReport {
        players: shape.players(),
        leaders: shape.leaders(),
        alliance: shape.alliance(),
        r: shape.r(),
        chi: params.chi,
        l: params.l,
        l_range: feasible_l_range(params.chi, &shape)?,
        phi: result.phi,
        phi_interval: result.phi_interval,
        opposite_interval: result.opposite_interval,
        menu: (shape.outsiders() == 1).then(|| incentive_menu(shape.alliance(), shape.r()).ok()).flatten(),
        f: shape
            .states()
            .map(|s: State| FEntry { state: s.label(shape.players()), f: result.f_vector[s.index()] })
            .collect(),
        table: result
            .unison_table()
            .into_iter()
            .map(|(s, b, p)| TableEntry { action: s.symbol(), cooperators: b, p })
            .collect(),
        residual: result.certificate,
    };
    if a.json {
        return json(&report, out);
    }
    let w = |out: &mut W, s: String| writeln!(out, "{s}").map_err(CliError::io);
    w(out, format!("shape     N = {}, leaders = {}, alliance = {}, r = {}", report.players, report.leaders, report.alliance, report.r))?;
    w(out, format!("relation  pi_outsiders = {} * pi_alliance + {} * {}", report.chi, 1.0 - report.chi, report.l))?;
    w(out, format!("l range   [{}, {}]", report.l_range.0, report.l_range.1))?;
    w(out, format!("phi       {} in [{}, {}]", report.phi, report.phi_interval.lower, report.phi_interval.upper))?;
    if let Some((reward, punish)) = report.menu {
        w(out, format!("menu      reward {reward}, punishment {punish}"))?;
    }
    w(out, "f".into())?;
    for e in &report.f {
        w(out, format!("  {}  {:+.6}", e.state, e.f))?;
    }
    w(out, "strategy (alliance action, cooperators last round -> p(cooperate))".into())?;
    for e in &report.table {
        w(out, format!("  {} {}  {:.6}", e.action, e.cooperators, e.p))?;
    }
    w(out, format!("residual  {:.3e}", report.residual))
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    draws: usize,
    max_residual: f64,
    residuals: Vec<f64>,
}

fn verify<W: Write>(a: &VerifyArgs, out: &mut W) -> Result<(), CliError> {
    let params = a.shape.params()?;
    let shape = params.shape;
    let result = synthesize(&params, &payoff_vectors(&shape)).map_err(|e| explain_infeasible(&params, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let residuals = (0..a.draws)
        .map(|_| {
            let outsiders = OutsiderProfile::random(&shape, &mut rng)?;
            Ok(verify_enforcement(&result, &outsiders)?.residual)
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let report = VerifyReport { draws: a.draws, max_residual, residuals };
    if a.json {
        json(&report, out)?;
    } else {
        writeln!(out, "draws {}  max residual {:.3e}  tolerance {:.1e}", a.draws, max_residual, a.tolerance).map_err(CliError::io)?;
    }
    if max_residual > a.tolerance {
        return Err(CliError::Runtime(format!("residual {max_residual:e} exceeds tolerance {:e}", a.tolerance)));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FieldReport {
    nodes: usize,
    zd_set: Vec<usize>,
    objective: f64,
    mean_regular: f64,
    expected_ratio: f64,
    monte_carlo_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct NodeRow {
    node: usize,
    zd: bool,
    zd_neighbors: usize,
    has_regular_neighbors: bool,
    delta: f64,
    q: f64,
}

fn field<W: Write>(a: &FieldArgs, out: &mut W) -> Result<(), CliError> {
    let g = a.graph.load(a.seed)?;
    let dep = Deployment::new(&g, &a.zd, a.scale.scale()?)?;
    let result = evaluate(&dep);
    let monte_carlo_ratio = match a.mode {
        ModeArg::Expected => None,
        ModeArg::MonteCarlo => Some(cooperator_ratio(&dep, RatioMode::MonteCarlo { rounds: a.rounds }, a.seed)?),
    };
    let report = FieldReport {
        nodes: g.node_count(),
        zd_set: dep.zd_set().to_vec(),
        objective: result.objective,
        mean_regular: result.mean_regular,
        expected_ratio: cooperator_ratio(&dep, RatioMode::Expected, a.seed)?,
        monte_carlo_ratio,
    };
    if let Some(path) = &a.nodes {
        let rows: Vec<NodeRow> = result
            .nodes
            .iter()
            .enumerate()
            .map(|(node, n)| NodeRow {
                node,
                zd: n.zd,
                zd_neighbors: n.zd_neighbors,
                has_regular_neighbors: n.has_regular_neighbors,
                delta: n.delta,
                q: n.q,
            })
            .collect();
        write_csv(&rows, create(path)?)?;
    }
    if a.json {
        return json(&report, out);
    }
    writeln!(out, "objective       {:.6}", report.objective).map_err(CliError::io)?;
    writeln!(out, "mean regular q  {:.6}", report.mean_regular).map_err(CliError::io)?;
    writeln!(out, "expected ratio  {:.6}", report.expected_ratio).map_err(CliError::io)?;
    if let Some(mc) = report.monte_carlo_ratio {
        writeln!(out, "sampled ratio   {mc:.6}").map_err(CliError::io)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct OptReport {
    k: usize,
    method: &'static str,
    zd_set: Vec<usize>,
    objective: f64,
    mean_regular: f64,
    history: Option<Vec<f64>>,
}

fn opt<W: Write>(a: &OptArgs, out: &mut W) -> Result<(), CliError> {
    let g = a.graph.load(a.seed)?;
    let scale = a.scale.scale()?;
    let (method, placement, history) = if a.exhaustive {
        ("exhaustive", optimize_exhaustive(&g, a.k, &scale, DEFAULT_EXHAUSTIVE_CAP)?, None)
    } else {
        let cfg = GaConfig { population_size: a.population, generations: a.generations, ..GaConfig::default() }.with_seed(a.seed);
        let outcome = optimize_ga(&g, a.k, &scale, &cfg)?;
        ("ga", outcome.best, Some(outcome.history))
    };
    let regular = g.node_count() - a.k;
    let mean_regular = if regular == 0 { 0.0 } else { placement.objective / regular as f64 };
    let report = OptReport { k: a.k, method, zd_set: placement.zd_set, objective: placement.objective, mean_regular, history };
    if a.json {
        return json(&report, out);
    }
    let ids = report.zd_set.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(",");
    writeln!(out, "method      {}", report.method).map_err(CliError::io)?;
    writeln!(out, "zd set      {ids}").map_err(CliError::io)?;
    writeln!(out, "objective   {:.6}", report.objective).map_err(CliError::io)?;
    writeln!(out, "mean reg q  {:.6}", report.mean_regular).map_err(CliError::io)
}

fn sweep<W: Write>(a: &SweepArgs, out: &mut W) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = a.repetitions {
        cfg.repetitions = reps;
    }
    if let Some(path) = &a.output {
        cfg.output = Some(path.clone());
    }
    let table = run_sweep(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let summary = write_outputs(&table, path)?;
            writeln!(out, "wrote {} rows to {} and {}", table.rows.len(), path.display(), summary.display()).map_err(CliError::io)?;
        }
        None => write_csv(&table.summary, &mut *out)?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricRow {
    node: usize,
    degree: usize,
    betweenness: f64,
}

fn metrics<W: Write>(a: &MetricsArgs, out: &mut W) -> Result<(), CliError> {
    let g = a.graph.load(a.seed)?;
    let stats = degree_stats(&g);
    let bc = betweenness(&g);
    let mean_bc = if bc.is_empty() { 0.0 } else { bc.iter().sum::<f64>() / bc.len() as f64 };
    writeln!(out, "nodes {}  edges {}  mean degree {:.4}  mean betweenness {:.4}", g.node_count(), g.edge_count(), stats.mean, mean_bc)
        .map_err(CliError::io)?;
    if let Some(path) = &a.out {
        let rows: Vec<MetricRow> = (0..g.node_count())
            .map(|node| MetricRow { node, degree: stats.degrees[node], betweenness: bc[node] })
            .collect();
        write_csv(&rows, create(path)?)?;
    }
    Ok(())
}
