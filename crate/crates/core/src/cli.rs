//! `geodiam` command line: generation, diameters, property reports and
//! benchmark grids.
//!
//! Option precedence is flags, then the `--config` TOML file, then defaults.
//! Exit codes: 0 success, 1 usage, 2 disconnected input, 3 budget exceeded,
//! 4 IO or parse failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diameter::{
    decide, framework_diameter, DecideOptions, DiameterConfig, DiameterError, LeafLevel, Outcome, SearchStrategy,
    StopRule, FRAMEWORK_C_LEAF,
};
use crate::geometry::SpaceKind;
use crate::graph::{naive_diameter_counted, GeometricGraph};
use crate::graphgen::{read_graph, sample_rgg, write_graph_to, GenError, ParseError, RggParams};
use crate::ifub::{ifub, CenterStrategy};
use crate::oracle::{DistanceOracle, OracleError};
use crate::partition::induce_partition;
use crate::propcheck::{self, DistanceMatrix, PropError, PropertyReport, Sample};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DISCONNECTED: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Property ids accepted by `--properties`.
pub const PROPERTY_IDS: [&str; 7] = ["1", "2", "3", "4", "5", "stretch", "concentration"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("graph is disconnected; component representatives: {}", join(.0, " "))]
    Disconnected(Vec<usize>),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Internal(_) => EXIT_USAGE,
            CliError::Disconnected(_) => EXIT_DISCONNECTED,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PropError> for CliError {
    fn from(e: PropError) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<DiameterError> for CliError {
    fn from(e: DiameterError) -> Self {
        match e {
            DiameterError::Graph(crate::graph::GraphError::Disconnected { a, b }) => CliError::Disconnected(vec![a, b]),
            DiameterError::BudgetCap { .. } | DiameterError::Oracle(OracleError::TooLarge { .. }) => {
                CliError::Budget(e.to_string())
            }
            DiameterError::InvalidK { .. } | DiameterError::InvalidGuess => CliError::Usage(e.to_string()),
            DiameterError::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Framework,
    Ifub,
    Naive,
}

impl Algo {
    fn as_str(self) -> &'static str {
        match self {
            Algo::Framework => "framework",
            Algo::Ifub => "ifub",
            Algo::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

fn parse_strategy(s: &str) -> Result<SearchStrategy, String> {
    match s {
        "refined" => Ok(SearchStrategy::Refined),
        "size-doubling" | "size_doubling" => Ok(SearchStrategy::SizeDoubling),
        other => Err(format!("unknown strategy `{other}` (expected refined or size-doubling)")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "geodiam", version, about = "Exact diameters of random geometric graphs")]
pub struct Cli {
    /// TOML file supplying defaults for any option below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random geometric graph and write it in the text format.
    Generate(Opts),
    /// Compute the exact diameter.
    Diameter(Opts),
    /// Write a property report as CSV.
    Properties(Opts),
    /// Run a grid of instances and algorithms and write one CSV row each.
    Bench(Opts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Diameter(_) => "diameter",
            Command::Properties(_) => "properties",
            Command::Bench(_) => "bench",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Generate(o) | Command::Diameter(o) | Command::Properties(o) | Command::Bench(o) => o,
        }
    }
}

/// Flags shared by every subcommand. List-valued flags take comma
/// separated values; only `bench` accepts more than one value.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Graph file to read instead of generating one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Radius exponent: r = n^rho, with 0 < rho < 1/2.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// Explicit connection radius, overriding rho.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub kind: Option<Vec<SpaceKind>>,
    #[arg(long, value_delimiter = ',')]
    pub seed: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub algo: Option<Vec<Algo>>,
    /// Quadtree leaf level; default picks cells of side at least c-leaf · r.
    #[arg(long)]
    pub leaf_level: Option<u32>,
    #[arg(long)]
    pub c_leaf: Option<f64>,
    /// Fixed block size limit for every decide call.
    #[arg(long)]
    pub k: Option<usize>,
    /// Run a single decide call with this guess instead of the full search.
    #[arg(long)]
    pub ell: Option<u32>,
    /// Largest work budget before giving up.
    #[arg(long)]
    pub budget_cap: Option<u64>,
    /// refined or size-doubling.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<SearchStrategy>,
    /// Fixed iFUB center; default is a double sweep from vertex 0.
    #[arg(long)]
    pub center: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Property ids: 1,2,3,4,5,stretch,concentration.
    #[arg(long, value_delimiter = ',')]
    pub properties: Option<Vec<String>>,
    /// Sampled vertices for per-vertex measurements.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampled pairs for stretch measurements.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<u32>>,
    /// Ball radii for fragmentation.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<u32>>,
    /// Concurrent bench cells.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Options as read from a config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    input: Option<PathBuf>,
    n: Option<Vec<usize>>,
    rho: Option<Vec<f64>>,
    r: Option<f64>,
    kind: Option<Vec<SpaceKind>>,
    seed: Option<Vec<u64>>,
    algo: Option<Vec<Algo>>,
    leaf_level: Option<u32>,
    c_leaf: Option<f64>,
    k: Option<usize>,
    ell: Option<u32>,
    budget_cap: Option<u64>,
    strategy: Option<SearchStrategy>,
    center: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
    properties: Option<Vec<String>>,
    samples: Option<usize>,
    pairs: Option<usize>,
    x_grid: Option<Vec<u32>>,
    radii: Option<Vec<u32>>,
    jobs: Option<usize>,
}

/// Fully resolved options.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub n: Vec<usize>,
    pub rho: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub kind: Vec<SpaceKind>,
    pub seed: Vec<u64>,
    pub algo: Vec<Algo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_level: Option<u32>,
    pub c_leaf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_cap: Option<u64>,
    pub strategy: SearchStrategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub properties: Vec<String>,
    pub samples: usize,
    pub pairs: usize,
    pub x_grid: Vec<u32>,
    pub radii: Vec<u32>,
    pub jobs: usize,
}

/// Whether any generation parameter was given explicitly.
fn has_generation_params(o: &Opts, f: &FileConfig) -> bool {
    o.n.is_some()
        || o.rho.is_some()
        || o.r.is_some()
        || o.kind.is_some()
        || f.n.is_some()
        || f.rho.is_some()
        || f.r.is_some()
        || f.kind.is_some()
}

impl RunConfig {
    pub fn resolve(command: &str, o: &Opts, f: FileConfig) -> Result<Self, CliError> {
        let structured = matches!(command, "properties" | "bench");
        let input = o.input.clone().or(f.input.clone());
        if input.is_some() && has_generation_params(o, &f) {
            return Err(CliError::Usage("give either --input or generation parameters, not both".into()));
        }
        if input.is_some() && command == "generate" {
            return Err(CliError::Usage("generate does not read an input graph".into()));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            input,
            n: o.n.clone().or(f.n).unwrap_or_else(|| vec![1000]),
            rho: o.rho.clone().or(f.rho).unwrap_or_else(|| vec![0.3]),
            r: o.r.or(f.r),
            kind: o.kind.clone().or(f.kind).unwrap_or_else(|| vec![SpaceKind::Square]),
            seed: o.seed.clone().or(f.seed).unwrap_or_else(|| vec![0]),
            algo: o.algo.clone().or(f.algo).unwrap_or_else(|| vec![Algo::Framework]),
            leaf_level: o.leaf_level.or(f.leaf_level),
            c_leaf: o.c_leaf.or(f.c_leaf).unwrap_or(FRAMEWORK_C_LEAF),
            k: o.k.or(f.k),
            ell: o.ell.or(f.ell),
            budget_cap: o.budget_cap.or(f.budget_cap),
            strategy: o.strategy.or(f.strategy).unwrap_or(SearchStrategy::Refined),
            center: o.center.or(f.center),
            format: o.format.or(f.format).unwrap_or(if structured { Format::Csv } else { Format::Text }),
            out: o.out.clone().or(f.out),
            properties: o
                .properties
                .clone()
                .or(f.properties)
                .unwrap_or_else(|| ["1", "2", "3", "4", "5", "stretch"].map(String::from).to_vec()),
            samples: o.samples.or(f.samples).unwrap_or(50),
            pairs: o.pairs.or(f.pairs).unwrap_or(10_000),
            x_grid: o.x_grid.clone().or(f.x_grid).unwrap_or_else(|| vec![1, 2, 4, 8]),
            radii: o.radii.clone().or(f.radii).unwrap_or_else(|| vec![2, 4, 8, 16]),
            jobs: o.jobs.or(f.jobs).unwrap_or(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.command != "bench" {
            for (name, len) in [
                ("n", self.n.len()),
                ("rho", self.rho.len()),
                ("kind", self.kind.len()),
                ("seed", self.seed.len()),
                ("algo", self.algo.len()),
            ] {
                if len != 1 {
                    return usage(format!("--{name} takes a single value for {}", self.command));
                }
            }
        }
        if [self.n.len(), self.rho.len(), self.kind.len(), self.seed.len(), self.algo.len()].contains(&0) {
            return usage("list options must not be empty".into());
        }
        if !(self.c_leaf.is_finite() && self.c_leaf > 0.0) {
            return usage(format!("--c-leaf must be positive, got {}", self.c_leaf));
        }
        if self.ell == Some(0) {
            return usage("--ell must be at least 1".into());
        }
        if self.jobs == 0 {
            return usage("--jobs must be at least 1".into());
        }
        if let Some(bad) = self.properties.iter().find(|p| !PROPERTY_IDS.contains(&p.as_str())) {
            return usage(format!("unknown property `{bad}` (expected one of {})", PROPERTY_IDS.join(",")));
        }
        Ok(())
    }

    fn params(&self, n: usize, rho: f64, kind: SpaceKind, seed: u64) -> RggParams {
        match self.r {
            Some(r) => RggParams::with_radius(n, r, kind, seed),
            None => RggParams::with_exponent(n, rho, kind, seed),
        }
    }

    /// The single input graph, and its seed when generated.
    fn graph(&self) -> Result<(GeometricGraph, Option<u64>), CliError> {
        match &self.input {
            Some(path) => Ok((read_graph(path)?, None)),
            None => {
                let p = self.params(self.n[0], self.rho[0], self.kind[0], self.seed[0]);
                Ok((sample_rgg(&p)?, Some(self.seed[0])))
            }
        }
    }

    fn leaf_level(&self) -> LeafLevel {
        match self.leaf_level {
            Some(l) => LeafLevel::Fixed(l),
            None => LeafLevel::Auto { c_leaf: self.c_leaf },
        }
    }

    fn diameter_config(&self) -> DiameterConfig {
        DiameterConfig {
            leaf_level: self.leaf_level(),
            strategy: self.strategy,
            fixed_k: self.k,
            budget_cap: self.budget_cap,
            ..Default::default()
        }
    }
}

/// Runs the CLI with the given arguments. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(cli.command.name(), cli.command.opts(), file)?;
    if cli.dump_config {
        let text = toml::to_string(&cfg).map_err(|e| CliError::Internal(e.to_string()))?;
        stdout.write_all(text.as_bytes())?;
        return Ok(());
    }
    match &cli.command {
        Command::Generate(_) => cmd_generate(&cfg, stdout, stderr),
        Command::Diameter(_) => cmd_diameter(&cfg, stdout),
        Command::Properties(_) => cmd_properties(&cfg, stdout),
        Command::Bench(_) => cmd_bench(&cfg, stdout),
    }
}

/// Writes to `--out` when given, else to `stdout`.
fn with_output(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

pub fn cmd_generate(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (g, _) = cfg.graph()?;
    with_output(cfg, stdout, |w| Ok(write_graph_to(&g, w)?))?;
    let summary =
        format!("n {} m {} avg_degree {:.3} connected {}\n", g.n(), g.m(), g.average_degree(), g.is_connected());
    // Keep stdout clean when it carries the graph itself.
    if cfg.out.is_some() {
        stdout.write_all(summary.as_bytes())?;
    } else {
        stderr.write_all(summary.as_bytes())?;
    }
    Ok(())
}

/// Ordered key/value report printed as text, CSV or JSON.
#[derive(Debug, Default)]
struct Fields(Vec<(&'static str, Value)>);

impl Fields {
    fn put(&mut self, key: &'static str, v: impl Into<Value>) {
        self.0.push((key, v.into()));
    }

    fn write(&self, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
        let plain = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => "-".into(),
            other => other.to_string(),
        };
        match format {
            Format::Text => {
                for (k, v) in &self.0 {
                    writeln!(w, "{k} {}", plain(v))?;
                }
            }
            Format::Csv => {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(self.0.iter().map(|(k, _)| *k))?;
                out.write_record(self.0.iter().map(|(_, v)| plain(v)))?;
                out.flush()?;
            }
            Format::Json => {
                let obj: serde_json::Map<String, Value> =
                    self.0.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                writeln!(w, "{}", serde_json::to_string_pretty(&Value::Object(obj)).unwrap_or_default())?;
            }
        }
        Ok(())
    }
}

pub fn cmd_diameter(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (g, _) = cfg.graph()?;
    let reps = g.component_representatives();
    if reps.len() > 1 {
        return Err(CliError::Disconnected(reps));
    }
    if g.n() == 0 {
        return Err(CliError::Usage("graph has no vertices".into()));
    }
    let algo = cfg.algo[0];
    let mut f = Fields::default();
    let mut timed_out = false;
    match algo {
        Algo::Naive => {
            let (d, work) = naive_diameter_counted(&g).map_err(DiameterError::from)?;
            f.put("diameter", d);
            f.put("algo", algo.as_str());
            f.put("work", work);
        }
        Algo::Ifub => {
            let strategy = match cfg.center {
                Some(c) if c >= g.n() => {
                    return Err(CliError::Usage(format!("--center {c} out of range (n = {})", g.n())))
                }
                Some(c) => CenterStrategy::Fixed(c),
                None => CenterStrategy::TwoSweep(0),
            };
            let (d, t) = ifub(&g, strategy).map_err(DiameterError::from)?;
            f.put("diameter", d);
            f.put("algo", algo.as_str());
            f.put("center", t.center);
            f.put("fringe_bfs", t.fringe_bfs);
            f.put("total_bfs", t.total_bfs);
            f.put("explored_fraction", t.explored_fraction());
            f.put("work", t.work);
        }
        Algo::Framework => match cfg.ell {
            Some(ell) => timed_out = single_decide(cfg, &g, ell, &mut f)?,
            None => {
                let r = framework_diameter(&g, &cfg.diameter_config())?;
                f.put("diameter", r.diameter);
                f.put("algo", algo.as_str());
                f.put("leaf_level", r.leaf_level);
                f.put("max_leaf_size", r.max_leaf_size);
                f.put("k", r.k.map_or(Value::String("auto".into()), Value::from));
                let last = r.final_call();
                f.put("candidate_pairs", last.map_or(0, |c| c.stats.candidate_pairs));
                f.put("owning_blocks", last.map_or(0, |c| c.stats.owning_blocks));
                f.put("max_candidates_per_block", last.map_or(0, |c| c.stats.max_candidates_per_block));
                f.put("candidates_per_depth", last.map_or(String::new(), |c| join(&c.stats.candidates_per_depth, ",")));
                f.put("direct_pairs", r.direct_pairs());
                f.put("overlay_pairs", r.overlay_pairs());
                f.put("decide_calls", r.calls.len());
                f.put("final_budget", r.final_budget);
                f.put("oracle_entries", r.oracle_entries);
                f.put("oracle_work", r.oracle_work);
                f.put("decide_work", r.decide_work);
                f.put("work", r.total_work);
            }
        },
    }
    with_output(cfg, stdout, |w| f.write(cfg.format, w))?;
    if timed_out {
        return Err(CliError::Budget(format!(
            "decide with guess {} exceeded the budget cap {}",
            cfg.ell.unwrap_or(0),
            cfg.budget_cap.unwrap_or(0)
        )));
    }
    Ok(())
}

/// One `decide` call. Returns whether it timed out.
fn single_decide(cfg: &RunConfig, g: &GeometricGraph, ell: u32, f: &mut Fields) -> Result<bool, CliError> {
    let level = cfg.leaf_level().resolve(g);
    let o = DistanceOracle::build(g, induce_partition(g, level)).map_err(DiameterError::from)?;
    let stop = cfg.k.map_or(StopRule::CostModel, StopRule::TargetSize);
    let opts = DecideOptions { stop, budget: cfg.budget_cap, record_pruned: false };
    let v = decide(g, &o, ell, &opts)?;
    f.put("algo", "framework");
    f.put("ell", ell);
    f.put("leaf_level", level);
    f.put("k", cfg.k.map_or(Value::String("auto".into()), Value::from));
    match v.outcome {
        Outcome::Less { lower, upper } => {
            f.put("outcome", "less");
            f.put("lower", lower);
            f.put("upper", upper);
        }
        Outcome::EqualOrGreater(m) => {
            f.put("outcome", "equal_or_greater");
            f.put("diameter", m);
        }
        Outcome::Timeout => f.put("outcome", "timeout"),
    }
    f.put("candidate_pairs", v.stats.candidate_pairs);
    f.put("owning_blocks", v.stats.owning_blocks);
    f.put("candidates_per_depth", join(&v.stats.candidates_per_depth, ","));
    f.put("direct_pairs", v.stats.direct);
    f.put("overlay_pairs", v.stats.overlay);
    f.put("oracle_work", o.build_work());
    f.put("work", v.work);
    Ok(v.outcome == Outcome::Timeout)
}

pub fn cmd_properties(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (g, seed) = cfg.graph()?;
    let sample = Sample::of(&g, seed);
    let wants = |id: &str| cfg.properties.iter().any(|p| p == id);
    let seed = seed.unwrap_or(0);
    let mut rep = PropertyReport::new();

    if wants("stretch") {
        rep.add_lower_stretch(&sample, &propcheck::check_lower_stretch(&g, cfg.pairs, seed));
        rep.add_upper_stretch(&sample, &propcheck::measure_upper_stretch(&g, cfg.pairs, seed));
    }
    if wants("1") || wants("2") {
        let dm = DistanceMatrix::compute(&g)?;
        if wants("1") {
            let m = propcheck::measure_local_partners(&g, &dm, &cfg.x_grid, cfg.samples, seed);
            rep.add_local_partners(&sample, &m);
        }
        if wants("2") {
            rep.add_few_corners(&sample, &propcheck::measure_few_corners(&g, &dm, &cfg.x_grid));
        }
    }
    if ["3", "4", "5", "concentration"].iter().any(|id| wants(id)) {
        let p = induce_partition(&g, cfg.leaf_level().resolve(&g));
        if wants("3") {
            rep.add_separators(&sample, &p);
        }
        if wants("4") || wants("5") {
            let diams = propcheck::block_diameters(&g, &p)?;
            if wants("4") {
                rep.add_size_diameters(&sample, &propcheck::check_size_dependent_diameters(&g, &p, &diams));
            }
            if wants("5") {
                let m = propcheck::measure_fragmentation(&g, &p, &diams, &cfg.radii, cfg.samples, seed);
                rep.add_fragmentation(&sample, &m);
            }
        }
        if wants("concentration") {
            rep.add_concentration(&sample, &propcheck::check_block_concentration(&g, &p));
        }
    }
    with_output(cfg, stdout, |w| match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &rep.rows).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        }
        _ => Ok(rep.write_csv(w)?),
    })
}

/// One bench CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub schema: u32,
    pub n: usize,
    pub rho: f64,
    pub r: f64,
    pub kind: SpaceKind,
    pub seed: u64,
    pub algo: Algo,
    /// `ok`, `disconnected`, `invalid` or `budget`.
    pub status: String,
    pub m: usize,
    pub diameter: Option<u32>,
    pub work: Option<u64>,
    /// `n · m`.
    pub nm_proxy: u64,
    /// `work / nm_proxy`.
    pub ratio: Option<f64>,
    pub fringe_bfs: Option<usize>,
    /// Informational only.
    pub wall_ms: f64,
}

/// Runs one algorithm on one instance.
pub fn bench_cell(g: &GeometricGraph, params: &RggParams, rho: f64, algo: Algo, dcfg: &DiameterConfig) -> BenchRow {
    let nm_proxy = (g.n() as u64) * (g.m() as u64);
    let mut row = BenchRow {
        schema: propcheck::SCHEMA,
        n: params.n,
        rho,
        r: params.r(),
        kind: params.kind,
        seed: params.seed,
        algo,
        status: "ok".into(),
        m: g.m(),
        diameter: None,
        work: None,
        nm_proxy,
        ratio: None,
        fringe_bfs: None,
        wall_ms: 0.0,
    };
    if !g.is_connected() {
        row.status = "disconnected".into();
        return row;
    }
    let start = Instant::now();
    let result: Result<(u32, u64), DiameterError> = match algo {
        Algo::Naive => naive_diameter_counted(g).map_err(Into::into),
        Algo::Ifub => ifub(g, CenterStrategy::TwoSweep(0)).map_err(Into::into).map(|(d, t)| {
            row.fringe_bfs = Some(t.fringe_bfs);
            (d, t.work)
        }),
        Algo::Framework => framework_diameter(g, dcfg).map(|r| (r.diameter, r.total_work)),
    };
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok((d, work)) => {
            row.diameter = Some(d);
            row.work = Some(work);
            row.ratio = Some(work as f64 / nm_proxy.max(1) as f64);
        }
        Err(DiameterError::BudgetCap { .. }) => row.status = "budget".into(),
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// All rows of a bench grid in grid order: n, rho, kind, seed, then algo.
pub fn bench_rows(cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    let mut instances = Vec::new();
    for &n in &cfg.n {
        for &rho in &cfg.rho {
            for &kind in &cfg.kind {
                for &seed in &cfg.seed {
                    instances.push((rho, cfg.params(n, rho, kind, seed)));
                }
            }
        }
    }
    let dcfg = cfg.diameter_config();
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(|e| CliError::Internal(e.to_string()))?;
    let rows: Vec<Vec<BenchRow>> = pool.install(|| {
        instances
            .par_iter()
            .map(|(rho, params)| match sample_rgg(params) {
                Ok(g) => cfg.algo.iter().map(|&a| bench_cell(&g, params, *rho, a, &dcfg)).collect(),
                Err(e) => cfg
                    .algo
                    .iter()
                    .map(|&algo| BenchRow {
                        schema: propcheck::SCHEMA,
                        n: params.n,
                        rho: *rho,
                        r: params.r(),
                        kind: params.kind,
                        seed: params.seed,
                        algo,
                        status: format!("invalid: {e}"),
                        m: 0,
                        diameter: None,
                        work: None,
                        nm_proxy: 0,
                        ratio: None,
                        fringe_bfs: None,
                        wall_ms: 0.0,
                    })
                    .collect(),
            })
            .collect()
    });
    Ok(rows.into_iter().flatten().collect())
}

pub fn cmd_bench(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    if cfg.input.is_some() {
        return Err(CliError::Usage("bench generates its own instances; drop --input".into()));
    }
    let rows = bench_rows(cfg)?;
    with_output(cfg, stdout, |w| match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &rows).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        }
        _ => {
            let mut out = csv::Writer::from_writer(w);
            for row in &rows {
                out.serialize(row)?;
            }
            out.flush()?;
            Ok(())
        }
    })
}
