//! Command-line front end: `check`, `dump` and `table`.
//!
//! Exit codes: 0 when every applicable check passes, 1 when one fails or a
//! computation breaks down, 2 for usage, configuration and cap errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fmodel::{format_matrix, FModel};
use crate::linalg::Mat;
use crate::suites::{parse_suites, run_suite, Suite, SuiteContext, SuiteReport, Tolerances};
use crate::tlrep::{Category, LevelCaps};
use crate::verify::write_csv;
use crate::walk::{eta_sequence, green_table, GreenFunction, WalkMeasure};

pub const TOOL: &str = "qgroup-lab";
pub const DEFAULT_SEED: u64 = 20_240_531;
pub const DEFAULT_TRUNCATION: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "qgroup-lab", version, about = "Numerical checks for free orthogonal quantum groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and report pass/fail.
    Check(CommonArgs),
    /// Write a matrix (Jones-Wenzl projector, intertwiner, invariant vector).
    Dump(DumpArgs),
    /// Write a CSV table (Green function, ratio sequences, suite report).
    Table(TableArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// F matrix: identity:n, suq:q:±, or file:path
    #[arg(long = "F", value_name = "SPEC")]
    pub fspec: Option<String>,
    /// Suites to run (algebra, boundary, walk, spectral, appendix, all);
    /// repeatable or comma-separated.
    #[arg(long)]
    pub suite: Vec<String>,
    #[arg(long)]
    pub max_level: Option<usize>,
    /// Truncation level of the walk.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Tolerance override, name=value; repeatable.
    #[arg(long, value_name = "NAME=VAL")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpKind {
    JonesWenzl,
    Intertwiner,
    TVector,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(value_enum)]
    pub what: DumpKind,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Level `k` of the projector or of the invariant vector.
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = 1)]
    pub a: usize,
    #[arg(long, default_value_t = 1)]
    pub b: usize,
    #[arg(long, default_value_t = 0)]
    pub z: usize,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Green,
    Ratio,
    Report,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub what: TableKind,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of rows for green and ratio tables.
    #[arg(long, default_value_t = 40)]
    pub rows: usize,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(alias = "F")]
    pub fspec: Option<String>,
    #[serde(alias = "suite")]
    pub suites: Option<Vec<String>>,
    pub max_level: Option<usize>,
    #[serde(alias = "trunc")]
    pub walk_truncation: Option<usize>,
    #[serde(alias = "tol")]
    pub tolerances: Option<BTreeMap<String, f64>>,
    pub seed: Option<u64>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub fspec: String,
    pub suites: Vec<Suite>,
    pub max_level: usize,
    pub walk_truncation: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

/// Largest `--max-level` accepted for matrices of size `n`.
pub fn hard_level_limit(n: usize) -> usize {
    match n {
        0..=2 => 18,
        3 => 8,
        4 => 6,
        _ => 4,
    }
}

/// Default level cap: generous for `n = 2`, where the appendix grid needs
/// level 18, and the tlrep default otherwise.
pub fn default_level(n: usize) -> usize {
    if n <= 2 {
        hard_level_limit(n)
    } else {
        LevelCaps::default_for(n).max_level
    }
}

impl RunConfig {
    /// Merges the config file (if any) with the flags; flags win.
    pub fn resolve(args: &CommonArgs) -> Result<(Self, FModel)> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let fspec = args
            .fspec
            .clone()
            .or(file.fspec)
            .ok_or_else(|| Error::Config("no F matrix given (use --F)".into()))?;
        let model = FModel::canonical(&fspec)?;
        let suite_names =
            if args.suite.is_empty() { file.suites.unwrap_or_else(|| vec!["all".into()]) } else { args.suite.clone() };
        let suites = parse_suites(&suite_names)?.into_iter().collect();

        let limit = hard_level_limit(model.n());
        let max_level = args.max_level.or(file.max_level).unwrap_or(default_level(model.n()));
        if max_level > limit {
            return Err(Error::Config(format!(
                "--max-level {max_level} exceeds the limit {limit} for n = {}",
                model.n()
            )));
        }
        if max_level < 2 {
            return Err(Error::Config("--max-level must be at least 2".into()));
        }
        let walk_truncation = args.trunc.or(file.walk_truncation).unwrap_or(DEFAULT_TRUNCATION);
        if walk_truncation < 40 {
            return Err(Error::Config("--trunc must be at least 40".into()));
        }

        let mut tolerances = Tolerances::default();
        for (name, value) in file.tolerances.unwrap_or_default() {
            tolerances.set(&name, value)?;
        }
        for pair in &args.tol {
            tolerances.set_pair(pair)?;
        }
        if matches!(args.jobs.or(file.jobs), Some(0)) {
            return Err(Error::Config("--jobs must be positive".into()));
        }

        let config = RunConfig {
            fspec,
            suites,
            max_level,
            walk_truncation,
            tolerances,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            report: args.report.clone().or(file.report),
            csv: args.csv.clone().or(file.csv),
            jobs: args.jobs.or(file.jobs),
        };
        Ok((config, model))
    }

    pub fn category(&self, model: FModel) -> Category {
        let caps = LevelCaps::default_for(model.n()).with_max_level(self.max_level);
        Category::with_caps(model, caps)
    }
}

/// Result of `check`: the resolved configuration and one report per suite.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: RunConfig,
    pub model: FModel,
    pub reports: Vec<SuiteReport>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// The deterministic part of the JSON report.
    pub fn body(&self) -> Value {
        json!({
            "config": self.config,
            "fmodel": self.model.summary(),
            "hypotheses": self.model.hypotheses(),
            "suites": self.reports,
            "pass": self.pass(),
        })
    }
}

pub fn run_checks(config: RunConfig, model: FModel) -> Result<Outcome> {
    let mut ctx = SuiteContext::new(config.category(model.clone()), config.walk_truncation, config.seed);
    ctx.tol = config.tolerances.clone();
    let reports = config
        .suites
        .iter()
        .map(|&suite| run_suite(&ctx, suite))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome { config, model, reports })
}

/// Renders the full report: a header with the timestamp, then the body.
pub fn render_report(outcome: &Outcome) -> Result<String> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let header = json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": stamp,
    });
    #[derive(Serialize)]
    struct Report {
        header: Value,
        body: Value,
    }
    let mut text = serde_json::to_string_pretty(&Report { header, body: outcome.body() })?;
    text.push('\n');
    Ok(text)
}

/// Extracts the body of a rendered report, for comparisons across runs.
pub fn report_body(text: &str) -> Result<String> {
    let value: Value = serde_json::from_str(text)?;
    let body = value
        .get("body")
        .ok_or_else(|| Error::Config("report has no body".into()))?;
    Ok(serde_json::to_string_pretty(body)?)
}

/// Writes the CSV for a `check` run: the Green table when the walk suite ran,
/// otherwise the appendix rows, otherwise one row per check.
pub fn write_outcome_csv<W: Write>(outcome: &Outcome, out: W) -> Result<()> {
    if let Some(walk) = outcome.reports.iter().find(|r| r.suite == Suite::Walk) {
        let mut w = csv::Writer::from_writer(out);
        for row in &walk.green_table {
            w.serialize(row)?;
        }
        w.flush()?;
        return Ok(());
    }
    if let Some(app) = outcome.reports.iter().find(|r| r.suite == Suite::Appendix) {
        return write_csv(&app.appendix, out);
    }
    write_checks_csv(&outcome.reports, out)
}

pub fn write_checks_csv<W: Write>(reports: &[SuiteReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["suite", "check", "measured", "limit", "pass", "applicable"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.suite.name().to_string(),
                c.name.clone(),
                format!("{:e}", c.measured),
                format!("{:e}", c.limit),
                c.pass.to_string(),
                c.applicable.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Config(format!("--jobs {j}: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_summary(outcome: &Outcome) {
    println!("F = {} (n = {}, q = {:.7}, c = {:+})", outcome.config.fspec, outcome.model.n(),
        outcome.model.q().value(), outcome.model.c());
    for r in &outcome.reports {
        for c in &r.checks {
            let verdict = match (c.pass, c.applicable) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "n/a (hypothesis not met)",
            };
            println!("  {:<9} {:<34} {:>11.3e}  limit {:>9.2e}  {verdict}", r.suite.name(), c.name,
                c.measured, c.limit);
        }
    }
    println!("{}", if outcome.pass() { "all checks passed" } else { "some checks failed" });
}

fn check(args: &CommonArgs) -> Result<bool> {
    let (config, model) = RunConfig::resolve(args)?;
    let (jobs, report, csv_path) = (config.jobs, config.report.clone(), config.csv.clone());
    let outcome = with_pool(jobs, || run_checks(config, model))??;
    print_summary(&outcome);
    if let Some(path) = report {
        fs::write(path, render_report(&outcome)?)?;
    }
    if let Some(path) = csv_path {
        write_outcome_csv(&outcome, sink(Some(&path))?)?;
    }
    Ok(outcome.pass())
}

fn dump(args: &DumpArgs) -> Result<bool> {
    let (config, model) = RunConfig::resolve(&args.common)?;
    let cat = config.category(model);
    let m: Mat = match args.what {
        DumpKind::JonesWenzl => cat.jones_wenzl(args.level)?.projector(),
        DumpKind::Intertwiner => (*cat.intertwiner(args.a, args.b, args.z)?).clone(),
        DumpKind::TVector => {
            let v = cat.t_vector(args.level)?;
            let len = v.len();
            v.into_shape_with_order((len, 1))
                .map_err(|e| Error::Numerical(e.to_string()))?
        }
    };
    sink(args.out.as_deref())?.write_all(format_matrix(&m).as_bytes())?;
    Ok(true)
}

fn table(args: &TableArgs) -> Result<bool> {
    let (config, model) = RunConfig::resolve(&args.common)?;
    let q = model.q();
    let trunc = config.walk_truncation;
    let out = sink(config.csv.as_deref())?;
    match args.what {
        TableKind::Green => {
            let rows = green_table(q, &WalkMeasure::delta(1), args.rows, trunc)?;
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(true)
        }
        TableKind::Ratio => {
            let g = GreenFunction::new(q, &WalkMeasure::delta(1), trunc)?.column(0)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["x", "martin_ratio", "q_squared", "eta_sequence", "eta_limit"])?;
            let q2 = q.value().powi(2);
            for x in 0..=args.rows.min(trunc.saturating_sub(2)) {
                w.write_record([
                    x.to_string(),
                    format!("{:e}", g[x + 1] / g[x]),
                    format!("{q2:e}"),
                    format!("{:e}", eta_sequence(q, x)),
                    format!("{:e}", 1.0 - q2),
                ])?;
            }
            w.flush()?;
            Ok(true)
        }
        TableKind::Report => {
            let jobs = config.jobs;
            let outcome = with_pool(jobs, || run_checks(config, model))??;
            write_checks_csv(&outcome.reports, out)?;
            Ok(outcome.pass())
        }
    }
}

/// Exit code for an error: 2 for usage and cap problems, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Numerical(_)
        | Error::Divergent(_)
        | Error::InsufficientData(_)
        | Error::Dimension { .. } => 1,
        _ => 2,
    }
}

pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Check(args) => check(args),
        Command::Dump(args) => dump(args),
        Command::Table(args) => table(args),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("qgroup-lab: {e}");
            exit_code(&e)
        }
    }
}

/// Parses the process arguments and runs; clap handles `--help` and usage
/// errors (exit 2) itself.
pub fn main_from_env() -> u8 {
    run(&Cli::parse())
}
