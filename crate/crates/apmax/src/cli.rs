//! Command-line surface: thin, logic-free wrappers over the library.
//!
//! Subcommands: `gen`, `stat`, `dist`, `chenstein`, `nested`, `lattice`,
//! `report`. Structured output is JSON on stdout by default, files via
//! `--out`/`--*-csv`. The master seed comes from `--master`, falling back to
//! the `AP_SEED` environment variable. Exit codes: 0 success, 1 usage,
//! 2 I/O, 3 failed `--check`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::apscan::{max_u, max_w, ApResult};
use crate::chenstein::{
    b1_b2_exact, b1_b2_paper_bound, lambda_exact_w, lambda_paper, DependencySummary,
    IntersectMode, ThresholdSpec, TruncationParams, B_EXACT_CAP,
};
use crate::experiments::{
    run_distribution, run_nested_trajectories, second_moment_report, ExperimentConfig,
    StatSelection,
};
use crate::io;
use crate::limitlaw::CdfComparison;
use crate::rngword::{generate_word, BinaryWord, StreamSeed};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "apmax",
    version,
    about = "Maximal arithmetic-progression statistics of random binary words"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Generate a word and dump it as a 01-string or hex
    Gen(GenArgs),
    /// Compute W and U with witnesses for one word
    Stat(StatArgs),
    /// Distribution experiment: empirical CDFs against the predicted law
    Dist(DistArgs),
    /// Chen-Stein diagnostics: first moments, exact B1/B2, bound chains
    Chenstein(ChensteinArgs),
    /// Nested trajectories of one growing word per seed
    Nested(NestedArgs),
    /// Lattice exceedance count and second-moment report
    Lattice(LatticeArgs),
    /// Re-render and validate a CDF report file
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenFormat {
    Bits,
    Hex,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, env = "AP_SEED", default_value_t = 1)]
    pub master: u64,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = GenFormat::Bits)]
    pub format: GenFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatArgs {
    #[arg(long, env = "AP_SEED", default_value_t = 1)]
    pub master: u64,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Word length (generated from the seed)
    #[arg(long, required_unless_present = "bits", conflicts_with = "bits")]
    pub n: Option<usize>,
    /// Explicit word as a 01-string fixture instead of a generated one
    #[arg(long)]
    pub bits: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StatsArg {
    W,
    U,
    Both,
}

impl From<StatsArg> for StatSelection {
    fn from(v: StatsArg) -> Self {
        match v {
            StatsArg::W => StatSelection::W,
            StatsArg::U => StatSelection::U,
            StatsArg::Both => StatSelection::Both,
        }
    }
}

/// Optional JSON config file; command-line flags override its values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    master: Option<u64>,
    ns: Option<Vec<usize>>,
    trials: Option<usize>,
    stats: Option<StatSelection>,
    x_lo: Option<i32>,
    x_hi: Option<i32>,
    eps: Option<f64>,
    beta: Option<f64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    /// JSON config file; explicit flags win over its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "AP_SEED")]
    pub master: Option<u64>,
    /// Word lengths, comma separated
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub stats: Option<StatsArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_lo: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_hi: Option<i32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the full JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub records_csv: Option<PathBuf>,
    #[arg(long)]
    pub cdf_csv: Option<PathBuf>,
    /// Validate every CDF row against the predicted law (exit 3 on failure)
    #[arg(long)]
    pub check: bool,
    /// Model slack added to 3 standard errors in --check
    #[arg(long, default_value_t = 0.02)]
    pub slack: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Integer,
    Residue,
    Both,
}

#[derive(Args, Debug)]
pub struct ChensteinArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Also compute the exact B1/B2 (enumeration; n <= 128)
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Require exact <= bound componentwise (exit 3 on failure)
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NestedArgs {
    #[arg(long, env = "AP_SEED", default_value_t = 1)]
    pub master: u64,
    /// Number of independent seeds (trials of the master)
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Checkpoints, comma separated, strictly increasing
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "64,128,256,512,1024,2048,4096,8192,16384"
    )]
    pub checkpoints: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write trajectory rows as CSV (trial,n,w,u,w_ratio,u_ratio)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    #[arg(long, env = "AP_SEED", default_value_t = 1)]
    pub master: u64,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 200)]
    pub streams: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Require the second-moment inequality (exit 3 on failure)
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// CDF report CSV to load
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.02)]
    pub slack: f64,
    /// Validate rows within 3 standard errors plus slack (exit 3 on failure)
    #[arg(long)]
    pub check: bool,
}

/// Exit code for an error, per the CLI contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Parse { .. } => 2,
        Error::CheckFailed(_) => 3,
        _ => 1,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stat_json(n: usize, w: &ApResult, u: &ApResult) -> String {
    let doc = serde_json::json!({
        "n": n,
        "W": w.value,
        "U": u.value,
        "w_witness": w.witness,
        "u_witness": u.witness,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("stat json");
    s.push('\n');
    s
}

/// Checks every row of every comparison against `3·SE + slack`.
pub fn check_comparisons(comparisons: &[CdfComparison], slack: f64) -> Result<()> {
    for cmp in comparisons {
        for row in &cmp.rows {
            let gap = (row.empirical - row.predicted).abs();
            let band = 3.0 * row.stderr + slack;
            if gap > band {
                return Err(Error::CheckFailed(format!(
                    "n={} stat={} t={}: |{:.4} - {:.4}| = {:.4} > {:.4}",
                    cmp.n, cmp.stat, row.threshold, row.empirical, row.predicted, gap, band
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ChensteinDoc {
    n: usize,
    x: f64,
    eps: f64,
    m_ones: i64,
    truncation: usize,
    lambda_paper: f64,
    lambda_exact_w: f64,
    bound: DependencySummary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    exact: Vec<DependencySummary>,
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let word = generate_word(StreamSeed::new(args.master, args.trial), args.n);
    let dump = match args.format {
        GenFormat::Bits => word.to_string01(),
        GenFormat::Hex => word.to_hex(),
    };
    let text = if dump.is_empty() {
        dump
    } else {
        format!("{dump}\n")
    };
    emit(&text, args.out.as_deref())
}

fn run_stat(args: &StatArgs) -> Result<()> {
    let word = match &args.bits {
        Some(bits) => BinaryWord::from_str01(bits)?,
        None => generate_word(
            StreamSeed::new(args.master, args.trial),
            args.n.expect("clap enforces n xor bits"),
        ),
    };
    let text = stat_json(word.len(), &max_w(&word), &max_u(&word));
    emit(&text, args.out.as_deref())
}

fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn effective_config(args: &DistArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let defaults = ExperimentConfig::default();
    Ok(ExperimentConfig {
        master: args.master.or(file.master).unwrap_or(defaults.master),
        ns: args.ns.clone().or(file.ns).unwrap_or(defaults.ns),
        trials: args.trials.or(file.trials).unwrap_or(defaults.trials),
        stats: args
            .stats
            .map(StatSelection::from)
            .or(file.stats)
            .unwrap_or(defaults.stats),
        x_lo: args.x_lo.or(file.x_lo).unwrap_or(defaults.x_lo),
        x_hi: args.x_hi.or(file.x_hi).unwrap_or(defaults.x_hi),
        eps: args.eps.or(file.eps).unwrap_or(defaults.eps),
        beta: args.beta.or(file.beta).unwrap_or(defaults.beta),
        workers: args.workers.or(file.workers).unwrap_or(defaults.workers),
        out: args.out.clone().or(file.out),
    })
}

fn run_dist(args: &DistArgs) -> Result<()> {
    let config = effective_config(args)?;
    let report = run_distribution(&config)?;
    if let Some(path) = &args.records_csv {
        io::write_records_csv(&report.records, path)?;
    }
    if let Some(path) = &args.cdf_csv {
        io::write_comparisons_csv(&report.comparisons, path)?;
    }
    match &config.out {
        Some(path) => io::write_report_json(&report, path)?,
        None => print!("{}", io::report_to_json(&report)),
    }
    if args.check {
        check_comparisons(&report.comparisons, args.slack)?;
    }
    Ok(())
}

fn run_chenstein(args: &ChensteinArgs) -> Result<()> {
    let params = TruncationParams::new(args.n, args.eps)?;
    let spec = ThresholdSpec::new(args.n, args.x);
    let bound = b1_b2_paper_bound(args.n, args.x, args.eps);
    let mut exact = Vec::new();
    if args.exact {
        if args.n > B_EXACT_CAP {
            return Err(Error::CapExceeded {
                what: "n",
                got: args.n,
                cap: B_EXACT_CAP,
            });
        }
        let modes: &[IntersectMode] = match args.mode {
            ModeArg::Integer => &[IntersectMode::Integer],
            ModeArg::Residue => &[IntersectMode::Residue],
            ModeArg::Both => &[IntersectMode::Integer, IntersectMode::Residue],
        };
        for &mode in modes {
            exact.push(b1_b2_exact(args.n, args.x, args.eps, mode)?);
        }
    }
    let doc = ChensteinDoc {
        n: args.n,
        x: args.x,
        eps: args.eps,
        m_ones: spec.m_ones(),
        truncation: params.truncation(),
        lambda_paper: lambda_paper(args.n, args.x),
        lambda_exact_w: lambda_exact_w(args.n, args.x),
        bound,
        exact: exact.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("chenstein json");
    text.push('\n');
    emit(&text, args.out.as_deref())?;
    if args.check {
        for summary in exact
            .iter()
            .filter(|s| s.mode == IntersectMode::Integer)
        {
            if summary.b1 > bound.b1 || summary.b2 > bound.b2 {
                return Err(Error::CheckFailed(format!(
                    "exact B1/B2 ({}, {}) exceed the bound ({}, {})",
                    summary.b1, summary.b2, bound.b1, bound.b2
                )));
            }
        }
    }
    Ok(())
}

fn run_nested(args: &NestedArgs) -> Result<()> {
    let report = run_nested_trajectories(args.master, args.seeds, &args.checkpoints, args.workers)?;
    if let Some(path) = &args.csv {
        let mut text = String::from("trial,n,w,u,w_ratio,u_ratio\n");
        for series in &report.series {
            for pt in &series.points {
                use std::fmt::Write as _;
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    series.trial, pt.n, pt.w, pt.u, pt.w_ratio, pt.u_ratio
                );
            }
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    let mut text = serde_json::to_string_pretty(&report).expect("nested json");
    text.push('\n');
    emit(&text, args.out.as_deref())
}

fn run_lattice(args: &LatticeArgs) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let report =
        pool.install(|| second_moment_report(args.streams, args.n, args.beta, args.master))?;
    let mut text = serde_json::to_string_pretty(&report).expect("lattice json");
    text.push('\n');
    emit(&text, args.out.as_deref())?;
    if args.check {
        let band = report.chebyshev + 4.0 * report.mc_error;
        if report.p_zero > band {
            return Err(Error::CheckFailed(format!(
                "P(Λ=0) = {} exceeds Var/mean² + 4·err = {band}",
                report.p_zero
            )));
        }
    }
    Ok(())
}

fn run_report(args: &ReportArgs) -> Result<()> {
    let comparisons = io::load_comparisons_csv(&args.input)?;
    for cmp in &comparisons {
        println!(
            "n={} stat={} rows={} ks={}",
            cmp.n,
            cmp.stat,
            cmp.rows.len(),
            cmp.ks
        );
        for row in &cmp.rows {
            println!(
                "  t={} empirical={} predicted={} stderr={} trials={}",
                row.threshold, row.empirical, row.predicted, row.stderr, row.trials
            );
        }
    }
    if args.check {
        check_comparisons(&comparisons, args.slack)?;
    }
    Ok(())
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Gen(args) => run_gen(args),
        Cmd::Stat(args) => run_stat(args),
        Cmd::Dist(args) => run_dist(args),
        Cmd::Chenstein(args) => run_chenstein(args),
        Cmd::Nested(args) => run_nested(args),
        Cmd::Lattice(args) => run_lattice(args),
        Cmd::Report(args) => run_report(args),
    }
}
