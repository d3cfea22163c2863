//! Command-line front end: config parsing, subcommand dispatch and artifact output.
//!
//! Every run writes `manifest.json` next to its CSV files. Exit status is 0 on
//! success, 1 for an unreadable config or output directory, 2 when the config
//! fails validation and 3 when a computed constant diverges.

pub mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{BallWidthsSection, Config, Kind};
use crate::output::Sink;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PEAKWIDTHS_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Io(String),
    Validation(String),
    Divergence(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::Divergence(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) | Self::Io(m) => write!(f, "error: {m}"),
            Self::Validation(m) => write!(f, "validation failed: {m}"),
            Self::Divergence(m) => write!(f, "divergence: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "peakwidths", version, about = "Width asymptotics of weighted Sobolev classes on cusp domains")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Quadrature tolerance of the Hardy constants.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime and width exponent.
    Exponent,
    /// Embedding constants over a geometric grid of windows `[0, tau]`.
    Hardy(HardyArgs),
    /// Schedule cardinalities and the multiplicity certificate.
    Partition(PartitionArgs),
    /// Widths of finite-dimensional balls.
    Ballwidths(BallArgs),
    /// Approximation-error decay against cell count.
    Decay(DecayArgs),
    /// Every subcommand with the config defaults.
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponent => "exponent",
            Self::Hardy(_) => "hardy",
            Self::Partition(_) => "partition",
            Self::Ballwidths(_) => "ballwidths",
            Self::Decay(_) => "decay",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Args)]
pub struct HardyArgs {
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub log2_tau_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub log2_tau_max: Option<i32>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Schedule level is `n d`.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BallArgs {
    #[arg(long)]
    pub nu: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown width kind {s}"))
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long)]
    pub nmin: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Number of plane-wave probes, at most 3.
    #[arg(long)]
    pub probes: Option<usize>,
}

/// Sizes the global pool from [`THREADS_ENV`]; later calls are no-ops.
pub fn init_threads() {
    let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load(cli: &Cli) -> Result<Option<Config>, Failure> {
    cli.config.as_deref().map(Config::load).transpose()
}

fn need(cfg: &Option<Config>) -> Result<&Config, Failure> {
    cfg.as_ref().ok_or_else(|| Failure::Config("this subcommand needs --config".into()))
}

fn apply_overrides(cli: &Cli, cfg: &mut Option<Config>, bw: &mut BallWidthsSection) {
    match &cli.command {
        Command::Hardy(a) => {
            if let Some(c) = cfg.as_mut() {
                let h = &mut c.hardy;
                h.points = a.points.unwrap_or(h.points);
                h.log2_tau_min = a.log2_tau_min.unwrap_or(h.log2_tau_min);
                h.log2_tau_max = a.log2_tau_max.unwrap_or(h.log2_tau_max);
            }
        }
        Command::Partition(a) => {
            if let Some(c) = cfg.as_mut() {
                c.partition.n = a.n.unwrap_or(c.partition.n);
                c.partition.depth = a.depth.unwrap_or(c.partition.depth);
            }
        }
        Command::Ballwidths(a) => {
            bw.nu = a.nu.unwrap_or(bw.nu);
            bw.n = a.n.unwrap_or(bw.n);
            bw.p = a.p.unwrap_or(bw.p);
            bw.q = a.q.unwrap_or(bw.q);
            bw.kind = a.kind.unwrap_or(bw.kind);
            bw.restarts = a.restarts.unwrap_or(bw.restarts);
            bw.samples = a.samples.unwrap_or(bw.samples);
        }
        Command::Decay(a) => {
            if let Some(c) = cfg.as_mut() {
                c.decay.nmin = a.nmin.unwrap_or(c.decay.nmin);
                c.decay.nmax = a.nmax.unwrap_or(c.decay.nmax);
                c.decay.probes = a.probes.unwrap_or(c.decay.probes);
            }
        }
        Command::Exponent | Command::All => {}
    }
}

type Step<'a> = dyn Fn(&mut Sink) -> Result<Vec<String>, Failure> + 'a;

/// Files written and components skipped by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<String>,
    pub skipped: BTreeMap<String, String>,
    pub divergence: Vec<String>,
}

/// Runs one subcommand. A divergence is reported after every artifact has been written.
pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut cfg = load(cli)?;
    let mut bw = cfg.as_ref().map(|c| c.ballwidths.clone()).unwrap_or_default();
    apply_overrides(cli, &mut cfg, &mut bw);
    let mut sink = Sink::create(&cli.out)?;
    let mut divergence = Vec::new();
    let mut skipped = BTreeMap::new();
    match &cli.command {
        Command::Exponent => divergence.extend(commands::exponent(need(&cfg)?, &mut sink)?),
        Command::Hardy(_) => divergence.extend(commands::hardy(need(&cfg)?, cli.tol, &mut sink)?),
        Command::Partition(_) => divergence.extend(commands::partition(need(&cfg)?, &mut sink)?),
        Command::Ballwidths(_) => divergence.extend(commands::ballwidths(&bw, cli.seed, &mut sink)?),
        Command::Decay(_) => divergence.extend(commands::decay(need(&cfg)?, &mut sink)?),
        Command::All => {
            let c = need(&cfg)?;
            divergence.extend(commands::exponent(c, &mut sink)?);
            let parts: [(&str, Box<Step>); 4] = [
                ("hardy", Box::new(|s| commands::hardy(c, cli.tol, s))),
                ("partition", Box::new(|s| commands::partition(c, s))),
                ("ballwidths", Box::new(|s| commands::ballwidths(&bw, cli.seed, s))),
                ("decay", Box::new(|s| commands::decay(c, s))),
            ];
            for (name, f) in parts {
                match f(&mut sink) {
                    Ok(notes) => divergence.extend(notes),
                    Err(Failure::Validation(m)) => {
                        skipped.insert(name.to_string(), m);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let manifest = json!({
        "tool": "peakwidths",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.name(),
        "config_path": cli.config.as_ref().map(|p| p.display().to_string()),
        "config": cfg,
        "ballwidths": matches!(cli.command, Command::Ballwidths(_)).then_some(&bw),
        "seed": cli.seed,
        "tol": cli.tol,
        "threads": rayon::current_num_threads(),
        "outputs": sink.files,
        "skipped": skipped,
        "divergence": divergence,
        "timestamp_unix": stamp,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    output::write_json(&sink.dir.join("manifest.json"), &manifest)?;
    if !divergence.is_empty() {
        return Err(Failure::Divergence(divergence.join("; ")));
    }
    Ok(Outcome {
        files: sink.files,
        skipped,
        divergence,
    })
}
