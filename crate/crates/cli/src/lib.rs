//! Command-line harness around `bct-core`: experiment sweeps, reports,
//! golden files and the acceptance criteria.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod golden;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ListSpec};
use report::Report;

/// Exit status for an invariant violation or a failed check.
pub const EXIT_INVARIANT: i32 = 3;
/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for I/O and other failures.
pub const EXIT_OTHER: i32 = 1;

/// A run finished but some invariant did not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation(pub Vec<String>);

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.0.join("; "))
    }
}

impl std::error::Error for InvariantViolation {}

#[derive(Debug, Parser)]
#[command(name = "bct", version, about = "Exact-arithmetic experiments in Bilocal Classical Theory")]
pub struct Cli {
    /// JSON file with default values for the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Golden-file directory for the `golden` subcommand.
    #[arg(long, global = true)]
    pub golden: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact minimal rates M_min over a grid of N and ε, as CSV.
    Rate(RateArgs),
    /// Build the typical-set codec and report its figure of merit.
    Codec(CodecArgs),
    /// Entropies, the oracle sandwich and regularized entropies.
    Entropy(EntropyArgs),
    /// Reproduce random dilations through the mother dilation.
    Steer(SteerArgs),
    /// Digitize a system into a register of smaller systems.
    Digitize(DigitizeArgs),
    /// Permutation-restricted compression in a locally discriminable theory.
    Counterexample(CounterArgs),
    /// Run the acceptance criteria (all, or one by number or name).
    Accept {
        criterion: Option<String>,
    },
    /// Compare regenerated reports with the golden files.
    Golden {
        /// Rewrite the golden files instead of comparing.
        #[arg(long)]
        update: bool,
    },
}

#[derive(Debug, Args, Default)]
pub struct SourceArgs {
    /// Source distribution, e.g. `0.9,0.1` or `1/2,1/3,1/6`.
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Comma-separated ε values in (0, 2).
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub nmin: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON report with the per-ε curves.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Target error used for the M_min comparison.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Largest explicit enumeration used for cross-checks.
    #[arg(long)]
    pub memory_bound: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random atomic tests tried by each oracle.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SteerArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dilations per state.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random states (ignored with --dist).
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DigitizeArgs {
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub k1max: Option<u32>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CounterArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn list(s: &Option<String>) -> Option<ListSpec> {
    s.as_deref().map(ListSpec::from)
}

impl Command {
    /// The flags of this subcommand as a configuration layer.
    pub fn flags(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        match self {
            Command::Rate(a) => {
                c.dist = list(&a.source.dist);
                c.eps = list(&a.eps);
                c.nmin = a.nmin;
                c.nmax = a.nmax;
                c.out = a.out.clone();
                c.report = a.report.clone();
            }
            Command::Codec(a) => {
                c.dist = list(&a.source.dist);
                c.n = a.n;
                c.delta = a.delta;
                c.eps = list(&a.eps);
                c.report = a.report.clone();
                c.memory_bound = a.memory_bound;
            }
            Command::Entropy(a) => {
                c.dist = list(&a.source.dist);
                c.nmax = a.nmax;
                c.seed = a.seed;
                c.budget = a.budget;
                c.report = a.report.clone();
            }
            Command::Steer(a) => {
                c.dist = list(&a.source.dist);
                c.seed = a.seed;
                c.samples = a.samples;
                c.states = a.states;
                c.report = a.report.clone();
            }
            Command::Digitize(a) => {
                c.a = a.a;
                c.b = a.b;
                c.k1max = a.k1max;
                c.report = a.report.clone();
            }
            Command::Counterexample(a) => {
                c.dist = list(&a.source.dist);
                c.nmax = a.nmax;
                c.eps = list(&a.eps);
                c.report = a.report.clone();
            }
            Command::Accept { .. } | Command::Golden { .. } => {}
        }
        c
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Writes the body to `path`, or to stdout when no path is set, then echoes
/// the summary.
fn emit(report: &Report, path: Option<&Path>, out: &mut dyn std::io::Write) -> Result<()> {
    match path {
        Some(p) => {
            write(p, &report.body)?;
            write!(out, "{}", report.summary)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => write!(out, "{}", report.body)?,
    }
    Ok(())
}

fn finish(violations: Vec<String>) -> Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(InvariantViolation(violations).into())
    }
}

pub fn default_golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Executes a parsed command line, writing human output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(config::ConfigError::new("jobs", "must be positive").into());
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = cli.command.flags().merge(file);
    match &cli.command {
        Command::Rate(_) => {
            let report = commands::rate(&cfg)?;
            emit(&report, cfg.out.as_deref(), out)?;
            if let Some(path) = &cfg.report {
                let value = commands::rate_json(&cfg)?;
                write(path, &(serde_json::to_string_pretty(&value)? + "\n"))?;
            }
            finish(report.violations)
        }
        Command::Codec(_)
        | Command::Entropy(_)
        | Command::Steer(_)
        | Command::Digitize(_)
        | Command::Counterexample(_) => {
            let report = match &cli.command {
                Command::Codec(_) => commands::codec(&cfg)?,
                Command::Entropy(_) => commands::entropy(&cfg)?,
                Command::Steer(_) => commands::steer_cmd(&cfg)?,
                Command::Digitize(_) => commands::digitize(&cfg)?,
                _ => commands::counterexample(&cfg)?,
            };
            emit(&report, cfg.report.as_deref(), out)?;
            finish(report.violations)
        }
        Command::Accept { criterion } => {
            let selected = match criterion {
                Some(sel) => vec![criteria::find(sel).ok_or_else(|| {
                    config::ConfigError::new("criterion", format!("no criterion `{sel}`"))
                })?],
                None => criteria::all(),
            };
            let mut failed = Vec::new();
            for c in selected {
                let v = c.run();
                writeln!(out, "{}", v.line())?;
                if !v.passed {
                    failed.push(format!("criterion {} {}", v.id, v.name));
                }
            }
            finish(failed)
        }
        Command::Golden { update } => {
            let dir = cli.golden.clone().unwrap_or_else(default_golden_dir);
            if *update {
                for path in golden::update(&dir)? {
                    writeln!(out, "updated {}", path.display())?;
                }
                return Ok(());
            }
            let outcome = golden::check(&dir)?;
            for (file, diffs) in &outcome.mismatches {
                writeln!(out, "MISMATCH {file}")?;
                for d in diffs {
                    writeln!(out, "  {d}")?;
                }
            }
            writeln!(
                out,
                "{} of {} golden files match",
                outcome.compared - outcome.mismatches.len(),
                outcome.compared
            )?;
            finish(outcome.mismatches.into_iter().map(|(f, _)| format!("golden mismatch in {f}")).collect())
        }
    }
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InvariantViolation>().is_some() {
        EXIT_INVARIANT
    } else if err.downcast_ref::<config::ConfigError>().is_some()
        || matches!(
            err.downcast_ref::<bct_core::BctError>(),
            Some(bct_core::BctError::InvalidParameter(_) | bct_core::BctError::InvalidDistribution(_))
        )
    {
        EXIT_CONFIG
    } else {
        EXIT_OTHER
    }
}
