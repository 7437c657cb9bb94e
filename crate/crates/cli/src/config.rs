use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use treedyn_core::rational::{self, Rational};
use treedyn_core::{MetricTree, PlMap, Subtree};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "treedyn", version, about = "Dynamics of piecewise-linear tree maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed points, periodic orbits, the attracting fixed point and its basin.
    Analyze(Options),
    /// Asymptotic verdict for the orbit of a subcontinuum.
    Classify(Options),
    /// Entropy tables from separated and spanning sets.
    Entropy(Options),
    /// Entropy bounds for the functional envelope.
    Envelope(Options),
    /// Exact spot checks of map invariants on seeded samples.
    VerifyInvariants(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Classify(_) => "classify",
            Command::Entropy(_) => "entropy",
            Command::Envelope(_) => "envelope",
            Command::VerifyInvariants(_) => "verify-invariants",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Analyze(o)
            | Command::Classify(o)
            | Command::Entropy(o)
            | Command::Envelope(o)
            | Command::VerifyInvariants(o) => o,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Map spec (JSON); may embed its tree.
    #[arg(long)]
    pub map: PathBuf,
    /// Tree spec (JSON), used when the map spec has no tree.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Subcontinuum spec (JSON) for `classify`.
    #[arg(long)]
    pub continuum: Option<PathBuf>,
    /// Convergence tolerance, as a rational or decimal.
    #[arg(long, default_value = "1/1000000")]
    pub tol: String,
    /// Iteration budget.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Largest period searched (default 24 for classify, 8 elsewhere).
    #[arg(long)]
    pub max_period: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    /// Comma-separated, strictly decreasing.
    #[arg(long, default_value = "1/16,1/64,1/256")]
    pub eps_list: String,
    /// Finest grid spacing for entropy counts.
    #[arg(long, default_value = "1/2048")]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

/// Validated settings, embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub map: String,
    pub tree: Option<String>,
    pub continuum: Option<String>,
    #[serde(serialize_with = "treedyn_core::io::serialize_rational")]
    pub tol: Rational,
    pub budget: usize,
    pub max_period: usize,
    pub n_max: usize,
    #[serde(serialize_with = "treedyn_core::io::serialize_rationals")]
    pub eps_list: Vec<Rational>,
    #[serde(serialize_with = "treedyn_core::io::serialize_rational")]
    pub grid: Rational,
    pub seed: u64,
}

fn parse_positive(flag: &str, text: &str) -> Result<Rational, Failure> {
    let r = rational::parse(text.trim()).map_err(|e| Failure::Input(format!("--{flag}: {e}")))?;
    if r <= rational::zero() {
        return Err(Failure::Input(format!("--{flag} must be positive, got {text}")));
    }
    Ok(r)
}

fn display(p: &std::path::Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    pub fn from_options(command: &str, o: &Options) -> Result<Self, Failure> {
        let eps_list = o
            .eps_list
            .split(',')
            .map(|s| parse_positive("eps-list", s))
            .collect::<Result<Vec<_>, _>>()?;
        if eps_list.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Failure::Input("--eps-list must be strictly decreasing".into()));
        }
        for (flag, value) in [("budget", o.budget), ("n-max", o.n_max)] {
            if value == 0 {
                return Err(Failure::Input(format!("--{flag} must be positive")));
            }
        }
        let default_period = if command == "classify" { 24 } else { 8 };
        let max_period = o.max_period.unwrap_or(default_period);
        if max_period == 0 {
            return Err(Failure::Input("--max-period must be positive".into()));
        }
        Ok(RunConfig {
            command: command.to_string(),
            map: display(&o.map),
            tree: o.tree.as_deref().map(display),
            continuum: o.continuum.as_deref().map(display),
            tol: parse_positive("tol", &o.tol)?,
            budget: o.budget,
            max_period,
            n_max: o.n_max,
            eps_list,
            grid: parse_positive("grid", &o.grid)?,
            seed: o.seed,
        })
    }
}

fn read(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn load_map(o: &Options) -> Result<PlMap, Failure> {
    let tree = match &o.tree {
        Some(p) => Some(
            treedyn_core::io::parse_tree(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    treedyn_core::io::parse_map(&read(&o.map)?, tree).map_err(|e| Failure::Input(format!("{}: {e}", o.map.display())))
}

pub fn load_continuum(o: &Options, tree: &MetricTree) -> Result<Subtree, Failure> {
    let path = o.continuum.as_ref().ok_or_else(|| Failure::Input("--continuum is required".into()))?;
    treedyn_core::io::parse_subtree(tree, &read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}
