use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperlangevin::kernels::Sampler;
use hyperlangevin::models::TargetModel;
use hyperlangevin::scores::ScoreKind;
use hyperlangevin::{Error, Result};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "hyperlangevin", version, about = "Exact analysis and simulation of discrete Langevin samplers on {-1,+1}^d")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stationary law, distances to target, spectrum, κ and bounds per point.
    Analyze(AnalyzeArgs),
    /// One summary row per (η, sampler, score) over an η grid.
    Sweep(CommonArgs),
    /// Run every certificate whose preconditions hold.
    Check(CommonArgs),
    /// Monte Carlo chains.
    Simulate(SimulateArgs),
    /// Continuous-time Glauber trajectories.
    Ctmc(CtmcArgs),
    /// Constants, precondition flags and bound values.
    Bounds(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bits,
    Mixture,
    Ising,
    Curieweiss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 6)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    #[arg(long, default_value_t = 3)]
    pub cols: usize,
    #[arg(long = "J", default_value_t = 0.4)]
    pub j: f64,
    #[arg(long = "h", default_value_t = 0.1)]
    pub h: f64,
    #[arg(long)]
    pub periodic: bool,
    /// Curie-Weiss centering.
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
}

impl ModelArgs {
    pub fn build(&self) -> Result<TargetModel> {
        match self.model {
            ModelKind::Bits => TargetModel::independent_bits(self.beta, self.dim),
            ModelKind::Mixture => TargetModel::bits_mixture(self.beta, self.dim),
            ModelKind::Ising => TargetModel::ising_grid(self.rows, self.cols, self.j, self.h, self.periodic),
            ModelKind::Curieweiss => TargetModel::curie_weiss(self.beta, self.b, self.dim),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Comma-separated samplers, or `all` [default: gibbs,dups; all for check].
    #[arg(long)]
    pub sampler: Option<String>,
    /// Comma-separated scores (stein, gibbs, glauber), or `all` [default: stein; all for check].
    #[arg(long)]
    pub score: Option<String>,
    /// Comma-separated step sizes.
    #[arg(long, conflicts_with = "eta_grid")]
    pub eta: Option<String>,
    /// `min:max:count[:lin|log]`.
    #[arg(long)]
    pub eta_grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV of stationary and target probabilities per state (csv format only).
    #[arg(long)]
    pub stationary_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1)]
    pub thinning: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Per-sample dump: chain, step, packed state (hex), magnetization.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub dump_limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Minus,
    Plus,
}

#[derive(Args, Debug, Clone)]
pub struct CtmcArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub trajectories: usize,
    #[arg(long, value_enum, default_value_t = Start::Minus)]
    pub start: Start,
}

/// Everything needed to reproduce a run; echoed in JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub model: TargetModel,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samplers: Vec<Sampler>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<ScoreKind>,
    /// Sorted ascending, deduplicated; empty only for commands without a step size.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub etas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub mode: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &'static str, model: &ModelArgs, output: &OutputArgs, mode: serde_json::Value) -> Result<Self> {
        Ok(RunManifest {
            command,
            model: model.build()?,
            samplers: vec![],
            scores: vec![],
            etas: vec![],
            eta_grid: None,
            out: output.out.clone(),
            format: output.format,
            seed: output.seed,
            mode,
        })
    }

    /// `defaults` = (samplers, scores) used when the flags are absent.
    pub fn with_grid(
        command: &'static str,
        a: &CommonArgs,
        defaults: (&str, &str),
        mode: serde_json::Value,
    ) -> Result<Self> {
        let g = &a.grid;
        let mut etas = match (&g.eta, &g.eta_grid) {
            (_, Some(grid)) => parse_eta_grid(grid)?,
            (Some(list), None) => parse_list(list, |s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("bad step size `{s}`")))
            })?,
            (None, None) => vec![0.5],
        };
        check_etas(&etas)?;
        etas.sort_by(f64::total_cmp);
        etas.dedup();
        Ok(RunManifest {
            samplers: parse_samplers(g.sampler.as_deref().unwrap_or(defaults.0))?,
            scores: parse_scores(g.score.as_deref().unwrap_or(defaults.1))?,
            etas,
            eta_grid: g.eta_grid.clone(),
            ..Self::new(command, &a.model, &a.output, mode)?
        })
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(f)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Parameter(format!("empty list `{s}`")));
    }
    Ok(items)
}

pub fn parse_samplers(s: &str) -> Result<Vec<Sampler>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Sampler::ALL.to_vec());
    }
    let mut v = parse_list(s, |t| t.parse::<Sampler>())?;
    v.sort_by_key(|k| Sampler::ALL.iter().position(|a| a == k));
    v.dedup();
    Ok(v)
}

pub fn parse_scores(s: &str) -> Result<Vec<ScoreKind>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ScoreKind::ALL.to_vec());
    }
    let mut v = parse_list(s, |t| t.parse::<ScoreKind>())?;
    v.sort_by_key(|k| ScoreKind::ALL.iter().position(|a| a == k));
    v.dedup();
    Ok(v)
}

fn check_etas(etas: &[f64]) -> Result<()> {
    if etas.is_empty() {
        return Err(Error::Parameter("step-size grid is empty".into()));
    }
    match etas.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        Some(e) => Err(Error::Parameter(format!("step size eta must be > 0, got {e}"))),
        None => Ok(()),
    }
}

/// `min:max:count[:lin|log]`, endpoints included; linear by default.
pub fn parse_eta_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("bad grid `{s}` (expected min:max:count[:lin|log])"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    let log = match parts.get(3).copied().unwrap_or("lin") {
        "lin" | "linear" => false,
        "log" => true,
        _ => return Err(bad()),
    };
    if n == 0 {
        return Err(Error::Parameter("step-size grid is empty".into()));
    }
    check_etas(&[lo, hi])?;
    if hi < lo {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = |k: usize| k as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            _ if k == n - 1 => hi,
            _ if log => (lo.ln() + step(k) * (hi.ln() - lo.ln())).exp(),
            _ => lo + step(k) * (hi - lo),
        })
        .collect())
}
