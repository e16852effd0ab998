//! Run configuration: a flat TOML file plus command-line overrides.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum Algo {
    Sama,
    Sadmm,
    SamaSc1,
    SamaSc2,
    Ama,
    Admm,
    Dr,
    AdmmFeas,
    Dykstra,
    Haugazeau,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Sama => "sama",
            Algo::Sadmm => "sadmm",
            Algo::SamaSc1 => "sama-sc1",
            Algo::SamaSc2 => "sama-sc2",
            Algo::Ama => "ama",
            Algo::Admm => "admm",
            Algo::Dr => "dr",
            Algo::AdmmFeas => "admm-feas",
            Algo::Dykstra => "dykstra",
            Algo::Haugazeau => "haugazeau",
        }
    }

    pub fn parse_name(s: &str) -> Result<Algo> {
        Algo::from_str(s, true)
            .map_err(|_| anyhow::anyhow!("unknown algo `{s}`; valid names: {}", Algo::all_names()))
    }

    pub fn all_names() -> String {
        [
            "sama",
            "sadmm",
            "sama-sc1",
            "sama-sc2",
            "ama",
            "admm",
            "dr",
            "admm-feas",
            "dykstra",
            "haugazeau",
        ]
        .join(", ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum ProblemKind {
    Feasibility,
    BoxLp,
    ScQuad,
    CompositeL1,
}

/// Problem block of the config file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub angle: Option<f64>,
    pub radius: Option<f64>,
    pub dim: Option<usize>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
}

/// The flat config file; every key can be overridden by a flag.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algo: Option<String>,
    pub gamma1: Option<f64>,
    pub rho: Option<f64>,
    pub max_iters: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub record_gap: Option<bool>,
    pub paper_beta: Option<bool>,
    pub output: Option<PathBuf>,
    pub thin: Option<usize>,
    #[serde(default)]
    pub problem: ProblemConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algo: Algo,
    pub problem: ProblemSettings,
    pub gamma1: Option<f64>,
    pub rho: f64,
    pub max_iters: usize,
    pub eps: f64,
    pub seed: u64,
    pub record_gap: bool,
    pub paper_beta: bool,
    pub output: Option<PathBuf>,
    pub thin: usize,
}

#[derive(Debug, Clone)]
pub struct ProblemSettings {
    pub kind: ProblemKind,
    pub n: usize,
    pub angle: f64,
    pub radius: Option<f64>,
    pub dim: usize,
    pub mu: f64,
    pub seed: u64,
}

impl Default for ProblemSettings {
    fn default() -> Self {
        ProblemSettings {
            kind: ProblemKind::Feasibility,
            n: 1000,
            angle: 1e-2,
            radius: None,
            dim: 2,
            mu: 1.0,
            seed: 0,
        }
    }
}

/// Merges file values and flag overrides into a resolved configuration.
#[allow(clippy::too_many_arguments)]
pub fn resolve(
    file: Option<FileConfig>,
    algo: Option<Algo>,
    problem_kind: Option<ProblemKind>,
    n: Option<usize>,
    angle: Option<f64>,
    radius: Option<f64>,
    dim: Option<usize>,
    mu: Option<f64>,
    problem_seed: Option<u64>,
    gamma1: Option<f64>,
    rho: Option<f64>,
    max_iters: Option<usize>,
    eps: Option<f64>,
    seed: Option<u64>,
    record_gap: bool,
    paper_beta: bool,
    output: Option<PathBuf>,
    thin: Option<usize>,
) -> Result<RunConfig> {
    let file = file.unwrap_or_default();
    let algo = match (algo, &file.algo) {
        (Some(a), _) => a,
        (None, Some(name)) => Algo::parse_name(name)?,
        (None, None) => bail!("no algo given (use --algo or the config file)"),
    };
    let kind = match (problem_kind, &file.problem.kind) {
        (Some(k), _) => k,
        (None, Some(name)) => ProblemKind::from_str(name, true).map_err(|_| {
            anyhow::anyhow!(
                "unknown problem kind `{name}`; valid kinds: feasibility, box-lp, sc-quad, composite-l1"
            )
        })?,
        (None, None) => ProblemKind::Feasibility,
    };
    let defaults = ProblemSettings::default();
    let seed = seed.or(file.seed).unwrap_or(0);
    let eps = eps.or(file.eps).unwrap_or(1e-12);
    if eps <= 0.0 {
        bail!("eps must be > 0");
    }
    let max_iters = max_iters.or(file.max_iters).unwrap_or(1000);
    if max_iters < 1 {
        bail!("max_iters must be >= 1");
    }
    let thin = thin.or(file.thin).unwrap_or(1);
    if thin < 1 {
        bail!("thin must be >= 1");
    }
    Ok(RunConfig {
        algo,
        problem: ProblemSettings {
            kind,
            n: n.or(file.problem.n).unwrap_or(defaults.n),
            angle: angle.or(file.problem.angle).unwrap_or(defaults.angle),
            radius: radius.or(file.problem.radius),
            dim: dim.or(file.problem.dim).unwrap_or(defaults.dim),
            mu: mu.or(file.problem.mu).unwrap_or(defaults.mu),
            seed: problem_seed.or(file.problem.seed).unwrap_or(seed),
        },
        gamma1: gamma1.or(file.gamma1),
        rho: rho.or(file.rho).unwrap_or(1.0),
        max_iters,
        eps,
        seed,
        record_gap: record_gap || file.record_gap.unwrap_or(false),
        paper_beta: paper_beta || file.paper_beta.unwrap_or(false),
        output: output.or(file.output),
        thin,
    })
}
