use crate::commands;
use crate::config::{ConfigError, RunConfig};
use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "cpm-schwarz", version, about = "Closest point method with restricted additive Schwarz on closed curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-domain solve sampled along the curve.
    Solve(RunArgs),
    /// One RAS run: error history, owned points and a plot.
    Ras(RunArgs),
    /// Iteration matrix and contraction bound of the periodic interval problem.
    Theory {
        #[command(flatten)]
        args: RunArgs,
        /// Also tabulate the bound over the configured overlaps.
        #[arg(long)]
        sweep: bool,
    },
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// RAS convergence on the Moebius-strip boundary for several grid spacings.
    Mobius(RunArgs),
    /// Contraction factor against overlap on the unit circle.
    CircleOverlap(RunArgs),
}

/// Overrides applied on top of the preset and the optional config file.
/// Values use the config-file syntax.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// key=value file read before the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// circle, circle:R=<r> or mobius-boundary.
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    /// Interpolation degree.
    #[arg(long)]
    pub degree: Option<String>,
    /// Reaction coefficient.
    #[arg(long)]
    pub c: Option<String>,
    /// Forcing: sin-mode-<k>, zero or one.
    #[arg(long)]
    pub f: Option<String>,
    /// f1,f2 fractions or an m:n ratio.
    #[arg(long)]
    pub split: Option<String>,
    /// One or two overlaps, absolute or relative to the curve length (0.1L).
    #[arg(long)]
    pub overlap: Option<String>,
    /// GMRES tolerance of the single-domain solve.
    #[arg(long)]
    pub inner_tol: Option<String>,
    /// RAS stopping tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub max_iter: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated grid spacings of the experiments.
    #[arg(long)]
    pub hs: Option<String>,
    /// Comma-separated sweep overlaps.
    #[arg(long)]
    pub deltas: Option<String>,
    /// algebraic or iterate.
    #[arg(long)]
    pub interface: Option<String>,
    /// direct or gmres.
    #[arg(long)]
    pub solver: Option<String>,
    /// Number of arclength samples written by solve.
    #[arg(long)]
    pub samples: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("curve", &self.curve),
            ("h", &self.h),
            ("degree", &self.degree),
            ("c", &self.c),
            ("f", &self.f),
            ("split", &self.split),
            ("overlap", &self.overlap),
            ("inner_tol", &self.inner_tol),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("out", &self.out),
            ("hs", &self.hs),
            ("deltas", &self.deltas),
            ("interface", &self.interface),
            ("solver", &self.solver),
            ("samples", &self.samples),
        ]
    }

    /// `preset`, then the config file, then the flags.
    pub fn resolve(&self, mut preset: RunConfig) -> Result<RunConfig, ConfigError> {
        if let Some(path) = &self.config {
            preset.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                preset.set(key, v)?;
            }
        }
        Ok(preset)
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Solve(a) => commands::cmd_solve(&a.resolve(RunConfig::default())?),
        Command::Ras(a) => commands::cmd_ras(&a.resolve(RunConfig::default())?),
        Command::Theory { args, sweep } => commands::cmd_theory(&args.resolve(RunConfig::default())?, *sweep),
        Command::Experiment(Experiment::Mobius(a)) => commands::cmd_experiment_mobius(&a.resolve(RunConfig::mobius())?),
        Command::Experiment(Experiment::CircleOverlap(a)) => {
            commands::cmd_experiment_circle_overlap(&a.resolve(RunConfig::circle_overlap())?)
        }
    }
}
