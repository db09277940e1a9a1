// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jamming_core::Model;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "jamming", version, about = "Exploration processes on random graphs: simulation and limit numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fluid limit, bound curves and diffusion variance (fluid.csv, fluid_summary.json)
    Fluid(Flags),
    /// Run replicates and write a per-step trace and a summary (trace.csv, summary.json)
    Simulate(Flags),
    /// `simulate` with c = 1.4, N = 2000 and the coupled spatial model
    Figure1(Flags),
    /// Jamming constant against the bounds over a grid of c (figure2.csv)
    Figure2(Flags),
    /// Hitting-time CLT study (clt.json, clt_samples.csv)
    Clt(Flags),
    /// Sup-deviation envelope and hitting-time tail (envelope.json, envelope.csv)
    Envelope(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    ErChain,
    ErGraph,
    Rsa,
    Coupled,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::ErChain => Model::ErChain,
            ModelArg::ErGraph => Model::ErGraph,
            ModelArg::Rsa => Model::Rsa,
            ModelArg::Coupled => Model::Coupled,
        }
    }
}

#[derive(Args, Default)]
struct Flags {
    /// JSON experiment config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Mean-degree parameter
    #[arg(long)]
    c: Option<f64>,
    /// Number of vertices / points
    #[arg(long)]
    n: Option<usize>,
    /// Number of replicates
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated c values (figure2)
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

impl Flags {
    fn resolve(self, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            out: self.out,
            seed: self.seed,
            model: self.model.map(Into::into),
            c: self.c,
            n: self.n,
            reps: self.reps,
            grid: self.grid,
            ..Default::default()
        };
        Ok(file.overlay(flags).with_defaults(defaults))
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fluid(f) => commands::fluid(&f.resolve(ExperimentConfig {
            c: Some(1.0),
            ..Default::default()
        })?),
        Command::Simulate(f) => commands::simulate(&f.resolve(ExperimentConfig {
            model: Some(Model::Coupled),
            c: Some(1.4),
            n: Some(2000),
            reps: Some(1),
            ..Default::default()
        })?),
        Command::Figure1(f) => commands::simulate(&f.resolve(commands::figure1_defaults())?),
        Command::Figure2(f) => commands::figure2(&f.resolve(ExperimentConfig {
            model: Some(Model::Rsa),
            n: Some(1000),
            reps: Some(20),
            level: Some(0.99),
            ..Default::default()
        })?),
        Command::Clt(f) => commands::clt(&f.resolve(ExperimentConfig {
            model: Some(Model::ErChain),
            c: Some(1.0),
            n: Some(10_000),
            reps: Some(2000),
            ..Default::default()
        })?),
        Command::Envelope(f) => commands::envelope(&f.resolve(ExperimentConfig {
            model: Some(Model::ErChain),
            c: Some(1.0),
            n: Some(10_000),
            reps: Some(100),
            ..Default::default()
        })?),
    }
}
