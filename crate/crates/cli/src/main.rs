//! `linnet-dp`: batch driver for fitting space-time Dirichlet process
//! mixtures on street networks and computing the accompanying summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "linnet-dp", version, about = "Space-time cluster detection on linear networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: Args,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit the mixture by MCMC and write per-iteration samples.
    Fit,
    /// Summarize a fit by its least-squares partition.
    Postprocess,
    /// Compare fitted and observed cell proportions.
    Assess,
    /// K-function envelopes and the Poissonness p-value.
    Kfun,
    /// Multitype pair correlation function of two event files.
    Pcf,
    /// Simulate events from a planted mixture.
    Simulate,
    /// Amenity mix around the fitted cluster centers.
    Amenity,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// Network file (`seg_id,x1,y1,x2,y2`).
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Events file (`x,y,t`); `pcf` takes two.
    #[arg(long, global = true)]
    pub events: Vec<PathBuf>,
    /// Amenities file (`x,y,type`).
    #[arg(long, global = true)]
    pub amenities: Option<PathBuf>,
    /// Directory of a completed `fit`.
    #[arg(long, global = true)]
    pub run: Option<PathBuf>,
    /// Output directory; must not exist unless `--force` is given.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub force: bool,
    /// `key=value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one setting (repeatable).
    #[arg(long = "set", global = true, value_parser = settings::parse_override)]
    pub set: Vec<(String, String)>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    #[arg(long, global = true)]
    pub max_clusters: Option<usize>,
    /// Burn-in as a fraction of the iterations.
    #[arg(long, global = true)]
    pub burnin: Option<f64>,
    #[arg(long, global = true)]
    pub thin: Option<usize>,
    /// Number of simulated patterns for K-function envelopes.
    #[arg(long, global = true)]
    pub mmax_envelopes: Option<usize>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Maximum snapping distance from an event to the network (meters).
    #[arg(long, global = true)]
    pub cutoff_m: Option<f64>,
    /// `float` or `date`.
    #[arg(long, global = true)]
    pub time_format: Option<String>,
    #[arg(long, global = true)]
    pub t_start: Option<String>,
    #[arg(long, global = true)]
    pub t_end: Option<String>,
}

impl Args {
    /// Dedicated flags expressed as settings overrides, followed by `--set`.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("iterations", self.iters.map(|v| v.to_string()));
        push("max_clusters", self.max_clusters.map(|v| v.to_string()));
        push("burn_in_fraction", self.burnin.map(|v| v.to_string()));
        push("thin", self.thin.map(|v| v.to_string()));
        push("simulations", self.mmax_envelopes.map(|v| v.to_string()));
        push("cutoff_m", self.cutoff_m.map(|v| v.to_string()));
        push("time_format", self.time_format.clone());
        push("t_start", self.t_start.clone());
        push("t_end", self.t_end.clone());
        out.extend(self.set.iter().cloned());
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.args) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("linnet-dp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
