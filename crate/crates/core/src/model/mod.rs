//! The space-time Dirichlet process mixture on a linear network:
//! truncated stick-breaking weights, network-corrected Gaussian cluster
//! kernels, the blocked Metropolis-within-Gibbs sampler, and
//! Dahl's least-squares partition summary.

mod config;
mod dahl;
mod likelihood;
mod output;
mod sampler;
mod state;

pub use config::{FitConfig, WeightMode};
pub use dahl::{adjusted_rand_index, canonical_labels, dahl_select, DahlEstimate};
pub use likelihood::{log_likelihood, membership_probs, ModelContext};
pub use output::{read_run_dir, write_run_files, RunFiles};
pub use sampler::{
    run_chains, run_mcmc, sample_prior, update_concentration, update_sticks, Acceptance,
    PosteriorRun, Sampler, Snapshot,
};
pub use state::{log_stick_breaking, stick_breaking, Center, ChainState};
