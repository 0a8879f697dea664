use std::collections::BTreeMap;
use std::path::PathBuf;

use linnet_dp::model::{run_mcmc, write_run_files, ModelContext, RunFiles};

use super::{fit_config, ingest, load_network, required, settings, single_events, Job};
use crate::error::CliResult;
use crate::manifest::InputFile;
use crate::settings::{FIT, INGEST, KERNEL};
use crate::Args;

pub fn run(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[INGEST, FIT, KERNEL], args)?;
    let cfg = fit_config(&s)?;
    let net_path = required(&args.network, "network")?;
    let ev_path = single_events(args)?;
    let inputs = BTreeMap::from([
        ("network".to_string(), InputFile::hash(net_path)?),
        ("events".to_string(), InputFile::hash(ev_path)?),
    ]);
    let net = load_network(net_path)?;
    let ing = ingest(&net, ev_path, &s, None)?;

    let mut job = Job::start("fit", args, &s, inputs, BTreeMap::new())?;
    let kernels = cfg.kernels(&net);
    let pixels = cfg.pixels(&net);
    let ctx = ModelContext {
        net: &net,
        kernels: &kernels,
        pixels: &pixels,
    };
    let run = run_mcmc(&ing.events, ctx, &cfg)?;
    write_run_files(&RunFiles::in_dir(job.out.dir()), &run.snapshots, &net, job.hash())?;

    let m = &mut job.manifest;
    m.record("events_used", ing.events.len());
    m.record("events_rejected", ing.rejected);
    m.record("time_window_start", ing.window.start);
    m.record("time_window_end", ing.window.end);
    m.record("mc_seed", cfg.effective_mc_seed());
    m.record("burn_in", cfg.burn_in());
    m.record("snapshots", run.snapshots.len());
    m.record("theta_acceptance", run.acceptance.theta_rate());
    m.record("center_acceptance", run.acceptance.center_rate());
    m.record("isolated_rejections", run.acceptance.isolated_rejections);
    m.record("degenerate_memberships", run.acceptance.degenerate_memberships);
    m.record("mean_w_s", run.mean_ws());
    m.record("mean_w_t", run.mean_wt());
    m.record("mean_b_u", run.mean_bu());
    job.finish()
}
