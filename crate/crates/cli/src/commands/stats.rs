use std::collections::BTreeMap;
use std::path::PathBuf;

use linnet_dp::kernels::KernelConfig;
use linnet_dp::sumstats::{
    envelope_pvalue, linspace, multitype_pcf, scott_bandwidth, spatial_intensity, EnvelopeConfig,
    IntensityMode, PcfOptions,
};
use linnet_dp::{table, Event, Network};

use super::{ingest, load_network, required, settings, single_events, Job};
use crate::error::{CliError, CliResult};
use crate::manifest::InputFile;
use crate::settings::{Settings, ENVELOPE, INGEST, KERNEL, PCF};
use crate::Args;

/// `steps` equally spaced positive distances up to `r_max`, which
/// defaults to a quarter of the shorter side of the network's window.
fn r_grid(s: &Settings, net: &Network) -> CliResult<Vec<f64>> {
    let w = net.window();
    let r_max = s
        .get_auto::<f64>("r_max")?
        .unwrap_or(0.25 * w.width().min(w.height()));
    let steps: usize = s.get("r_steps")?;
    if !(r_max > 0.0) || steps == 0 {
        return Err(CliError::Input(format!("bad distance grid: r_max={r_max}, r_steps={steps}")));
    }
    Ok(linspace(r_max / steps as f64, r_max, steps))
}

fn kernels(s: &Settings, net: &Network, seed: u64) -> CliResult<KernelConfig<f64>> {
    let mc_seed = s
        .get_auto::<u64>("mc_seed")?
        .unwrap_or_else(|| seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
    Ok(KernelConfig::sample(net, s.get("mc_points")?, mc_seed))
}

pub fn kfun(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[INGEST, ENVELOPE, KERNEL], args)?;
    let net_path = required(&args.network, "network")?;
    let ev_path = single_events(args)?;
    let inputs = BTreeMap::from([
        ("network".to_string(), InputFile::hash(net_path)?),
        ("events".to_string(), InputFile::hash(ev_path)?),
    ]);
    let net = load_network(net_path)?;
    let ing = ingest(&net, ev_path, &s, None)?;
    let intensity = match s.raw("intensity") {
        "homogeneous" => IntensityMode::Homogeneous,
        "kernel" => IntensityMode::Kernel,
        other => {
            return Err(CliError::Input(format!(
                "intensity must be `homogeneous` or `kernel`, got `{other}`"
            )))
        }
    };
    let t_max: f64 = s.get("t_max")?;
    let t_steps: usize = s.get("t_steps")?;
    if !(t_max > 0.0) || t_steps == 0 {
        return Err(CliError::Input(format!("bad time grid: t_max={t_max}, t_steps={t_steps}")));
    }
    let seed: u64 = s.get("seed")?;
    let cfg = EnvelopeConfig {
        simulations: s.get("simulations")?,
        seed,
        intensity,
        r: r_grid(&s, &net)?,
        t: linspace(t_max / t_steps as f64, t_max, t_steps),
    };
    let kernels = kernels(&s, &net, seed)?;

    let mut job = Job::start("kfun", args, &s, inputs, BTreeMap::new())?;
    let res = envelope_pvalue(&ing.events, &net, &kernels, &cfg)?;
    res.write_csv(job.path("kfun.csv"), job.hash())?;
    let path = job.path("kfun_summary.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["events", "simulations", "T_obs", "p_value", "excluded_nodes"])
        .map_err(linnet_dp::Error::from)?;
    w.write_record([
        ing.events.len().to_string(),
        cfg.simulations.to_string(),
        res.t_observed.to_string(),
        res.p_value.to_string(),
        res.excluded_nodes.to_string(),
    ])
    .map_err(linnet_dp::Error::from)?;
    table::finish(w, &path)?;

    job.manifest.record("events_used", ing.events.len());
    job.manifest.record("events_rejected", ing.rejected);
    job.manifest.record("p_value", res.p_value);
    job.manifest.record("T_obs", res.t_observed);
    job.finish()
}

fn coords(events: &[Event]) -> Vec<[f64; 2]> {
    events.iter().map(|e| e.location.xy).collect()
}

pub fn pcf(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[INGEST, PCF, KERNEL], args)?;
    let net_path = required(&args.network, "network")?;
    let [p1, p2] = args.events.as_slice() else {
        return Err(CliError::Input("pcf needs exactly two --events files".into()));
    };
    let inputs = BTreeMap::from([
        ("network".to_string(), InputFile::hash(net_path)?),
        ("events_1".to_string(), InputFile::hash(p1)?),
        ("events_2".to_string(), InputFile::hash(p2)?),
    ]);
    let net = load_network(net_path)?;
    let a = ingest(&net, p1, &s, None)?;
    let b = ingest(&net, p2, &s, None)?;
    let r = r_grid(&s, &net)?;
    let kernels = kernels(&s, &net, 0)?;
    let lambda = |ev: &[Event]| -> CliResult<Vec<f64>> {
        let h = scott_bandwidth(&coords(ev))?;
        Ok(spatial_intensity(&kernels, ev, h, ev)?)
    };
    let (la, lb) = (lambda(&a.events)?, lambda(&b.events)?);
    let bandwidth = match s.get_auto::<f64>("bandwidth")? {
        Some(h) => h,
        None => {
            let mut pooled = coords(&a.events);
            pooled.extend(coords(&b.events));
            scott_bandwidth(&pooled)?
        }
    };
    let opts = PcfOptions {
        bandwidth,
        boundary_correction: s.get("boundary_correction")?,
    };
    let pts = |ev: &[Event]| ev.iter().map(|e| e.location).collect::<Vec<_>>();

    let mut job = Job::start("pcf", args, &s, inputs, BTreeMap::new())?;
    let g = multitype_pcf(&pts(&a.events), &pts(&b.events), &net, &la, &lb, &r, opts)?;
    let path = job.path("pcf.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["r", "g"]).map_err(linnet_dp::Error::from)?;
    for (ri, gi) in r.iter().zip(&g) {
        w.write_record([ri.to_string(), gi.to_string()])
            .map_err(linnet_dp::Error::from)?;
    }
    table::finish(w, &path)?;
    job.manifest.record("bandwidth", bandwidth);
    job.manifest.record("events_used", [a.events.len(), b.events.len()]);
    job.finish()
}
