use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use linnet_dp::events::write_events_csv;
use linnet_dp::model::Center;
use linnet_dp::sim::{sim_mixture, sim_poisson, write_truth_csv, MixtureParams, PoissonCount, TimeMode};
use linnet_dp::{table, Network};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{load_network, required, settings, Job};
use crate::error::{CliError, CliResult};
use crate::manifest::InputFile;
use crate::settings::SIMULATE;
use crate::Args;

/// Parses `x:y:t;x:y:t;...`, snapping each location onto the network.
fn parse_centers(spec: &str, net: &Network) -> CliResult<Vec<Center<f64>>> {
    spec.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let v: Vec<f64> = c
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Input(format!("bad center `{c}`: {e}")))?;
            let [x, y, t] = v[..] else {
                return Err(CliError::Input(format!("center `{c}` must be x:y:t")));
            };
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Input(format!("center time {t} outside [0, 1]")));
            }
            Ok(Center {
                location: net.nearest_point([x, y]).point,
                pixel: None,
                time: t,
            })
        })
        .collect()
}

pub fn run(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[SIMULATE], args)?;
    let net_path = required(&args.network, "network")?;
    let inputs = BTreeMap::from([("network".to_string(), InputFile::hash(net_path)?)]);
    let net = load_network(net_path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.get("seed")?);
    let centers = match s.raw("centers") {
        "auto" => sim_poisson(&net, PoissonCount::Fixed(s.get("clusters")?), &mut rng)?
            .into_iter()
            .map(|e| Center {
                location: e.location,
                pixel: None,
                time: e.time,
            })
            .collect(),
        spec => parse_centers(spec, &net)?,
    };
    if centers.is_empty() {
        return Err(CliError::Input("no cluster centers to simulate from".into()));
    }
    let mode = match s.raw("time_mode") {
        "truncated" => TimeMode::Truncated,
        "untruncated" => TimeMode::Untruncated,
        other => {
            return Err(CliError::Input(format!(
                "time_mode must be `truncated` or `untruncated`, got `{other}`"
            )))
        }
    };
    let params = MixtureParams {
        weights: vec![1.0 / centers.len() as f64; centers.len()],
        centers,
        w_s: s.get("w_s")?,
        w_t: s.get("w_t")?,
    };

    let mut job = Job::start("simulate", args, &s, inputs, BTreeMap::new())?;
    let truth = sim_mixture(&net, &params, s.get("events")?, mode, &mut rng)?;

    let path = job.path("events.csv");
    let io = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
    writeln!(f, "# manifest={}", job.manifest.hash).map_err(io)?;
    write_events_csv(&mut f, &truth.events)?;
    f.flush().map_err(io)?;
    write_truth_csv(job.path("truth.csv"), &truth, job.hash())?;

    let path = job.path("truth_centers.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["cluster", "seg_id", "offset", "x", "y", "t", "outside_mass"])
        .map_err(linnet_dp::Error::from)?;
    for (j, (c, m)) in params.centers.iter().zip(&truth.outside_mass).enumerate() {
        let loc = &c.location;
        w.write_record([
            (j + 1).to_string(),
            net.segment(loc.segment).id.to_string(),
            loc.offset.to_string(),
            loc.xy[0].to_string(),
            loc.xy[1].to_string(),
            c.time.to_string(),
            m.to_string(),
        ])
        .map_err(linnet_dp::Error::from)?;
    }
    table::finish(w, &path)?;
    job.manifest.record("max_outside_mass", truth.outside_mass.iter().copied().fold(0.0, f64::max));
    job.finish()
}
