//! One module per sub-command, sharing the job setup below: resolve
//! settings, hash inputs, write the manifest, run, write it again.

mod amenity;
mod assess;
mod fit;
mod postprocess;
mod simulate;
mod stats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use linnet_dp::events::{parse_time, prepare_events, read_events_csv, TimeFormat, TimeWindow};
use linnet_dp::model::{
    canonical_labels, read_run_dir, Center, FitConfig, PosteriorRun, RunFiles, WeightMode,
};
use linnet_dp::network::read_network_csv;
use linnet_dp::table::manifest_tag;
use linnet_dp::{Event, Network};

use crate::error::{CliError, CliResult};
use crate::manifest::{InputFile, Manifest, OutDir};
use crate::settings::{Group, Settings};
use crate::{Args, Command};

pub fn run(command: Command, args: &Args) -> CliResult<PathBuf> {
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot size thread pool: {e}")))?;
    }
    match command {
        Command::Fit => fit::run(args),
        Command::Postprocess => postprocess::run(args),
        Command::Assess => assess::run(args),
        Command::Kfun => stats::kfun(args),
        Command::Pcf => stats::pcf(args),
        Command::Simulate => simulate::run(args),
        Command::Amenity => amenity::run(args),
    }
}

/// A sub-command in progress: its manifest and the directory receiving
/// its artifacts.
pub struct Job {
    pub manifest: Manifest,
    pub out: OutDir,
    started: Instant,
}

impl Job {
    pub fn start(
        name: &str,
        args: &Args,
        settings: &Settings,
        inputs: BTreeMap<String, InputFile>,
        upstream: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let target = args
            .out
            .as_deref()
            .ok_or_else(|| CliError::Input("--out is required".into()))?;
        let threads = if args.threads > 0 {
            args.threads
        } else {
            rayon::current_num_threads()
        };
        let manifest = Manifest::new(name, settings, inputs, upstream, threads);
        let out = OutDir::create(target, args.force)?;
        manifest.write(out.dir())?;
        Ok(Job {
            manifest,
            out,
            started: Instant::now(),
        })
    }

    pub fn hash(&self) -> Option<&str> {
        Some(&self.manifest.hash)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.path(name)
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.manifest.status = "complete".into();
        self.manifest.wall_time_s = Some(self.started.elapsed().as_secs_f64());
        self.manifest.write(self.out.dir())?;
        self.out.commit()
    }
}

pub fn settings(groups: &[Group], args: &Args) -> CliResult<Settings> {
    Settings::resolve(groups, args.config.as_deref(), &args.overrides())
}

pub fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::Input(format!("--{flag} is required")))
}

pub fn single_events(args: &Args) -> CliResult<&Path> {
    match args.events.as_slice() {
        [p] => Ok(p),
        [] => Err(CliError::Input("--events is required".into())),
        _ => Err(CliError::Input("this command takes one --events file".into())),
    }
}

pub fn load_network(path: &Path) -> CliResult<Network> {
    Ok(read_network_csv(path)?)
}

pub fn fit_config(s: &Settings) -> CliResult<FitConfig> {
    let cfg = FitConfig {
        max_clusters: s.get("max_clusters")?,
        iterations: s.get("iterations")?,
        burn_in_fraction: s.get("burn_in_fraction")?,
        thin: s.get("thin")?,
        step_log_ws: s.get("step_log_ws")?,
        step_log_wt: s.get("step_log_wt")?,
        hyper_rate: s.get("hyper_rate")?,
        seed: s.get("seed")?,
        mc_points: s.get("mc_points")?,
        mc_seed: s.get_auto("mc_seed")?,
        pixel_rows: s.get("pixel_rows")?,
        pixel_cols: s.get("pixel_cols")?,
        weight_mode: s.get::<WeightMode>("weight_mode")?,
        ws_bounds: (s.get("ws_min")?, s.get("ws_max")?),
        wt_max: s.get("wt_max")?,
        init_ws: s.get("init_ws")?,
        init_wt: s.get("init_wt")?,
        init_bu: s.get("init_bu")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Events snapped onto the network with their time window.
pub struct Ingested {
    pub events: Vec<Event>,
    pub rejected: usize,
    pub window: TimeWindow,
}

/// Reads and projects an events file using the ingestion settings. An
/// explicit `window` takes precedence over `t_start`/`t_end`.
pub fn ingest(
    net: &Network,
    path: &Path,
    s: &Settings,
    window: Option<TimeWindow>,
) -> CliResult<Ingested> {
    let format: TimeFormat = s.get("time_format")?;
    let raw = read_events_csv(path, format)?;
    let window = match window {
        Some(w) => w,
        None => {
            let times: Vec<f64> = raw.iter().map(|r| r.raw_time).collect();
            let data = TimeWindow::from_data(&times);
            let bound = |key: &str| -> CliResult<Option<f64>> {
                match s.raw(key) {
                    "auto" => Ok(None),
                    v => Ok(Some(parse_time(v, format)?)),
                }
            };
            match (bound("t_start")?, bound("t_end")?) {
                (Some(a), Some(b)) => TimeWindow::new(a, b)?,
                (a, b) => {
                    let d = data.map_err(|e| {
                        CliError::Input(format!(
                            "{}: cannot infer the time window ({e}); set t_start and t_end",
                            path.display()
                        ))
                    })?;
                    TimeWindow::new(a.unwrap_or(d.start), b.unwrap_or(d.end))?
                }
            }
        }
    };
    let cutoff: f64 = s.get("cutoff_m")?;
    let p = prepare_events(net, &raw, cutoff, &window)?;
    if p.events.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no event lies within {cutoff} m of the network",
            path.display()
        )));
    }
    Ok(Ingested {
        events: p.events,
        rejected: p.rejected.len(),
        window,
    })
}

/// A completed fit read back from disk.
pub struct LoadedRun {
    pub manifest: Manifest,
    pub settings: Settings,
    pub network: InputFile,
    pub net: Network,
    pub run: PosteriorRun<f64>,
    pub window: TimeWindow,
}

impl LoadedRun {
    /// Opens `--run`, verifying that the network (the recorded one, or
    /// `--network` if given) and every run file belong to it.
    pub fn open(args: &Args) -> CliResult<Self> {
        let dir = required(&args.run, "run")?;
        let manifest = Manifest::read(dir)?;
        if manifest.command != "fit" || manifest.status != "complete" {
            return Err(CliError::Consistency(format!(
                "{} is not a completed fit (command `{}`, status `{}`)",
                dir.display(),
                manifest.command,
                manifest.status
            )));
        }
        let recorded = manifest
            .inputs
            .get("network")
            .ok_or_else(|| CliError::Consistency("run manifest lists no network".into()))?;
        let network = check_input(args.network.as_deref(), recorded, "network")?;
        let files = RunFiles::in_dir(dir);
        for f in files.all() {
            if !f.exists() {
                return Err(CliError::Input(format!("missing run file {}", f.display())));
            }
            let tag = manifest_tag(f)?;
            if tag.as_deref() != Some(manifest.hash.as_str()) {
                return Err(CliError::Consistency(format!(
                    "{} carries manifest {} but the run is {}",
                    f.display(),
                    tag.unwrap_or_else(|| "<none>".into()),
                    manifest.hash
                )));
            }
        }
        let settings = Settings::from_map(manifest.settings.clone());
        let net = load_network(&network.path)?;
        let snapshots = read_run_dir(&files, &net)?;
        let run = PosteriorRun {
            config: fit_config(&settings)?,
            chain: 0,
            snapshots,
            acceptance: Default::default(),
        };
        let window = TimeWindow::new(
            manifest.result_f64("time_window_start")?,
            manifest.result_f64("time_window_end")?,
        )?;
        Ok(LoadedRun {
            manifest,
            settings,
            network,
            net,
            run,
            window,
        })
    }

    /// The fitted events, re-ingested from the recorded (or overriding)
    /// events file.
    pub fn events(&self, args: &Args) -> CliResult<(InputFile, Ingested)> {
        let recorded = self
            .manifest
            .inputs
            .get("events")
            .ok_or_else(|| CliError::Consistency("run manifest lists no events".into()))?;
        let given = match args.events.as_slice() {
            [] => None,
            [p] => Some(p.as_path()),
            _ => return Err(CliError::Input("this command takes one --events file".into())),
        };
        let file = check_input(given, recorded, "events")?;
        let ing = ingest(&self.net, &file.path, &self.settings, Some(self.window))?;
        if ing.events.len() != self.run.num_events() {
            return Err(CliError::Consistency(format!(
                "{} yields {} events but the run has {}",
                file.path.display(),
                ing.events.len(),
                self.run.num_events()
            )));
        }
        Ok((file, ing))
    }

    /// Inputs and upstream entries for a job derived from this run.
    pub fn lineage(&self) -> (BTreeMap<String, InputFile>, BTreeMap<String, String>) {
        (
            BTreeMap::from([("network".to_string(), self.network.clone())]),
            BTreeMap::from([("run".to_string(), self.manifest.hash.clone())]),
        )
    }
}

fn check_input(given: Option<&Path>, recorded: &InputFile, role: &str) -> CliResult<InputFile> {
    let file = InputFile::hash(given.unwrap_or(&recorded.path))?;
    if file.sha256 != recorded.sha256 {
        return Err(CliError::Consistency(format!(
            "{} file {} (sha256 {}) is not the one the run was fitted to (sha256 {})",
            role,
            file.path.display(),
            file.sha256,
            recorded.sha256
        )));
    }
    Ok(file)
}

/// One cluster of the least-squares partition.
pub struct Cluster {
    pub center: Center<f64>,
    pub size: usize,
}

/// The selected partition relabeled `0..k` by first appearance, with the
/// matching centers, and the 0-based snapshot it came from.
pub fn dahl_clusters(run: &PosteriorRun<f64>) -> CliResult<(usize, f64, Vec<usize>, Vec<Cluster>)> {
    let dahl = run.dahl()?;
    let state = &run.snapshots[dahl.index].state;
    let labels = canonical_labels(&dahl.memberships);
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters: Vec<Option<Cluster>> = (0..k).map(|_| None).collect();
    for (&raw, &lab) in dahl.memberships.iter().zip(&labels) {
        clusters[lab]
            .get_or_insert(Cluster {
                center: state.centers[raw],
                size: 0,
            })
            .size += 1;
    }
    Ok((
        dahl.index,
        dahl.loss,
        labels,
        clusters.into_iter().map(|c| c.expect("every label occurs")).collect(),
    ))
}
