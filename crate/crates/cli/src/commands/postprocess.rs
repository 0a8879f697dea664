use std::path::PathBuf;

use linnet_dp::events::{quarter_label, TimeFormat};
use linnet_dp::table;

use super::{dahl_clusters, Job, LoadedRun};
use crate::error::CliResult;
use crate::settings::Settings;
use crate::Args;

pub fn run(args: &Args) -> CliResult<PathBuf> {
    let run = LoadedRun::open(args)?;
    let format: TimeFormat = run.settings.get("time_format")?;
    let (inputs, upstream) = run.lineage();
    let mut job = Job::start("postprocess", args, &Settings::default(), inputs, upstream)?;
    let (index, loss, labels, clusters) = dahl_clusters(&run.run)?;

    let path = job.path("clusters.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["cluster", "seg_id", "offset", "x", "y", "t", "size", "quarter"])
        .map_err(linnet_dp::Error::from)?;
    for (k, c) in clusters.iter().enumerate() {
        let loc = &c.center.location;
        let quarter = match format {
            TimeFormat::Date => quarter_label(run.window.denormalize(c.center.time)),
            TimeFormat::Float => String::new(),
        };
        w.write_record([
            (k + 1).to_string(),
            run.net.segment(loc.segment).id.to_string(),
            loc.offset.to_string(),
            loc.xy[0].to_string(),
            loc.xy[1].to_string(),
            c.center.time.to_string(),
            c.size.to_string(),
            quarter,
        ])
        .map_err(linnet_dp::Error::from)?;
    }
    table::finish(w, &path)?;

    let path = job.path("partition.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["event_id", "cluster"]).map_err(linnet_dp::Error::from)?;
    for (i, g) in labels.iter().enumerate() {
        w.write_record([(i + 1).to_string(), (g + 1).to_string()])
            .map_err(linnet_dp::Error::from)?;
    }
    table::finish(w, &path)?;

    job.manifest.record("dahl_iter", run.run.snapshots[index].iteration + 1);
    job.manifest.record("dahl_loss", loss);
    job.manifest.record("clusters", clusters.len());
    job.finish()
}
