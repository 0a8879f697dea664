use std::path::PathBuf;

use linnet_dp::assess::{
    assess_scatter, observed_props, point_estimate, theoretical_props, theoretical_props_per_draw,
    CellTable, GridSpec,
};
use linnet_dp::table;

use super::{fit_config, settings, Job, LoadedRun};
use crate::error::{CliError, CliResult};
use crate::settings::ASSESS;
use crate::Args;

pub fn run(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[ASSESS], args)?;
    let spec = GridSpec {
        sub: [s.get("sub_x")?, s.get("sub_y")?, s.get("sub_t")?],
        coarse: [s.get("coarse_x")?, s.get("coarse_y")?, s.get("coarse_t")?],
    };
    spec.validate()?;
    let run = LoadedRun::open(args)?;
    let (events_file, ing) = run.events(args)?;
    let (mut inputs, upstream) = run.lineage();
    inputs.insert("events".into(), events_file);
    let mut job = Job::start("assess", args, &s, inputs, upstream)?;

    let kernels = fit_config(&run.settings)?.kernels(&run.net);
    let theory = match s.raw("estimate") {
        "point" => theoretical_props(&point_estimate(&run.run)?, &run.net, &kernels, &spec)?,
        "per_draw" => theoretical_props_per_draw(&run.run, &run.net, &kernels, &spec)?,
        other => {
            return Err(CliError::Input(format!(
                "estimate must be `point` or `per_draw`, got `{other}`"
            )))
        }
    };
    let observed = observed_props(&ing.events, run.net.window(), &spec)?;
    let cells = CellTable {
        spec,
        theory,
        observed,
    };
    cells.write_csv(job.path("assess.csv"), job.hash())?;
    let summary = assess_scatter(&cells);

    let path = job.path("assess_summary.csv");
    let mut w = table::writer(&path, job.hash())?;
    w.write_record(["cells", "correlation", "rmse"]).map_err(linnet_dp::Error::from)?;
    w.write_record([
        cells.theory.len().to_string(),
        summary.correlation.map_or_else(|| "NA".to_string(), |c| c.to_string()),
        summary.rmse.to_string(),
    ])
    .map_err(linnet_dp::Error::from)?;
    table::finish(w, &path)?;

    job.manifest.record("correlation", summary.correlation);
    job.manifest.record("rmse", summary.rmse);
    job.finish()
}
