use std::path::PathBuf;

use linnet_dp::sumstats::{amenity_mix, read_amenities_csv, Category};
use linnet_dp::table;

use super::{dahl_clusters, required, settings, Job, LoadedRun};
use crate::error::CliResult;
use crate::manifest::InputFile;
use crate::settings::AMENITY;
use crate::Args;

pub fn run(args: &Args) -> CliResult<PathBuf> {
    let s = settings(&[AMENITY], args)?;
    let am_path = required(&args.amenities, "amenities")?;
    let run = LoadedRun::open(args)?;
    let (mut inputs, upstream) = run.lineage();
    inputs.insert("amenities".into(), InputFile::hash(am_path)?);
    let (amenities, skipped) = read_amenities_csv(am_path)?;
    let radius = s
        .get_auto::<f64>("radius")?
        .unwrap_or(2.0 * run.run.mean_ws());

    let mut job = Job::start("amenity", args, &s, inputs, upstream)?;
    let (_, _, _, clusters) = dahl_clusters(&run.run)?;
    let centers: Vec<[f64; 2]> = clusters.iter().map(|c| c.center.location.xy).collect();
    let mix = amenity_mix(&centers, &amenities, radius)?;

    let path = job.path("amenity.csv");
    let mut w = table::writer(&path, job.hash())?;
    let mut header = vec!["cluster".to_string(), "x".into(), "y".into()];
    header.extend(Category::ALL.iter().map(|c| c.name().to_string()));
    w.write_record(&header).map_err(linnet_dp::Error::from)?;
    for (k, (xy, m)) in centers.iter().zip(&mix).enumerate() {
        let mut row = vec![(k + 1).to_string(), xy[0].to_string(), xy[1].to_string()];
        match m {
            Some(p) => row.extend(p.iter().map(|v| v.to_string())),
            None => row.extend(["", "", ""].map(String::from)),
        }
        w.write_record(&row).map_err(linnet_dp::Error::from)?;
    }
    table::finish(w, &path)?;
    job.manifest.record("radius", radius);
    job.manifest.record("amenities_used", amenities.len());
    job.manifest.record("amenities_skipped", skipped);
    job.finish()
}
