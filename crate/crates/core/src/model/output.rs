use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::LinearNetwork;
use crate::scalar::Scalar;
use crate::table;

use super::sampler::Snapshot;
use super::state::{Center, ChainState};

/// Paths of the per-iteration files of a fit.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub samples: PathBuf,
    pub centers: PathBuf,
    pub memberships: PathBuf,
    pub weights: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let d = dir.as_ref();
        RunFiles {
            samples: d.join("samples.csv"),
            centers: d.join("centers.csv"),
            memberships: d.join("memberships.csv"),
            weights: d.join("weights.csv"),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [&self.samples, &self.centers, &self.memberships, &self.weights]
    }
}

/// Writes the retained snapshots. Clusters and iterations are reported
/// 1-based.
pub fn write_run_files<T: Scalar>(
    files: &RunFiles,
    snapshots: &[Snapshot<T>],
    net: &LinearNetwork<T>,
    manifest: Option<&str>,
) -> Result<()> {
    let mut samples = table::writer(&files.samples, manifest)?;
    samples.write_record(["iter", "w_s", "w_t", "b_u", "n_nonempty"])?;
    let mut centers = table::writer(&files.centers, manifest)?;
    centers.write_record(["iter", "cluster", "seg_id", "offset", "x", "y", "t"])?;
    let mut members = table::writer(&files.memberships, manifest)?;
    members.write_record(["iter", "event_id", "cluster"])?;
    let mut weights = table::writer(&files.weights, manifest)?;
    weights.write_record(["iter", "cluster", "u", "log_1m_u", "q"])?;
    for snap in snapshots {
        let s = &snap.state;
        let it = (snap.iteration + 1).to_string();
        samples.write_record([
            it.clone(),
            s.w_s.to_string(),
            s.w_t.to_string(),
            s.b_u.to_string(),
            s.num_nonempty().to_string(),
        ])?;
        for (j, c) in s.centers.iter().enumerate() {
            centers.write_record([
                it.clone(),
                (j + 1).to_string(),
                net.segment(c.location.segment).id.to_string(),
                c.location.offset.to_string(),
                c.location.xy[0].to_string(),
                c.location.xy[1].to_string(),
                c.time.to_string(),
            ])?;
            weights.write_record([
                it.clone(),
                (j + 1).to_string(),
                s.sticks[j].to_string(),
                s.stick_log_complements[j].to_string(),
                s.weights[j].to_string(),
            ])?;
        }
        for (i, g) in s.memberships.iter().enumerate() {
            members.write_record([it.clone(), (i + 1).to_string(), (g + 1).to_string()])?;
        }
    }
    table::finish(samples, &files.samples)?;
    table::finish(centers, &files.centers)?;
    table::finish(members, &files.memberships)?;
    table::finish(weights, &files.weights)
}

#[derive(Deserialize)]
struct SampleRow {
    iter: usize,
    w_s: f64,
    w_t: f64,
    b_u: f64,
}

#[derive(Deserialize)]
struct CenterRow {
    iter: usize,
    cluster: usize,
    seg_id: u64,
    offset: f64,
    t: f64,
}

#[derive(Deserialize)]
struct MemberRow {
    iter: usize,
    event_id: usize,
    cluster: usize,
}

#[derive(Deserialize)]
struct WeightRow {
    iter: usize,
    cluster: usize,
    u: f64,
    log_1m_u: f64,
    q: f64,
}

fn rows<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    let mut rd = table::reader(path)?;
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::BadRow {
                row: i + 1,
                msg: format!("{}: {e}", path.display()),
            })
        })
        .collect()
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {msg}", path.display()))
}

/// Reads snapshots written by [`write_run_files`] back against the same
/// network.
pub fn read_run_dir<T: Scalar>(
    files: &RunFiles,
    net: &LinearNetwork<T>,
) -> Result<Vec<Snapshot<T>>> {
    let samples: Vec<SampleRow> = rows(&files.samples)?;
    if samples.is_empty() {
        return Err(Error::Empty(files.samples.display().to_string()));
    }
    let mut states: BTreeMap<usize, ChainState<T>> = samples
        .iter()
        .map(|r| {
            (
                r.iter,
                ChainState {
                    w_s: T::of(r.w_s),
                    w_t: T::of(r.w_t),
                    b_u: T::of(r.b_u),
                    sticks: Vec::new(),
                    stick_log_complements: Vec::new(),
                    weights: Vec::new(),
                    memberships: Vec::new(),
                    centers: Vec::new(),
                },
            )
        })
        .collect();
    for r in rows::<CenterRow>(&files.centers)? {
        let s = states
            .get_mut(&r.iter)
            .ok_or_else(|| bad(&files.centers, format!("iteration {} not in samples", r.iter)))?;
        if r.cluster != s.centers.len() + 1 {
            return Err(bad(&files.centers, "clusters out of order"));
        }
        let k = net
            .segment_by_id(r.seg_id)
            .ok_or_else(|| bad(&files.centers, format!("unknown segment {}", r.seg_id)))?;
        s.centers.push(Center {
            location: net.point(k, T::of(r.offset)),
            pixel: None,
            time: T::of(r.t),
        });
    }
    for r in rows::<WeightRow>(&files.weights)? {
        let s = states
            .get_mut(&r.iter)
            .ok_or_else(|| bad(&files.weights, format!("iteration {} not in samples", r.iter)))?;
        if r.cluster != s.sticks.len() + 1 {
            return Err(bad(&files.weights, "clusters out of order"));
        }
        s.sticks.push(T::of(r.u));
        s.stick_log_complements.push(T::of(r.log_1m_u));
        s.weights.push(T::of(r.q));
    }
    for r in rows::<MemberRow>(&files.memberships)? {
        let s = states
            .get_mut(&r.iter)
            .ok_or_else(|| bad(&files.memberships, format!("iteration {} not in samples", r.iter)))?;
        if r.event_id != s.memberships.len() + 1 || r.cluster == 0 {
            return Err(bad(&files.memberships, "rows out of order"));
        }
        s.memberships.push(r.cluster - 1);
    }
    let n = states.values().next().map_or(0, |s| s.memberships.len());
    states
        .into_iter()
        .map(|(it, state)| {
            let m = state.centers.len();
            if m == 0 || state.weights.len() != m || state.memberships.len() != n {
                return Err(bad(&files.samples, format!("iteration {it} is incomplete")));
            }
            if state.memberships.iter().any(|&g| g >= m) {
                return Err(bad(&files.memberships, format!("iteration {it}: cluster out of range")));
            }
            Ok(Snapshot { iteration: it - 1, state })
        })
        .collect()
}
