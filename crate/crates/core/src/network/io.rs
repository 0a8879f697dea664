use std::path::Path;

use serde::Deserialize;

use super::LinearNetwork;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Deserialize)]
struct SegmentRow {
    seg_id: u64,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

/// Reads a `seg_id,x1,y1,x2,y2` file (meters, one segment per row).
pub fn read_network_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<LinearNetwork<T>> {
    let path = path.as_ref();
    let mut reader = crate::table::reader(path)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<SegmentRow>().enumerate() {
        let r = rec.map_err(|e| Error::BadRow {
            row: i + 1,
            msg: e.to_string(),
        })?;
        rows.push((r.seg_id, [T::of(r.x1), T::of(r.y1)], [T::of(r.x2), T::of(r.y2)]));
    }
    if rows.is_empty() {
        return Err(Error::Empty(path.display().to_string()));
    }
    LinearNetwork::from_segments(rows)
}
