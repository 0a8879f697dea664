use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Entertainment,
    Financial,
    Eatery,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Entertainment, Category::Financial, Category::Eatery];

    /// Maps a raw amenity type onto its group; unknown types are `None`.
    pub fn from_raw(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entertainment" | "bar" | "nightclub" | "pub" => Some(Category::Entertainment),
            "financial" | "atm" | "bank" => Some(Category::Financial),
            "eatery" | "cafe" | "restaurant" => Some(Category::Eatery),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Entertainment => "entertainment",
            Category::Financial => "financial",
            Category::Eatery => "eatery",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amenity {
    pub xy: [f64; 2],
    pub category: Category,
}

/// Reads `x,y,type` (or `category`); rows of other types are skipped and
/// counted.
pub fn read_amenities_csv(path: impl AsRef<Path>) -> Result<(Vec<Amenity>, usize)> {
    let path = path.as_ref();
    let mut rd = table::reader(path)?;
    let headers = rd.headers()?.clone();
    let col = |names: &[&str]| {
        headers
            .iter()
            .position(|h| names.contains(&h))
            .ok_or_else(|| Error::InvalidArgument(format!("{}: missing column {}", path.display(), names[0])))
    };
    let (cx, cy, ct) = (col(&["x"])?, col(&["y"])?, col(&["type", "category", "amenity"])?);
    let mut out = Vec::new();
    let mut skipped = 0;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| {
            rec.get(c).unwrap_or("").parse::<f64>().map_err(|e| Error::BadRow {
                row: i + 1,
                msg: e.to_string(),
            })
        };
        match Category::from_raw(rec.get(ct).unwrap_or("")) {
            Some(category) => out.push(Amenity { xy: [num(cx)?, num(cy)?], category }),
            None => skipped += 1,
        }
    }
    if out.is_empty() {
        return Err(Error::Empty(path.display().to_string()));
    }
    Ok((out, skipped))
}

/// Per-cluster category proportions; `None` when nothing lies in range.
pub type AmenityMix = Vec<Option<[f64; 3]>>;

/// Weighted category mix within a planar radius of each center. A
/// category's count is weighted by (all amenities) / (amenities of that
/// category) over the whole data set, so rare categories are not drowned
/// out by common ones.
pub fn amenity_mix<T: Scalar>(centers: &[[T; 2]], amenities: &[Amenity], radius: f64) -> Result<AmenityMix> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let mut totals = [0usize; 3];
    for a in amenities {
        totals[a.category.index()] += 1;
    }
    let all = amenities.len() as f64;
    let weight: Vec<f64> = totals
        .iter()
        .map(|&c| if c > 0 { all / c as f64 } else { 0.0 })
        .collect();
    let r2 = radius * radius;
    Ok(centers
        .iter()
        .map(|c| {
            let (cx, cy) = (c[0].f64(), c[1].f64());
            let mut counts = [0usize; 3];
            for a in amenities {
                let (dx, dy) = (a.xy[0] - cx, a.xy[1] - cy);
                if dx * dx + dy * dy <= r2 {
                    counts[a.category.index()] += 1;
                }
            }
            let w: Vec<f64> = (0..3).map(|k| counts[k] as f64 * weight[k]).collect();
            let s: f64 = w.iter().sum();
            (s > 0.0).then(|| [w[0] / s, w[1] / s, w[2] / s])
        })
        .collect())
}
