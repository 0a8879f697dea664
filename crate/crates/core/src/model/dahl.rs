use std::collections::HashMap;

use crate::error::{Error, Result};

/// The retained iteration closest to the posterior co-clustering matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DahlEstimate {
    /// Position among the supplied partitions.
    pub index: usize,
    /// `Σᵢⱼ (𝟙{gᵢ = gⱼ} − dᵢⱼ)²` at the selected partition.
    pub loss: f64,
    pub memberships: Vec<usize>,
}

/// Least-squares partition selection. Co-clustering frequencies are kept
/// as integer counts so the loss comparison is exact; ties go to the
/// earliest iteration.
pub fn dahl_select<P: AsRef<[usize]>>(partitions: &[P]) -> Result<DahlEstimate> {
    let first = partitions
        .first()
        .ok_or_else(|| Error::Empty("no retained iterations".into()))?
        .as_ref();
    let n = first.len();
    if partitions.iter().any(|p| p.as_ref().len() != n) {
        return Err(Error::InvalidArgument("partitions differ in length".into()));
    }
    let b = partitions.len() as i64;
    let mut together = vec![0u32; n * n];
    for p in partitions {
        let p = p.as_ref();
        for i in 0..n {
            for j in (i + 1)..n {
                if p[i] == p[j] {
                    together[i * n + j] += 1;
                }
            }
        }
    }
    let mut best: Option<(usize, i64)> = None;
    for (idx, p) in partitions.iter().enumerate() {
        let p = p.as_ref();
        let mut loss: i64 = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let same = if p[i] == p[j] { b } else { 0 };
                let diff = same - together[i * n + j] as i64;
                loss += diff * diff;
            }
        }
        if best.is_none_or(|(_, l)| loss < l) {
            best = Some((idx, loss));
        }
    }
    let (index, loss) = best.expect("at least one partition");
    Ok(DahlEstimate {
        index,
        // both triangles, rescaled from counts to frequencies
        loss: 2.0 * loss as f64 / (b * b) as f64,
        memberships: partitions[index].as_ref().to_vec(),
    })
}

/// Relabels a partition by order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&g| {
            let next = map.len();
            *map.entry(g).or_insert(next)
        })
        .collect()
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let (a, b) = (canonical_labels(a), canonical_labels(b));
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * kb + y] += 1;
    }
    let rows: Vec<u64> = (0..ka).map(|i| table[i * kb..(i + 1) * kb].iter().sum()).collect();
    let cols: Vec<u64> = (0..kb).map(|j| (0..ka).map(|i| table[i * kb + j]).sum()).collect();
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sa: f64 = rows.iter().map(|&c| choose2(c)).sum();
    let sb: f64 = cols.iter().map(|&c| choose2(c)).sum();
    let expected = sa * sb / choose2(a.len() as u64);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
