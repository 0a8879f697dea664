//! Linear networks: a finite set of straight segments in a metric plane
//! that meet only at shared endpoints.

mod grid;
mod io;
mod path;
mod project;
mod sample;

use std::collections::HashMap;

pub use grid::{CellPiece, GridGeometry, PixelGrid};
pub use io::read_network_csv;
pub use path::{DistanceMap, SphereCounter};
pub use project::Projection;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Endpoints closer than this (meters) are merged into one vertex.
pub const VERTEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    /// Identifier from the input file.
    pub id: u64,
    pub a: usize,
    pub b: usize,
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub xmin: T,
    pub ymin: T,
    pub xmax: T,
    pub ymax: T,
}

impl<T: Scalar> Window<T> {
    pub fn width(&self) -> T {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> T {
        self.ymax - self.ymin
    }
}

/// A location on the network: host segment, fractional offset from the
/// segment's first endpoint, and the planar coordinates it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetPoint<T> {
    pub segment: usize,
    pub offset: T,
    pub xy: [T; 2],
}

#[derive(Debug, Clone)]
pub struct LinearNetwork<T> {
    vertices: Vec<[T; 2]>,
    segments: Vec<Segment>,
    lengths: Vec<T>,
    /// Per vertex: (neighbor vertex, segment index).
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Running sum of lengths, for length-proportional segment choice.
    cumulative: Vec<T>,
    total_length: T,
    window: Window<T>,
}

impl<T: Scalar> LinearNetwork<T> {
    /// Builds a network from `(segment id, endpoint, endpoint)` rows.
    ///
    /// Endpoints within [`VERTEX_TOLERANCE`] of an existing vertex are
    /// merged into it. Row numbers in errors are 1-based.
    pub fn from_segments<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, [T; 2], [T; 2])>,
    {
        let mut vertices: Vec<[T; 2]> = Vec::new();
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut segments = Vec::new();
        let tol = VERTEX_TOLERANCE;

        let mut vertex_id = |p: [T; 2], vertices: &mut Vec<[T; 2]>| -> usize {
            let kx = (p[0].f64() / tol).floor() as i64;
            let ky = (p[1].f64() / tol).floor() as i64;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = buckets.get(&(kx + dx, ky + dy)) {
                        for &id in ids {
                            let q = vertices[id];
                            let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                            if d.f64() <= tol {
                                return id;
                            }
                        }
                    }
                }
            }
            vertices.push(p);
            let id = vertices.len() - 1;
            buckets.entry((kx, ky)).or_default().push(id);
            id
        };

        for (row, (id, p, q)) in rows.into_iter().enumerate() {
            let row = row + 1;
            if !(p.iter().chain(q.iter()).all(|c| c.is_finite())) {
                return Err(Error::BadRow {
                    row,
                    msg: "non-finite coordinate".into(),
                });
            }
            let a = vertex_id(p, &mut vertices);
            let b = vertex_id(q, &mut vertices);
            if a == b {
                return Err(Error::ZeroLengthSegment { row });
            }
            segments.push(Segment { id, a, b });
        }
        if segments.is_empty() {
            return Err(Error::Empty("network".into()));
        }

        let lengths: Vec<T> = segments
            .iter()
            .map(|s| {
                let (u, v) = (vertices[s.a], vertices[s.b]);
                (v[0] - u[0]).hypot(v[1] - u[1])
            })
            .collect();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (k, s) in segments.iter().enumerate() {
            adjacency[s.a].push((s.b, k));
            adjacency[s.b].push((s.a, k));
        }
        let mut acc = T::zero();
        let cumulative: Vec<T> = lengths
            .iter()
            .map(|&l| {
                acc = acc + l;
                acc
            })
            .collect();
        let window = vertices.iter().fold(
            Window {
                xmin: T::infinity(),
                ymin: T::infinity(),
                xmax: T::neg_infinity(),
                ymax: T::neg_infinity(),
            },
            |w, v| Window {
                xmin: w.xmin.min(v[0]),
                ymin: w.ymin.min(v[1]),
                xmax: w.xmax.max(v[0]),
                ymax: w.ymax.max(v[1]),
            },
        );

        Ok(LinearNetwork {
            vertices,
            segments,
            lengths,
            adjacency,
            cumulative,
            total_length: acc,
            window,
        })
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, k: usize) -> &Segment {
        &self.segments[k]
    }

    pub fn length(&self, k: usize) -> T {
        self.lengths[k]
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    pub fn window(&self) -> Window<T> {
        self.window
    }

    pub fn neighbors(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// Endpoint coordinates of segment `k`.
    pub fn endpoints(&self, k: usize) -> ([T; 2], [T; 2]) {
        let s = &self.segments[k];
        (self.vertices[s.a], self.vertices[s.b])
    }

    /// Index of the segment carrying the given external id.
    pub fn segment_by_id(&self, id: u64) -> Option<usize> {
        self.segments.iter().position(|s| s.id == id)
    }

    /// The point at fractional `offset` along segment `k`.
    ///
    /// Panics if `k` is out of range; `offset` is clamped to `[0, 1]`.
    pub fn point(&self, k: usize, offset: T) -> NetPoint<T> {
        let offset = offset.max(T::zero()).min(T::one());
        let (u, v) = self.endpoints(k);
        NetPoint {
            segment: k,
            offset,
            xy: [
                u[0] + offset * (v[0] - u[0]),
                u[1] + offset * (v[1] - u[1]),
            ],
        }
    }

    /// Arc-length position of `p` measured from its segment's first endpoint.
    pub fn arc_position(&self, p: &NetPoint<T>) -> T {
        p.offset * self.lengths[p.segment]
    }

    /// Shortest-path distance between two network points; `+inf` when they
    /// lie in different connected components.
    pub fn shortest_path_dist(&self, a: &NetPoint<T>, b: &NetPoint<T>) -> T {
        DistanceMap::new(self, *a).to(b)
    }

    /// Connected-component label per segment.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.vertices.len()];
        let mut next = 0;
        for start in 0..self.vertices.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        self.segments.iter().map(|s| label[s.a]).collect()
    }
}

impl<T: Scalar> LinearNetwork<T> {
    /// Square lattice of `n × n` vertices `step` meters apart.
    pub fn lattice(n: usize, step: T) -> Self {
        let mut rows = Vec::new();
        let mut id = 0;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (T::of_usize(i) * step, T::of_usize(j) * step);
                if i + 1 < n {
                    rows.push((id, [x, y], [x + step, y]));
                    id += 1;
                }
                if j + 1 < n {
                    rows.push((id, [x, y], [x, y + step]));
                    id += 1;
                }
            }
        }
        Self::from_segments(rows).expect("lattice with positive spacing")
    }

    /// Straight line from the origin along the x axis, cut into `pieces`
    /// equal segments.
    pub fn straight_line(length: T, pieces: usize) -> Self {
        let step = length / T::of_usize(pieces);
        Self::from_segments((0..pieces).map(|i| {
            let x = T::of_usize(i) * step;
            (i as u64, [x, T::zero()], [x + step, T::zero()])
        }))
        .expect("line with positive length")
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_segment() {
        let net = LinearNetwork::<f64>::from_segments([(1, [0.0, 0.0], [100.0, 0.0])]).unwrap();
        assert_eq!(net.num_vertices(), 2);
        assert_eq!(net.num_segments(), 1);
        assert_eq!(net.total_length(), 100.0);
    }

    #[test]
    fn shared_endpoint_is_merged() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0, 0.0], [100.0, 100.0]),
        ])
        .unwrap();
        assert_eq!(net.num_vertices(), 3);
        assert_eq!(net.num_segments(), 2);
        assert_eq!(net.total_length(), 200.0);
    }

    #[test]
    fn near_coincident_endpoints_merge_within_tolerance() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0 + 4e-7, 3e-7], [100.0, 100.0]),
        ])
        .unwrap();
        assert_eq!(net.num_vertices(), 3);
        let far = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0 + 1e-4, 0.0], [100.0, 100.0]),
        ])
        .unwrap();
        assert_eq!(far.num_vertices(), 4);
    }

    #[test]
    fn zero_length_segment_reports_row() {
        let err = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [5.0, 5.0], [5.0, 5.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::ZeroLengthSegment { row: 2 }));
    }

    #[test]
    fn empty_input_is_rejected() {
        let rows: Vec<(u64, [f64; 2], [f64; 2])> = vec![];
        assert!(matches!(
            LinearNetwork::from_segments(rows),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn lengths_match_endpoints_and_sum() {
        let net = fixtures::grid(5, 100.0);
        assert_eq!(net.num_segments(), 40);
        for k in 0..net.num_segments() {
            let (u, v) = net.endpoints(k);
            assert!((net.length(k) - (v[0] - u[0]).hypot(v[1] - u[1])).abs() < 1e-12);
        }
        assert!((net.total_length() - 4000.0).abs() < 1e-9);
        assert_eq!(net.window().width(), 400.0);
    }

    #[test]
    fn works_in_single_precision() {
        let net = LinearNetwork::<f32>::from_segments([(7, [0.0, 0.0], [3.0, 4.0])]).unwrap();
        assert_eq!(net.total_length(), 5.0f32);
        let p = net.point(0, 0.5);
        assert_eq!(p.xy, [1.5, 2.0]);
        assert_eq!(net.segment_by_id(7), Some(0));
    }

    #[test]
    fn islands_have_distinct_components() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [10.0, 0.0]),
            (2, [50.0, 0.0], [60.0, 0.0]),
        ])
        .unwrap();
        let c = net.components();
        assert_ne!(c[0], c[1]);
    }
}
