//! Shortest-path distances from a point on the network.
//!
//! The source point's host segment is split virtually: Dijkstra starts
//! from both of its endpoints with the along-segment distances as seeds,
//! so the network itself is never modified.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{LinearNetwork, NetPoint};
use crate::scalar::Scalar;

struct Frontier<T>(T, usize);

impl<T: PartialOrd> PartialEq for Frontier<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: PartialOrd> Eq for Frontier<T> {}

impl<T: PartialOrd> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Frontier<T> {
    // min-heap on distance
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Single-source shortest-path distances from a network point to every
/// vertex, answering point-to-point queries in O(1).
#[derive(Debug, Clone)]
pub struct DistanceMap<'a, T> {
    net: &'a LinearNetwork<T>,
    source: NetPoint<T>,
    vertex: Vec<T>,
}

impl<'a, T: Scalar> DistanceMap<'a, T> {
    pub fn new(net: &'a LinearNetwork<T>, source: NetPoint<T>) -> Self {
        let mut dist = vec![T::infinity(); net.num_vertices()];
        let mut heap = BinaryHeap::new();
        let seg = net.segment(source.segment);
        let along = net.arc_position(&source);
        let len = net.length(source.segment);
        for (v, d) in [(seg.a, along), (seg.b, len - along)] {
            if d < dist[v] {
                dist[v] = d;
                heap.push(Frontier(d, v));
            }
        }
        while let Some(Frontier(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, k) in net.neighbors(v) {
                let nd = d + net.length(k);
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Frontier(nd, w));
                }
            }
        }
        DistanceMap {
            net,
            source,
            vertex: dist,
        }
    }

    pub fn source(&self) -> &NetPoint<T> {
        &self.source
    }

    pub fn vertex_distances(&self) -> &[T] {
        &self.vertex
    }

    /// Shortest-path distance from the source to `p`.
    pub fn to(&self, p: &NetPoint<T>) -> T {
        let seg = self.net.segment(p.segment);
        let len = self.net.length(p.segment);
        let along = self.net.arc_position(p);
        let mut d = (self.vertex[seg.a] + along).min(self.vertex[seg.b] + (len - along));
        if p.segment == self.source.segment {
            d = d.min((along - self.net.arc_position(&self.source)).abs());
        }
        d
    }

    /// Index answering "how many network locations lie at exactly distance
    /// r from the source" for almost every r.
    pub fn sphere(&self) -> SphereCounter<T> {
        let mut lo = Vec::with_capacity(2 * self.net.num_segments() + 2);
        let mut hi = Vec::with_capacity(lo.capacity());
        // Along a segment of length `len` whose ends sit at distances d0 and
        // d1 from the source, the distance profile is the tent
        // min(d0 + s, d1 + len - s); each rising and falling flank
        // contributes one open interval of radii.
        let mut tent = |d0: T, d1: T, len: T| {
            if !d0.is_finite() || !d1.is_finite() || len <= T::zero() {
                return;
            }
            let peak = (d0 + d1 + len) * T::of(0.5);
            for start in [d0, d1] {
                if peak > start {
                    lo.push(start);
                    hi.push(peak);
                }
            }
        };
        for k in 0..self.net.num_segments() {
            let seg = self.net.segment(k);
            let (da, db) = (self.vertex[seg.a], self.vertex[seg.b]);
            let len = self.net.length(k);
            if k == self.source.segment {
                let along = self.net.arc_position(&self.source);
                tent(T::zero(), da, along);
                tent(T::zero(), db, len - along);
            } else {
                tent(da, db, len);
            }
        }
        lo.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        hi.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        SphereCounter { lo, hi }
    }
}

/// Count of network points at a given shortest-path distance from a fixed
/// source, built from the per-segment flank intervals.
#[derive(Debug, Clone)]
pub struct SphereCounter<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> SphereCounter<T> {
    /// Number of locations at distance `r`. Radii that coincide exactly
    /// with a vertex distance or a flank peak (a null set) may be off by
    /// the multiplicity of that vertex.
    pub fn count(&self, r: T) -> usize {
        let opened = self.lo.partition_point(|&x| x < r);
        let closed = self.hi.partition_point(|&x| x <= r);
        opened - closed
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::grid;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l_network() -> LinearNetwork<f64> {
        LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0, 0.0], [100.0, 100.0]),
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let net = l_network();
        let p = net.point(1, 0.3);
        assert_eq!(net.shortest_path_dist(&p, &p), 0.0);
    }

    #[test]
    fn l_network_goes_around_the_corner() {
        let net = l_network();
        let a = net.point(0, 0.0);
        let b = net.point(1, 1.0);
        assert!((net.shortest_path_dist(&a, &b) - 200.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_points_are_infinitely_far() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [10.0, 0.0]),
            (2, [50.0, 0.0], [60.0, 0.0]),
        ])
        .unwrap();
        let d = net.shortest_path_dist(&net.point(0, 0.5), &net.point(1, 0.5));
        assert!(d.is_infinite());
        let sphere = DistanceMap::new(&net, net.point(0, 0.5)).sphere();
        assert_eq!(sphere.count(3.0), 2);
        assert_eq!(sphere.count(45.0), 0);
    }

    /// Inserts both query points as explicit vertices and runs
    /// Floyd-Warshall on the resulting graph.
    fn split_graph_oracle(net: &LinearNetwork<f64>, a: &NetPoint<f64>, b: &NetPoint<f64>) -> f64 {
        let nv = net.num_vertices();
        let (ia, ib) = (nv, nv + 1);
        let n = nv + 2;
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let edge = |d: &mut Vec<Vec<f64>>, u: usize, v: usize, w: f64| {
            if w < d[u][v] {
                d[u][v] = w;
                d[v][u] = w;
            }
        };
        for k in 0..net.num_segments() {
            let s = net.segment(k);
            let len = net.length(k);
            // points on this segment sorted by offset, chained end to end
            let mut stops = vec![(0.0, s.a), (1.0, s.b)];
            if a.segment == k {
                stops.push((a.offset, ia));
            }
            if b.segment == k {
                stops.push((b.offset, ib));
            }
            stops.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            for w in stops.windows(2) {
                edge(&mut d, w[0].1, w[1].1, (w[1].0 - w[0].0) * len);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d[ia][ib]
    }

    #[test]
    fn matches_split_graph_oracle_on_grid() {
        let net = grid(5, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = net.point(rng.random_range(0..net.num_segments()), rng.random());
            let b = if rng.random::<f64>() < 0.2 {
                net.point(a.segment, rng.random())
            } else {
                net.point(rng.random_range(0..net.num_segments()), rng.random())
            };
            let got = net.shortest_path_dist(&a, &b);
            let want = split_graph_oracle(&net, &a, &b);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn sphere_on_a_line_counts_both_directions() {
        let net = LinearNetwork::<f64>::from_segments([(1, [0.0, 0.0], [1000.0, 0.0])]).unwrap();
        let m = DistanceMap::new(&net, net.point(0, 0.3)).sphere();
        assert_eq!(m.count(100.0), 2);
        assert_eq!(m.count(500.0), 1);
        assert_eq!(m.count(800.0), 0);
    }

    #[test]
    fn sphere_matches_dense_sampling_on_grid() {
        let net = grid(4, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let src = net.point(rng.random_range(0..net.num_segments()), rng.random());
            let map = DistanceMap::new(&net, src);
            let sphere = map.sphere();
            for &r in &[13.7, 77.3, 151.1, 233.3, 310.9] {
                // count sign changes of dist - r along each segment
                let mut crossings = 0;
                let steps = 4000;
                for k in 0..net.num_segments() {
                    let mut prev = map.to(&net.point(k, 0.0)) - r;
                    for s in 1..=steps {
                        let cur = map.to(&net.point(k, s as f64 / steps as f64)) - r;
                        if (prev < 0.0) != (cur < 0.0) {
                            crossings += 1;
                        }
                        prev = cur;
                    }
                }
                assert_eq!(sphere.count(r), crossings, "r={r}");
            }
        }
    }
}
