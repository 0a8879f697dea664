use super::{LinearNetwork, NetPoint};
use crate::scalar::Scalar;

/// Distances closer than this (meters) count as a tie; ties go to the
/// lowest segment id.
const TIE_TOLERANCE: f64 = 1e-9;

/// Result of snapping a planar location onto the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    pub point: NetPoint<T>,
    /// Planar distance from the input to `point`.
    pub distance: T,
}

impl<T: Scalar> LinearNetwork<T> {
    /// Nearest point on any segment (perpendicular foot or endpoint).
    pub fn nearest_point(&self, xy: [T; 2]) -> Projection<T> {
        let tol = T::of(TIE_TOLERANCE);
        let mut best: Option<(T, u64, usize, T)> = None;
        for k in 0..self.num_segments() {
            let (u, v) = self.endpoints(k);
            let (dx, dy) = (v[0] - u[0], v[1] - u[1]);
            let t = ((xy[0] - u[0]) * dx + (xy[1] - u[1]) * dy) / (dx * dx + dy * dy);
            let t = t.max(T::zero()).min(T::one());
            let (fx, fy) = (u[0] + t * dx, u[1] + t * dy);
            let d = (xy[0] - fx).hypot(xy[1] - fy);
            let id = self.segment(k).id;
            let better = match best {
                None => true,
                Some((bd, bid, _, _)) => d < bd - tol || ((d - bd).abs() <= tol && id < bid),
            };
            if better {
                best = Some((d, id, k, t));
            }
        }
        let (distance, _, k, t) = best.expect("network has at least one segment");
        Projection {
            point: self.point(k, t),
            distance,
        }
    }

    /// Projects onto the closest street, rejecting inputs farther than
    /// `cutoff` meters from every segment.
    pub fn project_event(&self, xy: [T; 2], cutoff: T) -> Option<Projection<T>> {
        let p = self.nearest_point(xy);
        (p.distance <= cutoff).then_some(p)
    }
}
