//! Rectangular rasterization of the network window.
//!
//! Cells are half-open `[x0 + i·dx, x0 + (i+1)·dx)`, with the upper window
//! edge folded into the last cell. Each segment is cut at every grid line
//! it crosses; each resulting piece lies in exactly one cell.

use super::{LinearNetwork, NetPoint, Window};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry<T> {
    pub window: Window<T>,
    pub cols: usize,
    pub rows: usize,
}

/// The part of one segment that falls inside one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPiece<T> {
    pub cell: usize,
    pub segment: usize,
    /// Offsets along the segment bounding the piece.
    pub from: T,
    pub to: T,
    pub length: T,
}

impl<T: Scalar> CellPiece<T> {
    pub fn midpoint(&self, net: &LinearNetwork<T>) -> NetPoint<T> {
        net.point(self.segment, (self.from + self.to) * T::of(0.5))
    }
}

impl<T: Scalar> GridGeometry<T> {
    pub fn new(window: Window<T>, cols: usize, rows: usize) -> Self {
        assert!(cols >= 1 && rows >= 1, "grid needs at least one row and column");
        GridGeometry { window, cols, rows }
    }

    pub fn num_cells(&self) -> usize {
        self.cols * self.rows
    }

    fn axis_index(v: T, lo: T, extent: T, n: usize) -> usize {
        if extent <= T::zero() {
            return 0;
        }
        let f = ((v - lo) * T::of_usize(n) / extent).floor();
        if f < T::zero() {
            0
        } else {
            f.to_usize().unwrap_or(n - 1).min(n - 1)
        }
    }

    /// `(column, row)` of the cell holding `xy`; points outside the window
    /// are clamped to the border cells.
    pub fn cell_coords(&self, xy: [T; 2]) -> (usize, usize) {
        let w = &self.window;
        (
            Self::axis_index(xy[0], w.xmin, w.width(), self.cols),
            Self::axis_index(xy[1], w.ymin, w.height(), self.rows),
        )
    }

    pub fn cell_of(&self, xy: [T; 2]) -> usize {
        let (ix, iy) = self.cell_coords(xy);
        iy * self.cols + ix
    }

    /// Cuts every segment at the grid lines it crosses.
    pub fn rasterize(&self, net: &LinearNetwork<T>) -> Vec<CellPiece<T>> {
        let w = &self.window;
        let mut pieces = Vec::new();
        let mut cuts: Vec<T> = Vec::new();
        for k in 0..net.num_segments() {
            let (u, v) = net.endpoints(k);
            cuts.clear();
            cuts.push(T::zero());
            cuts.push(T::one());
            for (axis, lo, extent, n) in [
                (0, w.xmin, w.width(), self.cols),
                (1, w.ymin, w.height(), self.rows),
            ] {
                let delta = v[axis] - u[axis];
                if extent <= T::zero() || delta == T::zero() {
                    continue;
                }
                let step = extent / T::of_usize(n);
                for line in 1..n {
                    let at = lo + step * T::of_usize(line);
                    let t = (at - u[axis]) / delta;
                    if t > T::zero() && t < T::one() {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            let len = net.length(k);
            for pair in cuts.windows(2) {
                let (from, to) = (pair[0], pair[1]);
                if to <= from {
                    continue;
                }
                let mid = net.point(k, (from + to) * T::of(0.5));
                pieces.push(CellPiece {
                    cell: self.cell_of(mid.xy),
                    segment: k,
                    from,
                    to,
                    length: (to - from) * len,
                });
            }
        }
        pieces
    }

    /// Network length inside each cell.
    pub fn cell_lengths(&self, net: &LinearNetwork<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_cells()];
        for p in self.rasterize(net) {
            out[p.cell] = out[p.cell] + p.length;
        }
        out
    }
}

/// Discretization of the network into rectangular pixels, used as the
/// support of the discrete uniform prior on spatial cluster centers.
#[derive(Debug, Clone)]
pub struct PixelGrid<T> {
    pub geometry: GridGeometry<T>,
    active: Vec<bool>,
    representatives: Vec<Option<NetPoint<T>>>,
    active_cells: Vec<usize>,
}

impl<T: Scalar> PixelGrid<T> {
    /// Cells crossed by the network are active; each active cell is
    /// represented by the midpoint of its longest in-cell piece.
    pub fn new(net: &LinearNetwork<T>, rows: usize, cols: usize) -> Self {
        let geometry = GridGeometry::new(net.window(), cols, rows);
        let mut best: Vec<Option<CellPiece<T>>> = vec![None; geometry.num_cells()];
        for piece in geometry.rasterize(net) {
            let slot = &mut best[piece.cell];
            if slot.is_none_or(|b| piece.length > b.length) {
                *slot = Some(piece);
            }
        }
        let representatives: Vec<Option<NetPoint<T>>> =
            best.iter().map(|p| p.map(|p| p.midpoint(net))).collect();
        let active: Vec<bool> = representatives.iter().map(Option::is_some).collect();
        let active_cells = (0..active.len()).filter(|&c| active[c]).collect();
        PixelGrid {
            geometry,
            active,
            representatives,
            active_cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.geometry.rows
    }

    pub fn cols(&self) -> usize {
        self.geometry.cols
    }

    pub fn is_active(&self, cell: usize) -> bool {
        self.active[cell]
    }

    pub fn active_cells(&self) -> &[usize] {
        &self.active_cells
    }

    pub fn representative(&self, cell: usize) -> Option<&NetPoint<T>> {
        self.representatives[cell].as_ref()
    }
}

impl<T: Scalar> LinearNetwork<T> {
    pub fn pixelate(&self, rows: usize, cols: usize) -> PixelGrid<T> {
        PixelGrid::new(self, rows, cols)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::grid;
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn horizontal_segment_fills_a_row() {
        let net = LinearNetwork::<f64>::from_segments([(1, [0.0, 0.0], [100.0, 0.0])]).unwrap();
        let px = net.pixelate(1, 10);
        assert_eq!(px.active_cells().len(), 10);
        let rep = px.representative(3).unwrap();
        assert!((rep.xy[0] - 35.0).abs() < 1e-9);
    }

    #[test]
    fn empty_corner_is_inactive() {
        // an L through the lower-left corner leaves the upper-right empty
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [0.0, 0.0], [0.0, 100.0]),
        ])
        .unwrap();
        let px = net.pixelate(4, 4);
        assert!(!px.is_active(3 * 4 + 3));
        assert!(px.is_active(0));
        assert_eq!(px.active_cells().len(), 7);
    }

    #[test]
    fn pieces_partition_each_segment() {
        let net = grid(6, 73.0);
        let g = GridGeometry::new(net.window(), 17, 13);
        let total: f64 = g.rasterize(&net).iter().map(|p| p.length).sum();
        assert!((total - net.total_length()).abs() < 1e-6);
        let lengths = g.cell_lengths(&net);
        assert!((lengths.iter().sum::<f64>() - net.total_length()).abs() < 1e-6);
    }

    #[test]
    fn representatives_lie_in_their_cells() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [1000.0, 730.0]),
            (2, [1000.0, 730.0], [200.0, 900.0]),
        ])
        .unwrap();
        let px = net.pixelate(50, 50);
        for &c in px.active_cells() {
            let rep = px.representative(c).unwrap();
            assert_eq!(px.geometry.cell_of(rep.xy), c);
        }
    }

    /// Marks cells hit by densely sampled interior points of each segment.
    fn raster_oracle(net: &LinearNetwork<f64>, g: &GridGeometry<f64>) -> BTreeSet<usize> {
        let mut hit = BTreeSet::new();
        for k in 0..net.num_segments() {
            for s in 0..2000 {
                let t = (s as f64 + 0.5) / 2000.0;
                hit.insert(g.cell_of(net.point(k, t).xy));
            }
        }
        hit
    }

    /// Liang-Barsky clipping of each segment against each closed cell.
    fn clip_oracle(net: &LinearNetwork<f64>, g: &GridGeometry<f64>) -> BTreeSet<usize> {
        let w = g.window;
        let (dx, dy) = (w.width() / g.cols as f64, w.height() / g.rows as f64);
        let mut hit = BTreeSet::new();
        for k in 0..net.num_segments() {
            let (u, v) = net.endpoints(k);
            let d = [v[0] - u[0], v[1] - u[1]];
            for iy in 0..g.rows {
                for ix in 0..g.cols {
                    let lo = [w.xmin + ix as f64 * dx, w.ymin + iy as f64 * dy];
                    let hi = [lo[0] + dx, lo[1] + dy];
                    let (mut t0, mut t1) = (0.0f64, 1.0f64);
                    for a in 0..2 {
                        for (p, q) in [(-d[a], u[a] - lo[a]), (d[a], hi[a] - u[a])] {
                            if p == 0.0 {
                                if q < 0.0 {
                                    t1 = -1.0;
                                }
                            } else if p < 0.0 {
                                t0 = t0.max(q / p);
                            } else {
                                t1 = t1.min(q / p);
                            }
                        }
                    }
                    if (t1 - t0) * net.length(k) > 1e-9 {
                        hit.insert(iy * g.cols + ix);
                    }
                }
            }
        }
        hit
    }

    #[test]
    fn active_cells_match_dense_raster_oracle() {
        let net = grid(11, 100.0);
        let px = net.pixelate(50, 50);
        let want = raster_oracle(&net, &px.geometry);
        let got: BTreeSet<usize> = px.active_cells().iter().copied().collect();
        assert_eq!(got, want);

        // diagonal streets: exact clipping against every cell
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [937.0, 411.0]),
            (2, [937.0, 411.0], [123.0, 877.0]),
            (3, [123.0, 877.0], [0.0, 0.0]),
        ])
        .unwrap();
        let px = net.pixelate(50, 50);
        let want = clip_oracle(&net, &px.geometry);
        let got: BTreeSet<usize> = px.active_cells().iter().copied().collect();
        assert_eq!(got, want);
    }
}
