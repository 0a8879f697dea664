//! Model assessment: theoretical versus observed event proportions in
//! space-time cells.
//!
//! The fitted mixture is integrated over a fine subgrid restricted to the
//! network: every piece of street inside a subcell contributes its length
//! times the mixture density at its midpoint, and each time slab gets the
//! exact Gaussian mass. Subcells are then pooled into a coarse grid and
//! compared with the share of observed events per coarse cell.

use std::path::Path;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::events::Event;
use crate::kernels::{planar_gaussian, KernelConfig};
use crate::model::{Center, PosteriorRun, WeightMode};
use crate::network::{GridGeometry, LinearNetwork, Window};
use crate::scalar::Scalar;
use crate::table;

/// Subgrid and coarse grid, as `[x cells, y cells, time slabs]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub sub: [usize; 3],
    pub coarse: [usize; 3],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            sub: [200, 200, 10],
            coarse: [5, 5, 10],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if self.coarse[k] == 0 || self.sub[k] < self.coarse[k] {
                return Err(Error::InvalidArgument(format!(
                    "subgrid {:?} must be at least as fine as coarse grid {:?}",
                    self.sub, self.coarse
                )));
            }
        }
        Ok(())
    }

    pub fn num_coarse(&self) -> usize {
        self.coarse.iter().product()
    }

    pub fn num_sub(&self) -> usize {
        self.sub.iter().product()
    }

    /// Coarse index along axis `k` of subgrid index `i`.
    fn pool(&self, k: usize, i: usize) -> usize {
        i * self.coarse[k] / self.sub[k]
    }

    pub fn coarse_index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (ix * self.coarse[1] + iy) * self.coarse[2] + it
    }

    pub fn coarse_coords(&self, idx: usize) -> (usize, usize, usize) {
        let it = idx % self.coarse[2];
        let rest = idx / self.coarse[2];
        (rest / self.coarse[1], rest % self.coarse[1], it)
    }

    fn sub_index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (ix * self.sub[1] + iy) * self.sub[2] + it
    }

    /// Coarse cell of a subcell.
    pub fn parent(&self, sub_idx: usize) -> usize {
        let it = sub_idx % self.sub[2];
        let rest = sub_idx / self.sub[2];
        let (ix, iy) = (rest / self.sub[1], rest % self.sub[1]);
        self.coarse_index(self.pool(0, ix), self.pool(1, iy), self.pool(2, it))
    }

    fn slab(&self, t: f64) -> usize {
        let n = self.sub[2];
        ((t * n as f64).floor().max(0.0) as usize).min(n - 1)
    }
}

/// A single mixture plugged into the assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit<T> {
    pub centers: Vec<Center<T>>,
    pub weights: Vec<T>,
    pub w_s: T,
    pub w_t: T,
}

impl<T: Scalar> MixtureFit<T> {
    /// Non-empty clusters of one state with renormalized weights.
    pub fn from_state(state: &crate::model::ChainState<T>) -> Self {
        let w = state.mixture_weights(WeightMode::NonEmptyRenormalized);
        let keep: Vec<usize> = (0..w.len()).filter(|&j| w[j] > T::zero()).collect();
        MixtureFit {
            centers: keep.iter().map(|&j| state.centers[j]).collect(),
            weights: keep.iter().map(|&j| w[j]).collect(),
            w_s: state.w_s,
            w_t: state.w_t,
        }
    }
}

/// Posterior-mean range parameters with the centers and weights of the
/// iteration chosen by least-squares partition selection.
pub fn point_estimate<T: Scalar>(run: &PosteriorRun<T>) -> Result<MixtureFit<T>> {
    let dahl = run.dahl()?;
    let mut fit = MixtureFit::from_state(&run.snapshots[dahl.index].state);
    fit.w_s = T::of(run.mean_ws());
    fit.w_t = T::of(run.mean_wt());
    Ok(fit)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Unnormalized mixture mass in every subcell.
pub fn subgrid_masses<T: Scalar>(
    fit: &MixtureFit<T>,
    net: &LinearNetwork<T>,
    kernels: &KernelConfig<T>,
    spec: &GridSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if fit.centers.is_empty() || fit.centers.len() != fit.weights.len() {
        return Err(Error::InvalidArgument("mixture needs one weight per center".into()));
    }
    let w_s = fit.w_s;
    let w_t = fit.w_t.f64();
    let scale: Vec<f64> = fit
        .centers
        .iter()
        .zip(&fit.weights)
        .map(|(c, w)| Ok(w.f64() / kernels.correction_term(c.location.xy, w_s)?.f64()))
        .collect::<Result<_>>()?;
    let nt = spec.sub[2];
    // temporal mass of every center in every slab
    let slabs: Vec<Vec<f64>> = fit
        .centers
        .iter()
        .map(|c| {
            let c = c.time.f64();
            let cdf: Vec<f64> = (0..=nt)
                .map(|k| normal_cdf((k as f64 / nt as f64 - c) / w_t))
                .collect();
            cdf.windows(2).map(|w| w[1] - w[0]).collect()
        })
        .collect();
    let geometry = GridGeometry::new(net.window(), spec.sub[0], spec.sub[1]);
    let mut masses = vec![0.0; spec.num_sub()];
    let mut spatial = vec![0.0; fit.centers.len()];
    for piece in geometry.rasterize(net) {
        let mid = piece.midpoint(net).xy;
        for (j, c) in fit.centers.iter().enumerate() {
            spatial[j] = scale[j] * planar_gaussian(mid, c.location.xy, w_s).f64() * piece.length.f64();
        }
        let (ix, iy) = (piece.cell % spec.sub[0], piece.cell / spec.sub[0]);
        for k in 0..nt {
            let m: f64 = spatial.iter().zip(&slabs).map(|(s, t)| s * t[k]).sum();
            masses[spec.sub_index(ix, iy, k)] += m;
        }
    }
    Ok(masses)
}

/// Pools subcell masses into coarse cells.
pub fn aggregate(spec: &GridSpec, sub: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; spec.num_coarse()];
    for (i, m) in sub.iter().enumerate() {
        out[spec.parent(i)] += m;
    }
    out
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonFinite("theoretical mass vanishes on the grid".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// Theoretical proportion of events in every coarse cell.
pub fn theoretical_props<T: Scalar>(
    fit: &MixtureFit<T>,
    net: &LinearNetwork<T>,
    kernels: &KernelConfig<T>,
    spec: &GridSpec,
) -> Result<Vec<f64>> {
    let mut p = aggregate(spec, &subgrid_masses(fit, net, kernels, spec)?);
    normalize(&mut p)?;
    Ok(p)
}

/// Theoretical proportions averaged over every retained draw.
pub fn theoretical_props_per_draw<T: Scalar>(
    run: &PosteriorRun<T>,
    net: &LinearNetwork<T>,
    kernels: &KernelConfig<T>,
    spec: &GridSpec,
) -> Result<Vec<f64>> {
    if run.snapshots.is_empty() {
        return Err(Error::Empty("posterior run".into()));
    }
    let mut acc = vec![0.0; spec.num_coarse()];
    for s in &run.snapshots {
        let p = theoretical_props(&MixtureFit::from_state(&s.state), net, kernels, spec)?;
        for (a, b) in acc.iter_mut().zip(p) {
            *a += b;
        }
    }
    let n = run.snapshots.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Share of events in every coarse cell.
pub fn observed_props<T: Scalar>(events: &[Event<T>], window: Window<T>, spec: &GridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if events.is_empty() {
        return Err(Error::Empty("event set".into()));
    }
    let geometry = GridGeometry::new(window, spec.sub[0], spec.sub[1]);
    let mut counts = vec![0usize; spec.num_coarse()];
    for e in events {
        let (ix, iy) = geometry.cell_coords(e.location.xy);
        let it = spec.slab(e.time.f64());
        counts[spec.parent(spec.sub_index(ix, iy, it))] += 1;
    }
    let n = events.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    pub spec: GridSpec,
    pub theory: Vec<f64>,
    pub observed: Vec<f64>,
}

impl CellTable {
    /// Writes `cell_ix,cell_iy,cell_it,p_theory,p_obs`.
    pub fn write_csv(&self, path: impl AsRef<Path>, manifest: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut w = table::writer(path, manifest)?;
        w.write_record(["cell_ix", "cell_iy", "cell_it", "p_theory", "p_obs"])?;
        for (i, (t, o)) in self.theory.iter().zip(&self.observed).enumerate() {
            let (ix, iy, it) = self.spec.coarse_coords(i);
            w.write_record([
                ix.to_string(),
                iy.to_string(),
                it.to_string(),
                t.to_string(),
                o.to_string(),
            ])?;
        }
        table::finish(w, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterSummary {
    /// Pearson correlation; absent with fewer than three nonzero cells or
    /// a constant column.
    pub correlation: Option<f64>,
    pub rmse: f64,
}

pub fn assess_scatter(table: &CellTable) -> ScatterSummary {
    let (a, b) = (&table.theory, &table.observed);
    let n = a.len() as f64;
    let rmse = (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt();
    let nonzero = a.iter().zip(b).filter(|(x, y)| **x != 0.0 || **y != 0.0).count();
    let correlation = (nonzero >= 3)
        .then(|| {
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
        })
        .flatten();
    ScatterSummary { correlation, rmse }
}
