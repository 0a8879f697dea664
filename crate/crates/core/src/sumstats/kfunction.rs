use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::Event;
use crate::kernels::KernelConfig;
use crate::network::{DistanceMap, LinearNetwork};
use crate::scalar::Scalar;
use crate::sim::{sim_poisson, PoissonCount};
use crate::table;

use super::{homogeneous_intensity, scott_bandwidth, spacetime_intensity};

/// K-function values on an `r × t` grid, stored r-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KSurface {
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl KSurface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t.len() + j]
    }

    /// Writes `r,t,K`.
    pub fn write_csv(&self, path: impl AsRef<Path>, manifest: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut w = table::writer(path, manifest)?;
        w.write_record(["r", "t", "K"])?;
        for (i, r) in self.r.iter().enumerate() {
            for (j, t) in self.t.iter().enumerate() {
                w.write_record([r.to_string(), t.to_string(), self.get(i, j).to_string()])?;
            }
        }
        table::finish(w, path)
    }
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name}-grid must be non-empty, finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Number of times at distance `dt` from `t` that fall in `[0, 1]`.
fn time_sphere(t: f64, dt: f64) -> usize {
    if dt == 0.0 {
        return 1;
    }
    usize::from(t - dt >= 0.0) + usize::from(t + dt <= 1.0)
}

/// Space-time network K-function estimate: the average over points `u` of
/// `Σ_{x≠u} 𝟙{0 < d(u,x) < r, |t_u − t_x| < t} / (λ(x) M_L(u, d) M_T(t_u, |Δt|))`,
/// where `M_L` counts network points at distance `d` from `u` and `M_T`
/// counts times at distance `|Δt|` from `t_u` inside `[0, 1]`.
pub fn kfunction<T: Scalar>(
    events: &[Event<T>],
    net: &LinearNetwork<T>,
    intensity: &[T],
    r: &[f64],
    t: &[f64],
) -> Result<KSurface> {
    check_grid("r", r)?;
    check_grid("t", t)?;
    if intensity.len() != events.len() {
        return Err(Error::InvalidArgument("one intensity per event required".into()));
    }
    if let Some(i) = intensity.iter().position(|&l| !(l > T::zero() && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("intensity at event {i} is not positive")));
    }
    let (nr, nt) = (r.len(), t.len());
    let per_source: Vec<Vec<f64>> = events
        .par_iter()
        .enumerate()
        .map(|(ui, u)| {
            let mut bins = vec![0.0; nr * nt];
            if events.len() < 2 {
                return bins;
            }
            let map = DistanceMap::new(net, u.location);
            let sphere = map.sphere();
            for (xi, x) in events.iter().enumerate() {
                if xi == ui {
                    continue;
                }
                let d = map.to(&x.location);
                if !(d > T::zero()) || !d.is_finite() {
                    continue;
                }
                let df = d.f64();
                let dt = (u.time - x.time).abs().f64();
                let a = r.partition_point(|&v| v <= df);
                let b = t.partition_point(|&v| v <= dt);
                if a == nr || b == nt {
                    continue;
                }
                let m_l = sphere.count(d).max(1) as f64;
                let m_t = time_sphere(u.time.f64(), dt).max(1) as f64;
                bins[a * nt + b] += 1.0 / (intensity[xi].f64() * m_l * m_t);
            }
            bins
        })
        .collect();
    let n = events.len().max(1) as f64;
    let mut values = vec![0.0; nr * nt];
    for bins in &per_source {
        for (v, b) in values.iter_mut().zip(bins) {
            *v += b;
        }
    }
    for i in 0..nr {
        for j in 0..nt {
            let mut v = values[i * nt + j];
            if i > 0 {
                v += values[(i - 1) * nt + j];
            }
            if j > 0 {
                v += values[i * nt + j - 1];
            }
            if i > 0 && j > 0 {
                v -= values[(i - 1) * nt + j - 1];
            }
            values[i * nt + j] = v;
        }
    }
    values.iter_mut().for_each(|v| *v /= n);
    Ok(KSurface { r: r.to_vec(), t: t.to_vec(), values })
}

/// How event intensities are estimated inside the envelope test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityMode {
    /// `n / |L|` for every event.
    Homogeneous,
    /// Space-time convolution estimate with Scott bandwidths, refitted to
    /// every pattern.
    Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub simulations: usize,
    pub seed: u64,
    pub intensity: IntensityMode,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    pub observed: KSurface,
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t_observed: f64,
    pub t_simulated: Vec<f64>,
    pub p_value: f64,
    /// Grid nodes left out of the integral because the simulations had no
    /// spread there.
    pub excluded_nodes: usize,
}

impl EnvelopeResult {
    /// Writes `r,t,K_lo,K_hi,K_obs`.
    pub fn write_csv(&self, path: impl AsRef<Path>, manifest: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let k = &self.observed;
        let mut w = table::writer(path, manifest)?;
        w.write_record(["r", "t", "K_lo", "K_hi", "K_obs"])?;
        for (i, r) in k.r.iter().enumerate() {
            for (j, t) in k.t.iter().enumerate() {
                let ix = i * k.t.len() + j;
                w.write_record([
                    r.to_string(),
                    t.to_string(),
                    self.lo[ix].to_string(),
                    self.hi[ix].to_string(),
                    k.values[ix].to_string(),
                ])?;
            }
        }
        table::finish(w, path)
    }
}

fn pattern_intensity<T: Scalar>(
    events: &[Event<T>],
    net: &LinearNetwork<T>,
    kernels: &KernelConfig<T>,
    mode: IntensityMode,
) -> Result<Vec<T>> {
    match mode {
        IntensityMode::Homogeneous => Ok(vec![homogeneous_intensity(net, events.len()); events.len()]),
        IntensityMode::Kernel => {
            let xy: Vec<[T; 2]> = events.iter().map(|e| e.location.xy).collect();
            let tt: Vec<[T; 1]> = events.iter().map(|e| [e.time]).collect();
            let h_s = scott_bandwidth(&xy)?;
            let h_t = scott_bandwidth(&tt)?;
            spacetime_intensity(kernels, events, h_s, h_t, events)
        }
    }
}

/// Trapezoid weights of a grid starting at its first node.
fn trapezoid(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { g[i] - g[i - 1] } else { 0.0 };
            let right = if i + 1 < n { g[i + 1] - g[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Simulation envelopes of the K-function under a homogeneous Poisson
/// process with the observed count, and the p-value of the integrated
/// standardized deviation. Larger K than the null gives a smaller p.
pub fn envelope_pvalue<T: Scalar>(
    events: &[Event<T>],
    net: &LinearNetwork<T>,
    kernels: &KernelConfig<T>,
    cfg: &EnvelopeConfig,
) -> Result<EnvelopeResult> {
    if cfg.simulations == 0 {
        return Err(Error::InvalidArgument("need at least one simulation".into()));
    }
    if events.is_empty() {
        return Err(Error::Empty("point pattern".into()));
    }
    let surface = |ev: &[Event<T>]| -> Result<KSurface> {
        let lam = pattern_intensity(ev, net, kernels, cfg.intensity)?;
        kfunction(ev, net, &lam, &cfg.r, &cfg.t)
    };
    let observed = surface(events)?;
    let sims: Vec<KSurface> = (0..cfg.simulations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            let ev = sim_poisson(net, PoissonCount::Fixed(events.len()), &mut rng)?;
            surface(&ev)
        })
        .collect::<Result<_>>()?;
    let nodes = observed.values.len();
    let m = sims.len() as f64;
    let mut mean = vec![0.0; nodes];
    let mut var = vec![0.0; nodes];
    let mut lo = vec![f64::INFINITY; nodes];
    let mut hi = vec![f64::NEG_INFINITY; nodes];
    for s in &sims {
        for k in 0..nodes {
            mean[k] += s.values[k] / m;
            lo[k] = lo[k].min(s.values[k]);
            hi[k] = hi[k].max(s.values[k]);
        }
    }
    for s in &sims {
        for k in 0..nodes {
            var[k] += (s.values[k] - mean[k]).powi(2);
        }
    }
    let denom = (m - 1.0).max(1.0);
    var.iter_mut().for_each(|v| *v /= denom);
    let (wr, wt) = (trapezoid(&cfg.r), trapezoid(&cfg.t));
    let nt = cfg.t.len();
    let excluded_nodes = var.iter().filter(|&&v| !(v > 0.0)).count();
    let stat = |k: &KSurface| -> f64 {
        (0..nodes)
            .filter(|&i| var[i] > 0.0)
            .map(|i| (k.values[i] - mean[i]) / var[i].sqrt() * wr[i / nt] * wt[i % nt])
            .sum()
    };
    let t_observed = stat(&observed);
    let t_simulated: Vec<f64> = sims.iter().map(stat).collect();
    let above = t_simulated.iter().filter(|&&x| x > t_observed).count();
    Ok(EnvelopeResult {
        observed,
        mean,
        lo,
        hi,
        t_observed,
        t_simulated,
        p_value: (1 + above) as f64 / (m + 1.0),
        excluded_nodes,
    })
}
