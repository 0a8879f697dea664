//! Space and time smoothing kernels.
//!
//! The spatial kernel is a planar Gaussian divided by its own line
//! integral over the network, so that it integrates to one along the
//! network rather than over the plane. The line integral is a Monte Carlo
//! average over a point set fixed for the whole run, which keeps every
//! likelihood evaluation a deterministic function of the chain state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{LinearNetwork, NetPoint};
use crate::scalar::Scalar;

/// Default size of the Monte Carlo point set.
pub const DEFAULT_MC_POINTS: usize = 1000;

#[inline]
fn sq_dist<T: Scalar>(x: [T; 2], c: [T; 2]) -> T {
    let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
    dx * dx + dy * dy
}

/// Isotropic bivariate normal density with standard deviation `w`.
pub fn planar_gaussian<T: Scalar>(x: [T; 2], c: [T; 2], w: T) -> T {
    log_planar_gaussian(x, c, w).exp()
}

pub fn log_planar_gaussian<T: Scalar>(x: [T; 2], c: [T; 2], w: T) -> T {
    let two = T::of(2.0);
    -sq_dist(x, c) / (two * w * w) - (two * T::PI() * w * w).ln()
}

/// Univariate normal density of `t` around `center`, not truncated to the
/// study period.
pub fn temporal_kernel<T: Scalar>(t: T, center: T, w: T) -> T {
    log_temporal_kernel(t, center, w).exp()
}

pub fn log_temporal_kernel<T: Scalar>(t: T, center: T, w: T) -> T {
    let z = (t - center) / w;
    -T::of(0.5) * z * z - w.ln() - T::of(0.5) * (T::of(2.0) * T::PI()).ln()
}

#[derive(Debug, Clone)]
pub struct KernelConfig<T> {
    mc_points: Vec<[T; 2]>,
    /// Per-point multiplier replacing the network length, for weighted
    /// quadrature rules.
    weights: Option<Vec<T>>,
    network_length: T,
    /// Seed the point set was drawn with; `None` for caller-supplied sets.
    pub mc_seed: Option<u64>,
}

impl<T: Scalar> KernelConfig<T> {
    /// Draws `n` uniform network points with a dedicated seeded stream.
    pub fn sample(net: &LinearNetwork<T>, n: usize, seed: u64) -> Self {
        assert!(n > 0, "need at least one Monte Carlo point");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        KernelConfig {
            mc_points: net.sample_uniform(n, &mut rng).iter().map(|p| p.xy).collect(),
            weights: None,
            network_length: net.total_length(),
            mc_seed: Some(seed),
        }
    }

    /// Uses a given point set, e.g. an equally spaced quadrature rule.
    pub fn from_points(net: &LinearNetwork<T>, points: &[NetPoint<T>]) -> Self {
        assert!(!points.is_empty(), "need at least one Monte Carlo point");
        KernelConfig {
            mc_points: points.iter().map(|p| p.xy).collect(),
            weights: None,
            network_length: net.total_length(),
            mc_seed: None,
        }
    }

    /// Midpoint rule with pieces of length at most `spacing` meters.
    pub fn quadrature(net: &LinearNetwork<T>, spacing: T) -> Self {
        let mut pts = Vec::new();
        let mut weights = Vec::new();
        for k in 0..net.num_segments() {
            let len = net.length(k);
            let n = (len / spacing).ceil().to_usize().unwrap_or(1).max(1);
            for i in 0..n {
                let t = (T::of_usize(i) + T::of(0.5)) / T::of_usize(n);
                pts.push(net.point(k, t).xy);
                weights.push(len / T::of_usize(n));
            }
        }
        let n = T::of_usize(pts.len());
        KernelConfig {
            mc_points: pts,
            weights: Some(weights.into_iter().map(|w| w * n).collect()),
            network_length: net.total_length(),
            mc_seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.mc_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mc_points.is_empty()
    }

    pub fn network_length(&self) -> T {
        self.network_length
    }

    /// Monte Carlo estimate of the line integral of the planar Gaussian
    /// centred at `c` over the network, together with its standard error.
    pub fn correction_with_error(&self, c: [T; 2], w_s: T) -> (T, T) {
        let n = T::of_usize(self.mc_points.len());
        let scale = self.network_length;
        let (mut s1, mut s2) = (T::zero(), T::zero());
        let inv = -T::one() / (T::of(2.0) * w_s * w_s);
        let norm = T::one() / (T::of(2.0) * T::PI() * w_s * w_s);
        for (k, &v) in self.mc_points.iter().enumerate() {
            let scale = self.weights.as_ref().map_or(scale, |w| w[k]);
            let y = scale * norm * (sq_dist(v, c) * inv).exp();
            s1 = s1 + y;
            s2 = s2 + y * y;
        }
        let mean = s1 / n;
        let var = if self.mc_points.len() > 1 {
            ((s2 - n * mean * mean) / (n - T::one())).max(T::zero())
        } else {
            T::zero()
        };
        (mean, (var / n).sqrt())
    }

    /// The correction term: how much planar kernel mass the network
    /// carries around `c`.
    pub fn correction_term(&self, c: [T; 2], w_s: T) -> Result<T> {
        let (value, _) = self.correction_with_error(c, w_s);
        if value <= T::epsilon() {
            return Err(Error::IsolatedCenter { value: value.f64() });
        }
        Ok(value)
    }

    /// Network-corrected spatial kernel density (per meter of network).
    pub fn spatial_kernel(&self, x: [T; 2], c: [T; 2], w_s: T) -> Result<T> {
        Ok(planar_gaussian(x, c, w_s) / self.correction_term(c, w_s)?)
    }

    pub fn log_spatial_kernel(&self, x: [T; 2], c: [T; 2], w_s: T) -> Result<T> {
        Ok(log_planar_gaussian(x, c, w_s) - self.correction_term(c, w_s)?.ln())
    }
}

/// Convolution estimate of the first-order intensity on the network:
/// each data point spreads one unit of mass with the corrected kernel.
pub fn kernel_intensity<T: Scalar>(
    cfg: &KernelConfig<T>,
    data: &[[T; 2]],
    bandwidth: T,
    at: [T; 2],
) -> Result<T> {
    data.iter()
        .map(|&c| cfg.spatial_kernel(at, c, bandwidth))
        .sum()
}
