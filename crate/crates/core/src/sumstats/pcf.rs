use std::cmp::Ordering;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::network::{DistanceMap, LinearNetwork, NetPoint};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcfOptions {
    /// Smoothing bandwidth in meters.
    pub bandwidth: f64,
    /// Divide by the kernel mass on `[0, ∞)` to remove the deficit near
    /// `r = 0`.
    pub boundary_correction: bool,
}

fn point_key<T: Scalar>(p: &NetPoint<T>) -> (usize, f64, f64, f64) {
    (p.segment, p.offset.f64(), p.xy[0].f64(), p.xy[1].f64())
}

fn cmp_key(a: &(usize, f64, f64, f64), b: &(usize, f64, f64, f64)) -> Ordering {
    a.0.cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.total_cmp(&b.2))
        .then(a.3.total_cmp(&b.3))
}

/// Inhomogeneous multitype pair correlation function
/// `(1/|L|) Σᵢ Σⱼ φ_h(r − d(x₁ᵢ, x₂ⱼ)) / (λ₁(x₁ᵢ) λ₂(x₂ⱼ) M(x₁ᵢ, d))`
/// with a one-dimensional Gaussian smoothing kernel `φ_h`.
///
/// Each pair's distance is measured from whichever of its two points sorts
/// first and the pairs are summed in that canonical order, so swapping the
/// patterns reproduces the curve bit for bit whenever the sphere counts of
/// both points agree.
pub fn multitype_pcf<T: Scalar>(
    x1: &[NetPoint<T>],
    x2: &[NetPoint<T>],
    net: &LinearNetwork<T>,
    lambda1: &[T],
    lambda2: &[T],
    r: &[f64],
    opts: PcfOptions,
) -> Result<Vec<f64>> {
    if x1.len() != lambda1.len() || x2.len() != lambda2.len() {
        return Err(Error::InvalidArgument("one intensity per point required".into()));
    }
    if lambda1.iter().chain(lambda2).any(|&l| !(l > T::zero())) {
        return Err(Error::InvalidArgument("intensities must be positive".into()));
    }
    if !(opts.bandwidth > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let maps1: Vec<DistanceMap<'_, T>> = x1.iter().map(|p| DistanceMap::new(net, *p)).collect();
    let maps2: Vec<DistanceMap<'_, T>> = x2.iter().map(|p| DistanceMap::new(net, *p)).collect();
    let spheres: Vec<_> = maps1.iter().map(|m| m.sphere()).collect();
    let keys1: Vec<_> = x1.iter().map(point_key).collect();
    let keys2: Vec<_> = x2.iter().map(point_key).collect();

    struct Pair {
        key: [(usize, f64, f64, f64); 2],
        d: f64,
        denom: f64,
    }
    let mut pairs = Vec::with_capacity(x1.len() * x2.len());
    for (i, p) in x1.iter().enumerate() {
        for (j, q) in x2.iter().enumerate() {
            let first = cmp_key(&keys1[i], &keys2[j]) != Ordering::Greater;
            let d = if first { maps1[i].to(q) } else { maps2[j].to(p) };
            if !d.is_finite() {
                continue;
            }
            let m = spheres[i].count(d).max(1) as f64;
            let key = if first { [keys1[i], keys2[j]] } else { [keys2[j], keys1[i]] };
            pairs.push(Pair {
                key,
                d: d.f64(),
                denom: (lambda1[i] * lambda2[j]).f64() * m,
            });
        }
    }
    pairs.sort_by(|a, b| cmp_key(&a.key[0], &b.key[0]).then(cmp_key(&a.key[1], &b.key[1])));

    let h = opts.bandwidth;
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let len = net.total_length().f64();
    Ok(r.iter()
        .map(|&r| {
            let s: f64 = pairs
                .iter()
                .map(|p| {
                    let z = (r - p.d) / h;
                    norm * (-0.5 * z * z).exp() / p.denom
                })
                .sum();
            let mass = if opts.boundary_correction {
                1.0 - 0.5 * erfc(r / (h * std::f64::consts::SQRT_2))
            } else {
                1.0
            };
            s / len / mass
        })
        .collect())
}
