//! Simulators: homogeneous Poisson patterns on the network and forward
//! draws from the space-time mixture.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::events::Event;
use crate::model::Center;
use crate::network::LinearNetwork;
use crate::scalar::Scalar;
use crate::table;

/// How many points a Poisson simulation produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonCount {
    /// Exactly this many points (conditional simulation).
    Fixed(usize),
    /// Points per meter of network; the count is Poisson distributed.
    Rate(f64),
}

/// Homogeneous Poisson pattern on the network × `[0, 1]`.
pub fn sim_poisson<T: Scalar>(
    net: &LinearNetwork<T>,
    count: PoissonCount,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Event<T>>> {
    let n = match count {
        PoissonCount::Fixed(0) => {
            return Err(Error::InvalidArgument("need at least one point".into()))
        }
        PoissonCount::Fixed(n) => n,
        PoissonCount::Rate(rate) if rate > 0.0 => {
            let mean = rate * net.total_length().f64();
            Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng) as usize
        }
        PoissonCount::Rate(rate) => {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")))
        }
    };
    Ok((0..n)
        .map(|_| {
            let p = net.sample_point(rng);
            Event::new(p, T::of(rng.random::<f64>()))
        })
        .collect())
}

/// Treatment of temporal draws outside the study period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    /// Redraw until the time falls in `[0, 1]`.
    Truncated,
    /// Keep the plain Gaussian draw.
    Untruncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams<T> {
    pub centers: Vec<Center<T>>,
    pub weights: Vec<T>,
    pub w_s: T,
    pub w_t: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth<T> {
    pub params: MixtureParams<T>,
    /// 0-based cluster of each event.
    pub memberships: Vec<usize>,
    pub events: Vec<Event<T>>,
    /// Temporal kernel mass outside `[0, 1]` for each center.
    pub outside_mass: Vec<f64>,
}

/// Mass of `N(c, w²)` outside `[0, 1]`.
pub fn mass_outside_window(c: f64, w: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * w;
    0.5 * erfc(c / s) + 0.5 * erfc((1.0 - c) / s)
}

const MIN_ACCEPTANCE: f64 = 1e-4;
const ACCEPTANCE_PROBE: usize = 200_000;

/// Draws one location from the network-restricted kernel around `c` by
/// rejection from the uniform distribution on the network.
fn draw_location<T: Scalar>(
    net: &LinearNetwork<T>,
    c: [T; 2],
    w_s: T,
    rng: &mut ChaCha8Rng,
) -> Result<crate::network::NetPoint<T>> {
    let inv = -T::one() / (T::of(2.0) * w_s * w_s);
    for tries in 1.. {
        let p = net.sample_point(rng);
        let (dx, dy) = (p.xy[0] - c[0], p.xy[1] - c[1]);
        let accept = ((dx * dx + dy * dy) * inv).exp();
        if rng.random::<f64>() < accept.f64() {
            return Ok(p);
        }
        if tries >= ACCEPTANCE_PROBE {
            return Err(Error::BandwidthTooSmall {
                rate: 1.0 / tries as f64,
            });
        }
    }
    unreachable!()
}

fn draw_time(c: f64, w: f64, mode: TimeMode, rng: &mut ChaCha8Rng) -> Result<f64> {
    let normal = Normal::new(c, w).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    match mode {
        TimeMode::Untruncated => Ok(normal.sample(rng)),
        TimeMode::Truncated => {
            if 1.0 - mass_outside_window(c, w) < MIN_ACCEPTANCE {
                return Err(Error::InvalidArgument(format!(
                    "temporal kernel at {c} puts almost no mass in [0, 1]"
                )));
            }
            loop {
                let t = normal.sample(rng);
                if (0.0..=1.0).contains(&t) {
                    return Ok(t);
                }
            }
        }
    }
}

/// Simulates events for given memberships from the mixture components.
pub fn sim_components<T: Scalar>(
    net: &LinearNetwork<T>,
    centers: &[Center<T>],
    memberships: &[usize],
    w_s: T,
    w_t: T,
    mode: TimeMode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Event<T>>> {
    if !(w_s > T::zero() && w_t > T::zero()) {
        return Err(Error::InvalidArgument("bandwidths must be positive".into()));
    }
    memberships
        .iter()
        .map(|&g| {
            let c = centers.get(g).ok_or_else(|| {
                Error::InvalidArgument(format!("membership {g} has no center"))
            })?;
            let location = draw_location(net, c.location.xy, w_s, rng)?;
            let t = draw_time(c.time.f64(), w_t.f64(), mode, rng)?;
            Ok(Event::new(location, T::of(t)))
        })
        .collect()
}

/// Forward simulation of `n` events from the mixture.
pub fn sim_mixture<T: Scalar>(
    net: &LinearNetwork<T>,
    params: &MixtureParams<T>,
    n: usize,
    mode: TimeMode,
    rng: &mut ChaCha8Rng,
) -> Result<SyntheticTruth<T>> {
    if params.centers.len() != params.weights.len() || params.centers.is_empty() {
        return Err(Error::InvalidArgument("need one weight per center".into()));
    }
    let total: f64 = params.weights.iter().map(|w| w.f64()).sum();
    if !(total > 0.0) || params.weights.iter().any(|&w| w < T::zero()) {
        return Err(Error::InvalidArgument("weights must be non-negative with positive sum".into()));
    }
    let memberships: Vec<usize> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = 0;
            for (j, w) in params.weights.iter().enumerate() {
                if *w > T::zero() {
                    pick = j;
                    acc += w.f64();
                    if u < acc {
                        break;
                    }
                }
            }
            pick
        })
        .collect();
    let events = sim_components(net, &params.centers, &memberships, params.w_s, params.w_t, mode, rng)?;
    let outside_mass = params
        .centers
        .iter()
        .map(|c| mass_outside_window(c.time.f64(), params.w_t.f64()))
        .collect();
    Ok(SyntheticTruth {
        params: params.clone(),
        memberships,
        events,
        outside_mass,
    })
}

/// Writes `event_id,cluster,t` (both ids 1-based).
pub fn write_truth_csv<T: Scalar>(
    path: impl AsRef<Path>,
    truth: &SyntheticTruth<T>,
    manifest: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = table::writer(path, manifest)?;
    w.write_record(["event_id", "cluster", "t"])?;
    for (i, (g, e)) in truth.memberships.iter().zip(&truth.events).enumerate() {
        w.write_record([(i + 1).to_string(), (g + 1).to_string(), e.time.to_string()])?;
    }
    table::finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max)
    }

    fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
        let stat: f64 = observed
            .iter()
            .zip(expected)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn zero_points_rejected() {
        let net = LinearNetwork::<f64>::lattice(3, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sim_poisson(&net, PoissonCount::Fixed(0), &mut rng).is_err());
        assert!(sim_poisson(&net, PoissonCount::Rate(-1.0), &mut rng).is_err());
    }

    #[test]
    fn counts_follow_segment_lengths() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0, 0.0], [100.0, 300.0]),
            (3, [100.0, 300.0], [0.0, 0.0]),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ev = sim_poisson(&net, PoissonCount::Fixed(50_000), &mut rng).unwrap();
        let mut counts = vec![0.0; 3];
        for e in &ev {
            counts[e.location.segment] += 1.0;
        }
        let expected: Vec<f64> = (0..3).map(|k| 50_000.0 * net.length(k) / net.total_length()).collect();
        assert!(chi_square_p(&counts, &expected) > 0.01);
    }

    #[test]
    fn times_are_uniform() {
        let net = LinearNetwork::<f64>::lattice(3, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ev = sim_poisson(&net, PoissonCount::Fixed(10_000), &mut rng).unwrap();
        // 1% critical value of the one-sample KS statistic
        assert!(ks_uniform(ev.iter().map(|e| e.time).collect()) < 1.628 / 100.0);
    }

    #[test]
    fn poisson_rate_mean() {
        let net = LinearNetwork::<f64>::lattice(3, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n: usize = (0..400)
            .map(|_| sim_poisson(&net, PoissonCount::Rate(0.05), &mut rng).unwrap().len())
            .sum();
        // mean 60 per draw, 400 draws
        let mean = n as f64 / 400.0;
        assert!((mean - 60.0).abs() < 3.0 * (60.0f64 / 400.0).sqrt());
    }

    fn one_center(net: &LinearNetwork<f64>, x: f64, t: f64, w_s: f64, w_t: f64) -> MixtureParams<f64> {
        MixtureParams {
            centers: vec![Center { location: net.nearest_point([x, 0.0]).point, pixel: None, time: t }],
            weights: vec![1.0],
            w_s,
            w_t,
        }
    }

    #[test]
    fn tiny_bandwidth_concentrates() {
        let net = LinearNetwork::<f64>::lattice(11, 100.0);
        let params = one_center(&net, 500.0, 0.5, 5.0, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = sim_mixture(&net, &params, 200, TimeMode::Truncated, &mut rng).unwrap();
        for e in &truth.events {
            let d = net.shortest_path_dist(&e.location, &params.centers[0].location);
            assert!(d < 4.0 * 5.0, "{d}");
        }
    }

    #[test]
    fn bandwidth_below_network_scale_is_reported() {
        let net = LinearNetwork::<f64>::lattice(11, 100.0);
        let params = one_center(&net, 500.0, 0.5, 0.001, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(matches!(
            sim_mixture(&net, &params, 1, TimeMode::Truncated, &mut rng),
            Err(Error::BandwidthTooSmall { .. })
        ));
    }

    #[test]
    fn spatial_histogram_follows_kernel_profile() {
        let net = LinearNetwork::<f64>::straight_line(1000.0, 10);
        let params = one_center(&net, 400.0, 0.5, 150.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let truth = sim_mixture(&net, &params, 20_000, TimeMode::Truncated, &mut rng).unwrap();
        let bins = 20;
        let mut counts = vec![0.0; bins];
        for e in &truth.events {
            counts[((e.location.xy[0] / 50.0) as usize).min(bins - 1)] += 1.0;
        }
        // bin masses of the Gaussian profile restricted to [0, 1000]
        let cdf = |x: f64| 1.0 - 0.5 * erfc((x - 400.0) / (150.0 * std::f64::consts::SQRT_2));
        let z = cdf(1000.0) - cdf(0.0);
        let expected: Vec<f64> = (0..bins)
            .map(|b| 20_000.0 * (cdf(50.0 * (b + 1) as f64) - cdf(50.0 * b as f64)) / z)
            .collect();
        assert!(chi_square_p(&counts, &expected) > 0.01);
    }

    #[test]
    fn truncated_times_stay_in_window() {
        let net = LinearNetwork::<f64>::lattice(5, 100.0);
        let params = one_center(&net, 200.0, 0.05, 100.0, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = sim_mixture(&net, &params, 2000, TimeMode::Truncated, &mut rng).unwrap();
        assert!(t.events.iter().all(|e| (0.0..=1.0).contains(&e.time)));
        let want = 0.5 * erfc(0.05 / (0.2 * std::f64::consts::SQRT_2))
            + 0.5 * erfc(0.95 / (0.2 * std::f64::consts::SQRT_2));
        assert!((t.outside_mass[0] - want).abs() < 1e-15);
        let u = sim_mixture(&net, &params, 2000, TimeMode::Untruncated, &mut rng).unwrap();
        let outside = u.events.iter().filter(|e| !(0.0..=1.0).contains(&e.time)).count() as f64 / 2000.0;
        assert!((outside - want).abs() < 3.0 * (want * (1.0 - want) / 2000.0).sqrt());
    }

    #[test]
    fn memberships_follow_weights() {
        let net = LinearNetwork::<f64>::lattice(5, 100.0);
        let c = |x: f64| Center { location: net.nearest_point([x, 0.0]).point, pixel: None, time: 0.5 };
        let params = MixtureParams {
            centers: vec![c(0.0), c(200.0), c(400.0)],
            weights: vec![0.5, 0.3, 0.2],
            w_s: 200.0,
            w_t: 0.2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let t = sim_mixture(&net, &params, n, TimeMode::Truncated, &mut rng).unwrap();
        for (j, &w) in params.weights.iter().enumerate() {
            let f = t.memberships.iter().filter(|&&g| g == j).count() as f64 / n as f64;
            assert!((f - w).abs() < 3.0 * (w * (1.0 - w) / n as f64).sqrt());
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let net = LinearNetwork::<f64>::lattice(5, 100.0);
        let params = one_center(&net, 200.0, 0.5, 100.0, 0.1);
        let a = sim_mixture(&net, &params, 50, TimeMode::Truncated, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        let b = sim_mixture(&net, &params, 50, TimeMode::Truncated, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
    }
}
