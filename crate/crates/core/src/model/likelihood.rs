use crate::error::Result;
use crate::events::Event;
use crate::kernels::KernelConfig;
use crate::network::{LinearNetwork, PixelGrid};
use crate::scalar::{LogSumExp, Scalar};

use super::state::{Center, ChainState};
use super::WeightMode;

/// Fixed inputs shared by every likelihood evaluation of one fit.
#[derive(Debug, Clone, Copy)]
pub struct ModelContext<'a, T> {
    pub net: &'a LinearNetwork<T>,
    pub kernels: &'a KernelConfig<T>,
    pub pixels: &'a PixelGrid<T>,
}

/// `ln c_L` for the centers flagged in `needed`; entries not needed are
/// left at zero.
pub(crate) fn log_corrections<T: Scalar>(
    kernels: &KernelConfig<T>,
    centers: &[Center<T>],
    w_s: T,
    needed: impl Fn(usize) -> bool,
) -> Result<Vec<T>> {
    centers
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if needed(j) {
                kernels.correction_term(c.location.xy, w_s).map(|v| v.ln())
            } else {
                Ok(T::zero())
            }
        })
        .collect()
}

/// Log of the joint space-time kernel `K_S K_T` of an event for one center.
/// Log of the space-time kernel with the bandwidth-only terms computed
/// once per `(w_s, w_t)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogKernel<T> {
    offset: T,
    a_s: T,
    a_t: T,
}

impl<T: Scalar> LogKernel<T> {
    pub(crate) fn new(w_s: T, w_t: T) -> Self {
        let two_pi = T::of(2.0) * T::PI();
        LogKernel {
            offset: -(two_pi * w_s * w_s).ln() - w_t.ln() - T::of(0.5) * two_pi.ln(),
            a_s: T::one() / (T::of(2.0) * w_s * w_s),
            a_t: T::one() / (T::of(2.0) * w_t * w_t),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, ev: &Event<T>, c: &Center<T>, log_corr: T) -> T {
        let (dx, dy) = (ev.location.xy[0] - c.location.xy[0], ev.location.xy[1] - c.location.xy[1]);
        let dt = ev.time - c.time;
        self.offset - log_corr - (dx * dx + dy * dy) * self.a_s - dt * dt * self.a_t
    }
}

pub(crate) fn event_log_density<T: Scalar>(
    ev: &Event<T>,
    centers: &[Center<T>],
    log_w: &[T],
    log_corr: &[T],
    kernel: &LogKernel<T>,
) -> T {
    let mut acc = LogSumExp::default();
    for (j, c) in centers.iter().enumerate() {
        if log_w[j] > T::neg_infinity() {
            acc.push(log_w[j] + kernel.eval(ev, c, log_corr[j]));
        }
    }
    acc.value()
}

/// Sums per-event terms in a canonical order so the total does not depend
/// on how the events are listed.
pub(crate) fn ordered_sum<T: Scalar>(mut terms: Vec<T>) -> T {
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    terms.into_iter().fold(T::zero(), |a, b| a + b)
}

pub(crate) fn mixture_log_likelihood<T: Scalar>(
    events: &[Event<T>],
    centers: &[Center<T>],
    weights: &[T],
    log_corr: &[T],
    w_s: T,
    w_t: T,
) -> T {
    let log_w: Vec<T> = weights.iter().map(|w| w.ln()).collect();
    let kernel = LogKernel::new(w_s, w_t);
    ordered_sum(
        events
            .iter()
            .map(|ev| event_log_density(ev, centers, &log_w, log_corr, &kernel))
            .collect(),
    )
}

/// Log likelihood of the events under the mixture implied by `state`,
/// with weights chosen by `mode`. An isolated center carrying positive
/// weight makes the likelihood zero.
pub fn log_likelihood<T: Scalar>(
    state: &ChainState<T>,
    events: &[Event<T>],
    ctx: &ModelContext<'_, T>,
    mode: WeightMode,
) -> T {
    let weights = state.mixture_weights(mode);
    match log_corrections(ctx.kernels, &state.centers, state.w_s, |j| weights[j] > T::zero()) {
        Ok(log_corr) => {
            mixture_log_likelihood(events, &state.centers, &weights, &log_corr, state.w_s, state.w_t)
        }
        Err(_) => T::neg_infinity(),
    }
}

/// Normalizes log weights into probabilities. When every term vanishes the
/// result is uniform over `fallback` and the flag is set.
pub(crate) fn normalize_log_probs<T: Scalar>(
    logp: &mut [T],
    fallback: impl Fn(usize) -> bool,
) -> bool {
    let mut acc = LogSumExp::default();
    logp.iter().for_each(|&x| acc.push(x));
    let total = acc.value();
    if total.is_finite() {
        for x in logp.iter_mut() {
            *x = (*x - total).exp();
        }
        false
    } else {
        let n = (0..logp.len()).filter(|&j| fallback(j)).count();
        let p = T::one() / T::of_usize(n.max(1));
        for (j, x) in logp.iter_mut().enumerate() {
            *x = if fallback(j) { p } else { T::zero() };
        }
        true
    }
}

/// Full conditional of one event's membership, `∝ q_j K_S K_T`, over all
/// truncation slots.
pub fn membership_probs<T: Scalar>(
    event: &Event<T>,
    state: &ChainState<T>,
    ctx: &ModelContext<'_, T>,
) -> Vec<T> {
    let kernel = LogKernel::new(state.w_s, state.w_t);
    let mut logp: Vec<T> = state
        .centers
        .iter()
        .zip(&state.weights)
        .map(|(c, &q)| match ctx.kernels.correction_term(c.location.xy, state.w_s) {
            Ok(corr) if q > T::zero() => {
                q.ln() + kernel.eval(event, c, corr.ln())
            }
            _ => T::neg_infinity(),
        })
        .collect();
    normalize_log_probs(&mut logp, |j| state.weights[j] > T::zero());
    logp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{planar_gaussian, temporal_kernel};
    use crate::network::fixtures::grid;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        net: LinearNetwork<f64>,
        kernels: KernelConfig<f64>,
        pixels: PixelGrid<f64>,
    }

    fn fixture() -> Fixture {
        let net = grid(6, 100.0);
        let kernels = KernelConfig::sample(&net, 500, 3);
        let pixels = net.pixelate(10, 10);
        Fixture { net, kernels, pixels }
    }

    fn random_state(f: &Fixture, m: usize, n: usize, rng: &mut ChaCha8Rng) -> ChainState<f64> {
        let sticks: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..0.9)).collect();
        let centers = (0..m)
            .map(|_| {
                let p = f.net.sample_point(rng);
                Center { location: p, pixel: None, time: rng.random() }
            })
            .collect();
        let mut s = ChainState {
            w_s: 150.0,
            w_t: 0.15,
            b_u: 1.0,
            sticks: Vec::new(),
            stick_log_complements: Vec::new(),
            weights: Vec::new(),
            memberships: (0..n).map(|_| rng.random_range(0..m)).collect(),
            centers,
        };
        s.set_sticks(&sticks);
        s
    }

    fn random_events(f: &Fixture, n: usize, rng: &mut ChaCha8Rng) -> Vec<Event<f64>> {
        (0..n)
            .map(|_| Event::new(f.net.sample_point(rng), rng.random()))
            .collect()
    }

    #[test]
    fn likelihood_matches_direct_product() {
        let f = fixture();
        let ctx = ModelContext { net: &f.net, kernels: &f.kernels, pixels: &f.pixels };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = random_state(&f, 4, 20, &mut rng);
        let events = random_events(&f, 20, &mut rng);
        let counts = state.counts();
        let mass: f64 = (0..4).filter(|&j| counts[j] > 0).map(|j| state.weights[j]).sum();
        let mut direct = 0.0;
        for ev in &events {
            let mut dens = 0.0;
            for j in 0..4 {
                if counts[j] == 0 {
                    continue;
                }
                let c = &state.centers[j];
                let corr = f.kernels.correction_term(c.location.xy, state.w_s).unwrap();
                dens += state.weights[j] / mass
                    * planar_gaussian(ev.location.xy, c.location.xy, state.w_s)
                    / corr
                    * temporal_kernel(ev.time, c.time, state.w_t);
            }
            direct += dens.ln();
        }
        let ll = log_likelihood(&state, &events, &ctx, WeightMode::NonEmptyRenormalized);
        assert!((ll - direct).abs() < 1e-9 * direct.abs(), "{ll} vs {direct}");
    }

    #[test]
    fn event_order_is_irrelevant() {
        let f = fixture();
        let ctx = ModelContext { net: &f.net, kernels: &f.kernels, pixels: &f.pixels };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let state = random_state(&f, 6, 50, &mut rng);
        let mut events = random_events(&f, 50, &mut rng);
        let a = log_likelihood(&state, &events, &ctx, WeightMode::AllClusters);
        events.shuffle(&mut rng);
        let b = log_likelihood(&state, &events, &ctx, WeightMode::AllClusters);
        assert_eq!(a, b);
    }

    #[test]
    fn membership_probabilities_normalize() {
        let f = fixture();
        let ctx = ModelContext { net: &f.net, kernels: &f.kernels, pixels: &f.pixels };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = random_state(&f, 5, 1, &mut rng);
        let ev = random_events(&f, 1, &mut rng)[0];
        let p = membership_probs(&ev, &state, &ctx);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // ratios follow q_j K_S K_T
        let k = |j: usize| {
            let c = &state.centers[j];
            state.weights[j] * f.kernels.spatial_kernel(ev.location.xy, c.location.xy, 150.0).unwrap()
                * temporal_kernel(ev.time, c.time, 0.15)
        };
        assert!((p[0] / p[1] - k(0) / k(1)).abs() < 1e-9 * (k(0) / k(1)));
    }

    #[test]
    fn underflow_falls_back_to_uniform() {
        let mut logp = vec![f64::NEG_INFINITY; 4];
        let degenerate = normalize_log_probs(&mut logp, |j| j != 2);
        assert!(degenerate);
        assert_eq!(logp, vec![1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0]);
    }
}
