use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::Event;
use crate::network::PixelGrid;
use crate::scalar::Scalar;

use super::config::FitConfig;
use super::dahl::{dahl_select, DahlEstimate};
use super::likelihood::{mixture_log_likelihood, LogKernel, normalize_log_probs, ModelContext};
use super::state::{Center, ChainState};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    /// 0-based sweep index.
    pub iteration: usize,
    pub state: ChainState<T>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Acceptance {
    pub theta_proposed: usize,
    pub theta_accepted: usize,
    pub center_proposed: usize,
    pub center_accepted: usize,
    /// Proposals rejected because a center lost all nearby network.
    pub isolated_rejections: usize,
    /// Membership draws that fell back to uniform after underflow.
    pub degenerate_memberships: usize,
}

impl Acceptance {
    pub fn theta_rate(&self) -> f64 {
        self.theta_accepted as f64 / self.theta_proposed.max(1) as f64
    }

    pub fn center_rate(&self) -> f64 {
        self.center_accepted as f64 / self.center_proposed.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorRun<T> {
    pub config: FitConfig,
    /// RNG stream of this chain under the config seed.
    pub chain: u64,
    pub snapshots: Vec<Snapshot<T>>,
    pub acceptance: Acceptance,
}

impl<T: Scalar> PosteriorRun<T> {
    pub fn num_events(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.state.memberships.len())
    }

    fn mean_of(&self, f: impl Fn(&ChainState<T>) -> T) -> f64 {
        let n = self.snapshots.len().max(1) as f64;
        self.snapshots.iter().map(|s| f(&s.state).f64()).sum::<f64>() / n
    }

    pub fn mean_ws(&self) -> f64 {
        self.mean_of(|s| s.w_s)
    }

    pub fn mean_wt(&self) -> f64 {
        self.mean_of(|s| s.w_t)
    }

    pub fn mean_bu(&self) -> f64 {
        self.mean_of(|s| s.b_u)
    }

    pub fn partitions(&self) -> Vec<&[usize]> {
        self.snapshots.iter().map(|s| s.state.memberships.as_slice()).collect()
    }

    pub fn dahl(&self) -> Result<DahlEstimate> {
        dahl_select(&self.partitions())
    }
}

fn unit<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    T::of(rng.random::<f64>())
}

/// Draws a center from the discrete uniform prior: a random active pixel's
/// representative and a uniform time.
pub(crate) fn draw_center<T: Scalar>(pixels: &PixelGrid<T>, rng: &mut ChaCha8Rng) -> Center<T> {
    let cells = pixels.active_cells();
    let cell = cells[rng.random_range(0..cells.len())];
    Center {
        location: *pixels.representative(cell).expect("active cell has a representative"),
        pixel: Some(cell),
        time: unit(rng),
    }
}

/// Log of a Gamma(shape, 1) draw, accurate for shapes far below one where
/// the draw itself underflows.
fn ln_gamma_draw(shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    if shape < 1.0 {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = 1.0 - rng.random::<f64>();
        g.ln() + u.ln() / shape
    } else {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    }
}

/// `(ln U, ln(1 - U))` for `U ~ Beta(a, b)`.
fn log_beta_draw(a: f64, b: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (la, lb) = (ln_gamma_draw(a, rng), ln_gamma_draw(b, rng));
    let m = la.max(lb);
    let total = m + ((la - m).exp() + (lb - m).exp()).ln();
    (la - total, lb - total)
}

fn set_log_sticks<T: Scalar>(state: &mut ChainState<T>, draws: Vec<(f64, f64)>) {
    let log_u: Vec<T> = draws.iter().map(|d| T::of(d.0)).collect();
    let log_1m: Vec<T> = draws.iter().map(|d| T::of(d.1)).collect();
    state.set_log_sticks(&log_u, &log_1m);
}

fn prior_stick_draws(m: usize, b_u: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    (0..m)
        .map(|j| {
            if j + 1 == m {
                (0.0, f64::NEG_INFINITY)
            } else {
                log_beta_draw(1.0, b_u, rng)
            }
        })
        .collect()
}

/// Conjugate Beta draws of the sticks given the memberships, followed by
/// the weight update. The last stick stays at 1.
pub fn update_sticks<T: Scalar>(state: &mut ChainState<T>, rng: &mut ChaCha8Rng) {
    let counts = state.counts();
    let m = counts.len();
    let mut tail: usize = counts.iter().sum();
    let b_u = state.b_u.f64();
    let draws = (0..m)
        .map(|j| {
            tail -= counts[j];
            if j + 1 == m {
                (0.0, f64::NEG_INFINITY)
            } else {
                log_beta_draw(1.0 + counts[j] as f64, b_u + tail as f64, rng)
            }
        })
        .collect();
    set_log_sticks(state, draws);
}

/// Conjugate Gamma draw of the concentration given the sticks.
pub fn update_concentration<T: Scalar>(
    state: &mut ChainState<T>,
    cfg: &FitConfig,
    rng: &mut ChaCha8Rng,
) {
    let m = state.sticks.len();
    let log_rest: f64 = state.stick_log_complements[..m - 1]
        .iter()
        .map(|l| l.f64())
        .sum();
    let rate = cfg.hyper_rate - log_rest;
    let gamma = Gamma::new(m as f64, 1.0 / rate).expect("positive Gamma parameters");
    let draw = gamma.sample(rng).max(f64::MIN_POSITIVE);
    state.b_u = T::of(draw);
}

/// Draws a complete state from the hierarchical prior for `n` events.
pub fn sample_prior<T: Scalar>(
    cfg: &FitConfig,
    pixels: &PixelGrid<T>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> ChainState<T> {
    let m = cfg.max_clusters;
    let (lo, hi) = cfg.ws_bounds;
    let w_s = T::of(rng.random_range(lo..=hi));
    let w_t = T::of(cfg.wt_max * (1.0 - rng.random::<f64>()));
    let b_u = Gamma::new(1.0, 1.0 / cfg.hyper_rate)
        .expect("positive rate")
        .sample(rng)
        .max(f64::MIN_POSITIVE);
    let mut state = ChainState {
        w_s,
        w_t,
        b_u: T::of(b_u),
        sticks: Vec::new(),
        stick_log_complements: Vec::new(),
        weights: Vec::new(),
        memberships: Vec::new(),
        centers: Vec::new(),
    };
    set_log_sticks(&mut state, prior_stick_draws(m, b_u, rng));
    state.memberships = (0..n).map(|_| categorical(&state.weights, rng)).collect();
    state.centers = (0..m).map(|_| draw_center(pixels, rng)).collect();
    state
}

fn categorical<T: Scalar>(p: &[T], rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &pj) in p.iter().enumerate() {
        if pj > T::zero() {
            acc += pj.f64();
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    loop {
        if x < lo {
            x = 2.0 * lo - x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
}

/// One Markov chain: the state, the cached correction terms of every
/// center at the current `w_s`, and the RNG.
pub struct Sampler<'a, T> {
    ctx: ModelContext<'a, T>,
    cfg: FitConfig,
    events: Vec<Event<T>>,
    state: ChainState<T>,
    log_corr: Vec<T>,
    rng: ChaCha8Rng,
    acceptance: Acceptance,
}

impl<'a, T: Scalar> Sampler<'a, T> {
    /// Starts a chain from the default initialization.
    pub fn new(
        ctx: ModelContext<'a, T>,
        cfg: &FitConfig,
        events: Vec<Event<T>>,
        mut rng: ChaCha8Rng,
    ) -> Result<Self> {
        cfg.validate()?;
        if events.is_empty() {
            return Err(Error::Empty("no events to fit".into()));
        }
        if ctx.pixels.active_cells().is_empty() {
            return Err(Error::Degenerate("pixel grid has no active cells".into()));
        }
        let m = cfg.max_clusters;
        let w_s = T::of(cfg.init_ws);
        let stick_draws = prior_stick_draws(m, cfg.init_bu, &mut rng);
        let memberships = (0..events.len()).map(|_| rng.random_range(0..m)).collect();
        let mut centers = Vec::with_capacity(m);
        for _ in 0..m {
            let mut tries = 0;
            let c = loop {
                let c = draw_center(ctx.pixels, &mut rng);
                match ctx.kernels.correction_term(c.location.xy, w_s) {
                    Ok(_) => break c,
                    Err(e) if tries >= 1000 => return Err(e),
                    Err(_) => tries += 1,
                }
            };
            centers.push(c);
        }
        let mut state = ChainState {
            w_s,
            w_t: T::of(cfg.init_wt),
            b_u: T::of(cfg.init_bu),
            sticks: Vec::new(),
            stick_log_complements: Vec::new(),
            weights: Vec::new(),
            memberships,
            centers,
        };
        set_log_sticks(&mut state, stick_draws);
        let sampler = Self::with_state(ctx, cfg, events, state, rng)?;
        let kernel = LogKernel::new(sampler.state.w_s, sampler.state.w_t);
        let log_q = sampler.log_weights();
        for (i, ev) in sampler.events.iter().enumerate() {
            let logp = sampler.membership_log_weights(ev, &log_q, &kernel);
            if !logp.iter().any(|x| x.is_finite()) {
                return Err(Error::NonFinite(format!("event {i} has zero density")));
            }
        }
        Ok(sampler)
    }

    /// Starts a chain from a given state.
    pub fn with_state(
        ctx: ModelContext<'a, T>,
        cfg: &FitConfig,
        events: Vec<Event<T>>,
        state: ChainState<T>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if state.memberships.len() != events.len() {
            return Err(Error::InvalidArgument(format!(
                "state has {} memberships for {} events",
                state.memberships.len(),
                events.len()
            )));
        }
        let log_corr = Self::corrections(&ctx, &state.centers, state.w_s)?;
        Ok(Sampler {
            ctx,
            cfg: cfg.clone(),
            events,
            state,
            log_corr,
            rng,
            acceptance: Acceptance::default(),
        })
    }

    fn corrections(ctx: &ModelContext<'_, T>, centers: &[Center<T>], w_s: T) -> Result<Vec<T>> {
        centers
            .iter()
            .map(|c| ctx.kernels.correction_term(c.location.xy, w_s).map(|v| v.ln()))
            .collect()
    }

    pub fn state(&self) -> &ChainState<T> {
        &self.state
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn acceptance(&self) -> Acceptance {
        self.acceptance
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Replaces the data while keeping the chain state, as needed by
    /// successive-conditional simulation.
    pub fn set_events(&mut self, events: Vec<Event<T>>) -> Result<()> {
        if events.len() != self.events.len() {
            return Err(Error::InvalidArgument("event count must not change".into()));
        }
        self.events = events;
        Ok(())
    }

    /// Log likelihood of the current data under the configured weight mode.
    pub fn log_likelihood(&self) -> T {
        self.log_likelihood_at(self.state.w_s, self.state.w_t, &self.log_corr)
    }

    fn log_likelihood_at(&self, w_s: T, w_t: T, log_corr: &[T]) -> T {
        let weights = self.state.mixture_weights(self.cfg.weight_mode);
        mixture_log_likelihood(&self.events, &self.state.centers, &weights, log_corr, w_s, w_t)
    }

    /// Log acceptance ratio for moving the range parameters to
    /// `(w_s, w_t)`, including the Jacobian of the log-scale walk. `None`
    /// when some center would be isolated at the proposed `w_s`.
    pub fn theta_log_ratio(&self, w_s: T, w_t: T) -> Option<(T, Vec<T>)> {
        let log_corr = Self::corrections(&self.ctx, &self.state.centers, w_s).ok()?;
        let proposed = self.log_likelihood_at(w_s, w_t, &log_corr);
        let current = self.log_likelihood();
        let jacobian = w_s.ln() + w_t.ln() - self.state.w_s.ln() - self.state.w_t.ln();
        let ratio = if proposed == T::neg_infinity() {
            T::neg_infinity()
        } else {
            proposed - current + jacobian
        };
        Some((ratio, log_corr))
    }

    pub fn update_theta(&mut self) {
        let (lo, hi) = self.cfg.ws_bounds;
        let z1: f64 = StandardNormal.sample(&mut self.rng);
        let z2: f64 = StandardNormal.sample(&mut self.rng);
        let ls = reflect(self.state.w_s.f64().ln() + self.cfg.step_log_ws * z1, lo.ln(), hi.ln());
        let mut lt = self.state.w_t.f64().ln() + self.cfg.step_log_wt * z2;
        let lt_max = self.cfg.wt_max.ln();
        if lt > lt_max {
            lt = 2.0 * lt_max - lt;
        }
        let (w_s, w_t) = (T::of(ls.exp()), T::of(lt.exp()));
        let u: f64 = self.rng.random();
        self.acceptance.theta_proposed += 1;
        match self.theta_log_ratio(w_s, w_t) {
            Some((ratio, log_corr)) => {
                if u.ln() < ratio.f64() {
                    self.state.w_s = w_s;
                    self.state.w_t = w_t;
                    self.log_corr = log_corr;
                    self.acceptance.theta_accepted += 1;
                }
            }
            None => self.acceptance.isolated_rejections += 1,
        }
    }

    fn membership_log_weights(&self, ev: &Event<T>, log_q: &[T], kernel: &LogKernel<T>) -> Vec<T> {
        self.state
            .centers
            .iter()
            .zip(log_q)
            .zip(&self.log_corr)
            .map(|((c, &lq), &lc)| {
                if lq > T::neg_infinity() {
                    lq + kernel.eval(ev, c, lc)
                } else {
                    T::neg_infinity()
                }
            })
            .collect()
    }

    fn log_weights(&self) -> Vec<T> {
        self.state
            .weights
            .iter()
            .map(|&q| if q > T::zero() { q.ln() } else { T::neg_infinity() })
            .collect()
    }

    /// Membership probabilities of event `i` under the current state.
    pub fn membership_probs(&self, i: usize) -> Vec<T> {
        let kernel = LogKernel::new(self.state.w_s, self.state.w_t);
        let mut p = self.membership_log_weights(&self.events[i], &self.log_weights(), &kernel);
        normalize_log_probs(&mut p, |j| self.state.weights[j] > T::zero());
        p
    }

    pub fn update_memberships(&mut self) {
        let kernel = LogKernel::new(self.state.w_s, self.state.w_t);
        let log_q = self.log_weights();
        for i in 0..self.events.len() {
            let mut p = self.membership_log_weights(&self.events[i], &log_q, &kernel);
            let weights = &self.state.weights;
            if normalize_log_probs(&mut p, |j| weights[j] > T::zero()) {
                self.acceptance.degenerate_memberships += 1;
            }
            self.state.memberships[i] = categorical(&p, &mut self.rng);
        }
    }

    pub fn update_sticks(&mut self) {
        update_sticks(&mut self.state, &mut self.rng);
    }

    pub fn update_concentration(&mut self) {
        update_concentration(&mut self.state, &self.cfg, &mut self.rng);
    }

    fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.state.num_clusters()];
        for (i, &g) in self.state.memberships.iter().enumerate() {
            members[g].push(i);
        }
        members
    }

    fn member_log_lik(&self, members: &[usize], c: &Center<T>, log_corr: T) -> T {
        let kernel = LogKernel::new(self.state.w_s, self.state.w_t);
        members
            .iter()
            .map(|&i| kernel.eval(&self.events[i], c, log_corr))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Log acceptance ratio for moving center `j` to `proposal`, or `None`
    /// if the proposal is isolated.
    pub fn center_log_ratio(&self, j: usize, proposal: &Center<T>) -> Option<(T, T)> {
        let log_corr = self
            .ctx
            .kernels
            .correction_term(proposal.location.xy, self.state.w_s)
            .ok()?
            .ln();
        let members: Vec<usize> = (0..self.events.len())
            .filter(|&i| self.state.memberships[i] == j)
            .collect();
        let ratio = self.member_log_lik(&members, proposal, log_corr)
            - self.member_log_lik(&members, &self.state.centers[j], self.log_corr[j]);
        Some((ratio, log_corr))
    }

    pub fn update_centers(&mut self) {
        let members = self.members();
        for (j, members) in members.iter().enumerate() {
            let proposal = draw_center(self.ctx.pixels, &mut self.rng);
            self.acceptance.center_proposed += 1;
            let Ok(corr) = self
                .ctx
                .kernels
                .correction_term(proposal.location.xy, self.state.w_s)
            else {
                self.acceptance.isolated_rejections += 1;
                continue;
            };
            let log_corr = corr.ln();
            let accept = members.is_empty() || {
                let ratio = self.member_log_lik(members, &proposal, log_corr)
                    - self.member_log_lik(members, &self.state.centers[j], self.log_corr[j]);
                self.rng.random::<f64>().ln() < ratio.f64()
            };
            if accept {
                self.state.centers[j] = proposal;
                self.log_corr[j] = log_corr;
                self.acceptance.center_accepted += 1;
            }
        }
    }

    /// One full sweep: range parameters, memberships, sticks and
    /// concentration, then centers.
    pub fn sweep(&mut self) {
        self.update_theta();
        self.update_memberships();
        self.update_sticks();
        self.update_concentration();
        self.update_centers();
    }

    pub fn into_parts(self) -> (ChainState<T>, Acceptance, ChaCha8Rng) {
        (self.state, self.acceptance, self.rng)
    }
}

fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

fn run_chain<T: Scalar>(
    events: &[Event<T>],
    ctx: ModelContext<'_, T>,
    cfg: &FitConfig,
    chain: u64,
) -> Result<PosteriorRun<T>> {
    let mut sampler = Sampler::new(ctx, cfg, events.to_vec(), chain_rng(cfg.seed, chain))?;
    let mut snapshots = Vec::with_capacity(cfg.retained());
    for it in 0..cfg.iterations {
        sampler.sweep();
        if cfg.keeps(it) {
            snapshots.push(Snapshot { iteration: it, state: sampler.state().clone() });
        }
    }
    Ok(PosteriorRun {
        config: cfg.clone(),
        chain,
        snapshots,
        acceptance: sampler.acceptance(),
    })
}

/// Runs one chain; the result is a deterministic function of the events,
/// network and config.
pub fn run_mcmc<T: Scalar>(
    events: &[Event<T>],
    ctx: ModelContext<'_, T>,
    cfg: &FitConfig,
) -> Result<PosteriorRun<T>> {
    run_chain(events, ctx, cfg, 0)
}

/// Runs independent chains in parallel on separate RNG streams.
pub fn run_chains<T: Scalar>(
    events: &[Event<T>],
    ctx: ModelContext<'_, T>,
    cfg: &FitConfig,
    chains: usize,
) -> Result<Vec<PosteriorRun<T>>> {
    (0..chains as u64)
        .into_par_iter()
        .map(|c| run_chain(events, ctx, cfg, c))
        .collect()
}
