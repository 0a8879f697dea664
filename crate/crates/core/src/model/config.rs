use crate::error::{Error, Result};
use crate::kernels::{KernelConfig, DEFAULT_MC_POINTS};
use crate::network::{LinearNetwork, PixelGrid};
use crate::scalar::Scalar;

/// Which mixture weights enter the likelihood of the range parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Only clusters holding at least one event, weights rescaled to sum
    /// to one over them.
    NonEmptyRenormalized,
    /// Every truncation slot with its raw stick-breaking weight; this is
    /// the mixture with memberships integrated out.
    AllClusters,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "renormalized" | "nonempty" => Ok(WeightMode::NonEmptyRenormalized),
            "all" | "raw" => Ok(WeightMode::AllClusters),
            other => Err(Error::InvalidArgument(format!("unknown weight mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightMode::NonEmptyRenormalized => "renormalized",
            WeightMode::AllClusters => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Truncation level M.
    pub max_clusters: usize,
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub thin: usize,
    /// Random-walk standard deviations on log w_s and log w_t.
    pub step_log_ws: f64,
    pub step_log_wt: f64,
    /// Rate c of the Gamma(1, c) hyperprior on the concentration.
    pub hyper_rate: f64,
    pub seed: u64,
    pub mc_points: usize,
    /// Seed of the Monte Carlo point set; derived from `seed` when unset.
    pub mc_seed: Option<u64>,
    pub pixel_rows: usize,
    pub pixel_cols: usize,
    pub weight_mode: WeightMode,
    /// Support of the uniform prior on w_s (meters).
    pub ws_bounds: (f64, f64),
    /// Upper end of the uniform prior on w_t.
    pub wt_max: f64,
    pub init_ws: f64,
    pub init_wt: f64,
    pub init_bu: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_clusters: 80,
            iterations: 20_000,
            burn_in_fraction: 0.5,
            thin: 10,
            step_log_ws: 0.08,
            step_log_wt: 0.08,
            hyper_rate: 1.0,
            seed: 1,
            mc_points: DEFAULT_MC_POINTS,
            mc_seed: None,
            pixel_rows: 50,
            pixel_cols: 50,
            weight_mode: WeightMode::NonEmptyRenormalized,
            ws_bounds: (100.0, 1000.0),
            wt_max: 1.0,
            init_ws: 300.0,
            init_wt: 0.2,
            init_bu: 1.0,
        }
    }
}

impl FitConfig {
    pub fn burn_in(&self) -> usize {
        (self.iterations as f64 * self.burn_in_fraction).floor() as usize
    }

    /// Number of snapshots a run keeps.
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in()) / self.thin.max(1)
    }

    /// Whether the 0-based iteration `it` is kept.
    pub fn keeps(&self, it: usize) -> bool {
        let b = self.burn_in();
        it >= b && (it - b + 1).is_multiple_of(self.thin)
    }

    pub fn effective_mc_seed(&self) -> u64 {
        self.mc_seed
            .unwrap_or_else(|| self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15))
    }

    pub fn kernels<T: Scalar>(&self, net: &LinearNetwork<T>) -> KernelConfig<T> {
        KernelConfig::sample(net, self.mc_points, self.effective_mc_seed())
    }

    pub fn pixels<T: Scalar>(&self, net: &LinearNetwork<T>) -> PixelGrid<T> {
        net.pixelate(self.pixel_rows, self.pixel_cols)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.max_clusters < 2 {
            return bad(format!("max_clusters must be >= 2, got {}", self.max_clusters));
        }
        if self.thin == 0 {
            return bad("thin must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return bad(format!("burn-in fraction {} outside [0, 1)", self.burn_in_fraction));
        }
        if self.iterations <= self.burn_in() {
            return bad(format!(
                "iterations ({}) must exceed the burn-in count ({})",
                self.iterations,
                self.burn_in()
            ));
        }
        if self.retained() == 0 {
            return bad("thinning leaves no retained iterations".into());
        }
        if !(self.step_log_ws > 0.0 && self.step_log_wt > 0.0) {
            return bad("proposal steps must be positive".into());
        }
        if !(self.hyper_rate > 0.0) {
            return bad("hyperprior rate must be positive".into());
        }
        let (lo, hi) = self.ws_bounds;
        if !(lo > 0.0 && hi > lo) {
            return bad(format!("invalid w_s bounds ({lo}, {hi})"));
        }
        if !(self.wt_max > 0.0) {
            return bad("w_t upper bound must be positive".into());
        }
        if !(self.init_ws >= lo && self.init_ws <= hi) {
            return bad(format!("initial w_s {} outside [{lo}, {hi}]", self.init_ws));
        }
        if !(self.init_wt > 0.0 && self.init_wt <= self.wt_max) {
            return bad(format!("initial w_t {} outside (0, {}]", self.init_wt, self.wt_max));
        }
        if !(self.init_bu > 0.0) {
            return bad("initial concentration must be positive".into());
        }
        if self.mc_points == 0 || self.pixel_rows == 0 || self.pixel_cols == 0 {
            return bad("Monte Carlo points and pixel grid must be non-empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_snapshot_count() {
        let cfg = FitConfig::default();
        assert_eq!(cfg.burn_in(), 10_000);
        assert_eq!(cfg.retained(), 1000);
        assert_eq!((0..cfg.iterations).filter(|&i| cfg.keeps(i)).count(), 1000);
        cfg.validate().unwrap();
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        for cfg in [
            FitConfig { max_clusters: 1, ..Default::default() },
            FitConfig { iterations: 10, thin: 20, ..Default::default() },
            FitConfig { hyper_rate: 0.0, ..Default::default() },
            FitConfig { init_ws: 50.0, ..Default::default() },
            FitConfig { burn_in_fraction: 1.0, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
