use crate::network::NetPoint;
use crate::scalar::Scalar;

use super::WeightMode;

/// Truncated stick-breaking: `q_1 = U_1`, `q_j = U_j ∏_{m<j} (1 - U_m)`,
/// with the last stick treated as 1 so the weights sum to one.
pub fn stick_breaking<T: Scalar>(sticks: &[T]) -> Vec<T> {
    let mut remaining = T::one();
    let last = sticks.len().saturating_sub(1);
    sticks
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let u = if j == last { T::one() } else { u };
            let q = u * remaining;
            remaining = remaining * (T::one() - u);
            q
        })
        .collect()
}

/// Log-space stick-breaking from `ln U_j` and `ln(1 - U_j)`, which stays
/// exact when sticks lie within rounding distance of one.
pub fn log_stick_breaking<T: Scalar>(log_u: &[T], log_1m_u: &[T]) -> Vec<T> {
    let mut rest = T::zero();
    let last = log_u.len().saturating_sub(1);
    log_u
        .iter()
        .zip(log_1m_u)
        .enumerate()
        .map(|(j, (&lu, &l1))| {
            let lq = if j == last { rest } else { lu + rest };
            rest = rest + l1;
            lq
        })
        .collect()
}

/// A space-time cluster center. Spatial centers come from the pixel
/// prior, so the originating cell is kept alongside the network point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center<T> {
    pub location: NetPoint<T>,
    pub pixel: Option<usize>,
    pub time: T,
}

/// One state of the Markov chain. Memberships are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<T> {
    pub w_s: T,
    pub w_t: T,
    pub b_u: T,
    pub sticks: Vec<T>,
    /// `ln(1 - U_j)`, kept separately because `U_j` may round to one.
    pub stick_log_complements: Vec<T>,
    pub weights: Vec<T>,
    pub memberships: Vec<usize>,
    pub centers: Vec<Center<T>>,
}

impl<T: Scalar> ChainState<T> {
    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.centers.len()];
        for &g in &self.memberships {
            c[g] += 1;
        }
        c
    }

    pub fn num_nonempty(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }

    /// Mixture weights used by the likelihood.
    pub fn mixture_weights(&self, mode: WeightMode) -> Vec<T> {
        match mode {
            WeightMode::AllClusters => self.weights.clone(),
            WeightMode::NonEmptyRenormalized => {
                let counts = self.counts();
                let mass: T = self
                    .weights
                    .iter()
                    .zip(&counts)
                    .filter(|(_, &c)| c > 0)
                    .map(|(&q, _)| q)
                    .sum();
                self.weights
                    .iter()
                    .zip(&counts)
                    .map(|(&q, &c)| if c > 0 { q / mass } else { T::zero() })
                    .collect()
            }
        }
    }

    /// Sets the sticks from `ln U_j` and `ln(1 - U_j)` and recomputes the
    /// weights.
    pub fn set_log_sticks(&mut self, log_u: &[T], log_1m_u: &[T]) {
        self.sticks = log_u.iter().map(|l| l.exp()).collect();
        self.stick_log_complements = log_1m_u.to_vec();
        self.weights = log_stick_breaking(log_u, log_1m_u)
            .into_iter()
            .map(|l| l.exp())
            .collect();
    }

    /// Sets the sticks directly.
    pub fn set_sticks(&mut self, sticks: &[T]) {
        let log_u: Vec<T> = sticks.iter().map(|u| u.ln()).collect();
        let log_1m: Vec<T> = sticks.iter().map(|&u| (-u).ln_1p()).collect();
        self.set_log_sticks(&log_u, &log_1m);
        self.sticks = sticks.to_vec();
    }
}
