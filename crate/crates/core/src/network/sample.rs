use rand::Rng;

use super::{LinearNetwork, NetPoint};
use crate::scalar::Scalar;

impl<T: Scalar> LinearNetwork<T> {
    /// One point from the uniform distribution on the network: segment
    /// chosen proportionally to length, offset uniform.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> NetPoint<T> {
        let target = T::of(rng.random::<f64>()) * self.total_length;
        let k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.num_segments() - 1);
        self.point(k, T::of(rng.random::<f64>()))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<NetPoint<T>> {
        (0..n).map(|_| self.sample_point(rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::grid;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn single_segment_offsets_are_uniform() {
        let net = LinearNetwork::<f64>::from_segments([(1, [0.0, 0.0], [50.0, 0.0])]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut offs: Vec<f64> = net
            .sample_uniform(10_000, &mut rng)
            .iter()
            .map(|p| p.offset)
            .collect();
        offs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = offs.len() as f64;
        let d = offs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        // asymptotic KS critical value at alpha = 0.01
        assert!(d < 1.628 / n.sqrt(), "KS D = {d}");
    }

    #[test]
    fn length_proportional_choice() {
        let net = LinearNetwork::<f64>::from_segments([
            (1, [0.0, 0.0], [100.0, 0.0]),
            (2, [100.0, 0.0], [400.0, 0.0]),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let hits = net
            .sample_uniform(n, &mut rng)
            .iter()
            .filter(|p| p.segment == 1)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.75).abs() < 3.0 * (0.1875 / n as f64).sqrt(), "{freq}");
    }

    #[test]
    fn grid_counts_pass_chi_square() {
        let net = grid(5, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50_000;
        let mut counts = vec![0usize; net.num_segments()];
        for p in net.sample_uniform(n, &mut rng) {
            counts[p.segment] += 1;
        }
        let stat: f64 = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let e = n as f64 * net.length(k) / net.total_length();
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let df = (net.num_segments() - 1) as f64;
        let p = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-square p = {p}");
    }

    #[test]
    fn sub_network_share_is_binomial() {
        // S = left half of the grid's horizontal streets
        let net = grid(5, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 20_000;
        let in_s = |p: &NetPoint<f64>| {
            let (u, v) = net.endpoints(p.segment);
            u[1] == v[1] && u[0] < 200.0
        };
        let s_len: f64 = (0..net.num_segments())
            .filter(|&k| in_s(&net.point(k, 0.5)))
            .map(|k| net.length(k))
            .sum();
        let share = s_len / net.total_length();
        let hits = net.sample_uniform(n, &mut rng).iter().filter(|p| in_s(p)).count();
        let sd = (n as f64 * share * (1.0 - share)).sqrt();
        assert!((hits as f64 - n as f64 * share).abs() < 3.0 * sd);
    }
}
