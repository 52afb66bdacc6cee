use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{check_non_negative, SimError};

/// Photon-number distribution of one temporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairStatistics {
    /// Single-mode thermal (Bose–Einstein), `P(n) = μⁿ/(1+μ)ⁿ⁺¹`.
    #[default]
    Thermal,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSourceModel {
    pub mean_pairs_per_mode: f64,
    pub mode_duration_ps: u64,
    pub duration_s: f64,
    pub statistics: PairStatistics,
}

impl PairSourceModel {
    pub fn new(mean_pairs_per_mode: f64, mode_duration_ps: u64, duration_s: f64) -> Result<Self, SimError> {
        let m = Self {
            mean_pairs_per_mode,
            mode_duration_ps,
            duration_s,
            statistics: PairStatistics::Thermal,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_statistics(mut self, statistics: PairStatistics) -> Self {
        self.statistics = statistics;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        check_non_negative("mean_pairs_per_mode", self.mean_pairs_per_mode)?;
        if self.mode_duration_ps == 0 {
            return Err(SimError::InvalidParameter {
                name: "mode_duration_ps",
                reason: "must be positive".into(),
            });
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) || self.duration_ps() == 0 {
            return Err(SimError::InvalidParameter {
                name: "duration_s",
                reason: format!("{} must be positive", self.duration_s),
            });
        }
        Ok(())
    }

    pub fn duration_ps(&self) -> u64 {
        (self.duration_s * 1e12).round() as u64
    }

    /// Whole modes inside the acquisition; a trailing partial mode is dropped.
    pub fn mode_count(&self) -> u64 {
        self.duration_ps() / self.mode_duration_ps
    }

    pub fn pair_rate_cps(&self) -> f64 {
        self.mean_pairs_per_mode / (self.mode_duration_ps as f64 * 1e-12)
    }
}

/// Pair emission times; signal and idler photons of a pair share a timestamp.
///
/// Only non-empty modes are visited: the gap to the next one is geometric
/// and the occupation is drawn conditioned on `n ≥ 1`.
pub fn simulate_pair_source<R: Rng>(model: &PairSourceModel, rng: &mut R) -> Result<Vec<u64>, SimError> {
    model.validate()?;
    let mu = model.mean_pairs_per_mode;
    let modes = model.mode_count();
    if mu == 0.0 || modes == 0 {
        return Ok(Vec::new());
    }
    let p_occupied = match model.statistics {
        PairStatistics::Thermal => mu / (1.0 + mu),
        PairStatistics::Poisson => -(-mu).exp_m1(),
    };
    let gap = Geometric::new(p_occupied).map_err(|e| SimError::InvalidParameter {
        name: "mean_pairs_per_mode",
        reason: e.to_string(),
    })?;
    let thermal_extra = Geometric::new(1.0 / (1.0 + mu)).expect("probability in (0, 1]");

    let mut times = Vec::with_capacity((modes as f64 * mu * 1.05) as usize + 16);
    let mut mode = 0u64;
    loop {
        mode = match mode.checked_add(gap.sample(rng)) {
            Some(m) if m < modes => m,
            _ => break,
        };
        let n = match model.statistics {
            PairStatistics::Thermal => 1 + thermal_extra.sample(rng),
            PairStatistics::Poisson => truncated_poisson(mu, rng),
        };
        let start = mode * model.mode_duration_ps;
        let first = times.len();
        for _ in 0..n {
            times.push(start + rng.random_range(0..model.mode_duration_ps));
        }
        times[first..].sort_unstable();
        mode += 1;
    }
    Ok(times)
}

/// Poisson(μ) conditioned on `n ≥ 1`, by inversion.
fn truncated_poisson<R: Rng>(mu: f64, rng: &mut R) -> u64 {
    let p0 = (-mu).exp();
    let u = p0 + (1.0 - p0) * rng.random::<f64>();
    let mut n = 1u64;
    let mut pmf = p0 * mu;
    let mut cdf = p0 + pmf;
    while u > cdf && pmf > 0.0 {
        n += 1;
        pmf *= mu / n as f64;
        cdf += pmf;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_mu_is_empty() {
        let m = PairSourceModel::new(0.0, 1500, 1.0).unwrap();
        assert!(simulate_pair_source(&m, &mut ChaCha8Rng::seed_from_u64(1)).unwrap().is_empty());
    }

    #[test]
    fn mean_count_matches() {
        for stats in [PairStatistics::Thermal, PairStatistics::Poisson] {
            let m = PairSourceModel::new(0.0476, 1500, 0.01).unwrap().with_statistics(stats);
            let t = simulate_pair_source(&m, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
            let expect = 0.0476 * m.mode_count() as f64;
            // thermal variance per mode μ(1+μ)
            let sigma = (m.mode_count() as f64 * 0.0476 * 1.0476).sqrt();
            assert!((t.len() as f64 - expect).abs() < 3.0 * sigma, "{stats:?} {}", t.len());
            assert!(t.windows(2).all(|w| w[0] <= w[1]));
            assert!(*t.last().unwrap() < m.duration_ps());
        }
    }

    #[test]
    fn deterministic() {
        let m = PairSourceModel::new(0.2, 1500, 1e-4).unwrap();
        let a = simulate_pair_source(&m, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate_pair_source(&m, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thermal_second_moment() {
        // E[n(n−1)] = 2μ² for thermal, μ² for Poisson; checked through pairs sharing a mode.
        let mu = 0.2;
        for (stats, factor) in [(PairStatistics::Thermal, 2.0), (PairStatistics::Poisson, 1.0)] {
            let m = PairSourceModel::new(mu, 1000, 1e-3).unwrap().with_statistics(stats);
            let t = simulate_pair_source(&m, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            let mut counts = vec![0u64; m.mode_count() as usize];
            for x in t {
                counts[(x / 1000) as usize] += 1;
            }
            let fact2: f64 = counts.iter().map(|&n| (n * n.saturating_sub(1)) as f64).sum::<f64>()
                / counts.len() as f64;
            assert!((fact2 / (factor * mu * mu) - 1.0).abs() < 0.03, "{stats:?} {fact2}");
        }
    }

    #[test]
    fn rejects_bad_model() {
        assert!(PairSourceModel::new(-0.1, 1500, 1.0).is_err());
        assert!(PairSourceModel::new(0.1, 0, 1.0).is_err());
        assert!(PairSourceModel::new(0.1, 1500, 0.0).is_err());
    }
}
