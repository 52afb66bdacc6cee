use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{check_non_negative, check_unit, SimError};

/// Independent survival with probability `transmission`.
pub fn apply_loss<R: Rng>(photons: &[u64], transmission: f64, rng: &mut R) -> Result<Vec<u64>, SimError> {
    check_unit("transmission", transmission)?;
    Ok(photons
        .iter()
        .copied()
        .filter(|_| rng.random_bool(transmission))
        .collect())
}

/// Routes each photon to output `a` with probability `ratio`, else to `b`.
pub fn apply_beamsplitter<R: Rng>(
    photons: &[u64],
    ratio: f64,
    rng: &mut R,
) -> Result<(Vec<u64>, Vec<u64>), SimError> {
    check_unit("splitter_ratio", ratio)?;
    let mut a = Vec::with_capacity((photons.len() as f64 * ratio) as usize + 1);
    let mut b = Vec::with_capacity((photons.len() as f64 * (1.0 - ratio)) as usize + 1);
    for &t in photons {
        if rng.random_bool(ratio) {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    Ok((a, b))
}

/// `count` uniform arrival times in `[0, duration_ps)`, count ~ Poisson(rate·T).
pub fn poisson_arrivals<R: Rng>(rate_cps: f64, duration_ps: u64, rng: &mut R) -> Result<Vec<u64>, SimError> {
    check_non_negative("rate_cps", rate_cps)?;
    let mean = rate_cps * duration_ps as f64 * 1e-12;
    if mean == 0.0 || duration_ps == 0 {
        return Ok(Vec::new());
    }
    let n = Poisson::new(mean)
        .map_err(|e| SimError::InvalidParameter {
            name: "rate_cps",
            reason: e.to_string(),
        })?
        .sample(rng) as usize;
    let mut t: Vec<u64> = (0..n).map(|_| rng.random_range(0..duration_ps)).collect();
    t.sort_unstable();
    Ok(t)
}

/// Merge of two sorted streams; on equal times `a` comes first.
pub fn merge_sorted(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Frequency-conversion stage: lossy conversion plus additive in-band noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfcStage {
    pub conversion_efficiency: f64,
    pub noise_rate_cps: f64,
}

impl QfcStage {
    pub fn validate(&self) -> Result<(), SimError> {
        check_unit("conversion_efficiency", self.conversion_efficiency)?;
        check_non_negative("noise_rate_cps", self.noise_rate_cps)
    }
}

pub fn apply_qfc_stage<R: Rng>(
    photons: &[u64],
    stage: &QfcStage,
    duration_ps: u64,
    rng: &mut R,
) -> Result<Vec<u64>, SimError> {
    stage.validate()?;
    let converted = apply_loss(photons, stage.conversion_efficiency, rng)?;
    let noise = poisson_arrivals(stage.noise_rate_cps, duration_ps, rng)?;
    Ok(merge_sorted(&converted, &noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn ramp(n: u64) -> Vec<u64> {
        (0..n).map(|i| i * 1000).collect()
    }

    fn within_binomial(k: usize, n: usize, p: f64) -> bool {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        (k as f64 - n as f64 * p).abs() <= 3.0 * sigma
    }

    #[test]
    fn loss_limits() {
        let x = ramp(100);
        assert_eq!(apply_loss(&x, 1.0, &mut rng()).unwrap(), x);
        assert!(apply_loss(&x, 0.0, &mut rng()).unwrap().is_empty());
        assert!(apply_loss(&x, 1.5, &mut rng()).is_err());
    }

    #[test]
    fn loss_half() {
        let out = apply_loss(&ramp(1_000_000), 0.5, &mut rng()).unwrap();
        assert!(within_binomial(out.len(), 1_000_000, 0.5), "{}", out.len());
        assert!(out.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn splitter_conserves() {
        let x = ramp(1_000_000);
        let (a, b) = apply_beamsplitter(&x, 0.5, &mut rng()).unwrap();
        assert_eq!(a.len() + b.len(), x.len());
        assert!(within_binomial(a.len(), x.len(), 0.5));
        let (a, b) = apply_beamsplitter(&x[..10], 1.0, &mut rng()).unwrap();
        assert_eq!((a.len(), b.len()), (10, 0));
        assert!(apply_beamsplitter(&x, -0.1, &mut rng()).is_err());
    }

    #[test]
    fn qfc_identity_and_thinning() {
        let x = ramp(1_000_000);
        let ideal = QfcStage { conversion_efficiency: 1.0, noise_rate_cps: 0.0 };
        assert_eq!(apply_qfc_stage(&x, &ideal, 1_000_000_000, &mut rng()).unwrap(), x);
        let stage = QfcStage { conversion_efficiency: 0.72, noise_rate_cps: 0.0 };
        let out = apply_qfc_stage(&x, &stage, 1_000_000_000, &mut rng()).unwrap();
        assert!(within_binomial(out.len(), x.len(), 0.72));
    }

    #[test]
    fn qfc_noise_only() {
        let stage = QfcStage { conversion_efficiency: 0.72, noise_rate_cps: 900.0 };
        let out = apply_qfc_stage(&[], &stage, 10_000_000_000_000, &mut rng()).unwrap();
        assert!((out.len() as f64 - 9000.0).abs() < 3.0 * 9000f64.sqrt(), "{}", out.len());
        assert!(out.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn merge_is_sorted() {
        assert_eq!(merge_sorted(&[1, 5, 9], &[0, 5, 10]), vec![0, 1, 5, 5, 9, 10]);
    }
}
