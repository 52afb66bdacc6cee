use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::elements::{merge_sorted, poisson_arrivals};
use super::{check_non_negative, check_unit, SimError};
use crate::timetag::EventStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_rate_cps: f64,
    pub jitter_sigma_ps: f64,
    pub dead_time_ps: u64,
}

impl DetectorModel {
    /// Superconducting nanowire defaults (free parameters).
    pub fn snspd() -> Self {
        Self {
            efficiency: 0.6,
            dark_rate_cps: 100.0,
            jitter_sigma_ps: 50.0,
            dead_time_ps: 50_000,
        }
    }

    /// Silicon SPAD behind the converter.
    pub fn spad() -> Self {
        Self {
            efficiency: 0.5,
            dark_rate_cps: 60.0,
            jitter_sigma_ps: 350.0,
            dead_time_ps: 22_000,
        }
    }

    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate_cps: 0.0,
            jitter_sigma_ps: 0.0,
            dead_time_ps: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        check_unit("efficiency", self.efficiency)?;
        check_non_negative("dark_rate_cps", self.dark_rate_cps)?;
        check_non_negative("jitter_sigma_ps", self.jitter_sigma_ps)
    }
}

/// Thinning, Gaussian jitter, dark counts, then non-paralyzable dead time.
///
/// Jittered events landing outside `[0, duration_ps)` are lost. Clicks are
/// strictly increasing: two arrivals in the same picosecond give one click
/// even with zero dead time.
pub fn apply_detector<R: Rng>(
    photons: &[u64],
    det: &DetectorModel,
    channel: u8,
    duration_ps: u64,
    rng: &mut R,
) -> Result<EventStream, SimError> {
    det.validate()?;
    let mut arrivals: Vec<u64> = Vec::with_capacity((photons.len() as f64 * det.efficiency) as usize + 1);
    if det.jitter_sigma_ps > 0.0 {
        let jitter = Normal::new(0.0, det.jitter_sigma_ps).expect("finite sigma");
        for &t in photons {
            if !rng.random_bool(det.efficiency) {
                continue;
            }
            let shifted = t as f64 + jitter.sample(rng).round();
            if shifted >= 0.0 && shifted < duration_ps as f64 {
                arrivals.push(shifted as u64);
            }
        }
        arrivals.sort();
    } else {
        arrivals.extend(
            photons
                .iter()
                .copied()
                .filter(|&t| rng.random_bool(det.efficiency) && t < duration_ps),
        );
    }
    let dark = poisson_arrivals(det.dark_rate_cps, duration_ps, rng)?;
    let all = merge_sorted(&arrivals, &dark);

    let hold = det.dead_time_ps.max(1);
    let mut clicks = Vec::with_capacity(all.len());
    let mut last: Option<u64> = None;
    for t in all {
        if last.is_none_or(|l| t >= l.saturating_add(hold)) {
            clicks.push(t);
            last = Some(t);
        }
    }
    Ok(EventStream::new(channel, clicks, duration_ps)?)
}
