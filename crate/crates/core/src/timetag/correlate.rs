//! Coincidence counting and second-order correlation estimators.
//!
//! Window convention: an event pair `(t_a, t_b)` is coincident at delay `d`
//! when `|t_b − t_a − d| ≤ τ_b/2`, i.e. `τ_b` is the full window width. A
//! pair sitting exactly on the boundary between two adjacent histogram bins
//! counts in both. Every event may take part in any number of pairs.

use std::io::Write;

use super::{EventStream, TagError};

/// Number of `(a, b)` pairs with `|t_b − t_a − delay| ≤ window/2`.
///
/// Single forward merge: both window edges only ever advance.
pub fn count_coincidences(a: &[u64], b: &[u64], window_ps: u64, delay_ps: i64) -> u64 {
    let w = i128::from(window_ps);
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut count = 0u64;
    for &ta in a {
        let target = i128::from(ta) + i128::from(delay_ps);
        while lo < b.len() && 2 * (i128::from(b[lo]) - target) < -w {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < b.len() && 2 * (i128::from(b[hi]) - target) <= w {
            hi += 1;
        }
        count += (hi - lo) as u64;
    }
    count
}

/// Delay bins `k·τ_b`, `k = −K..=K`, shared by the histogram estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayBins {
    pub window_ps: u64,
    pub half_bins: u64,
}

impl DelayBins {
    /// Bins covering `±max_delay_ps`; always an odd count centred on zero.
    pub fn covering(window_ps: u64, max_delay_ps: u64) -> Result<Self, TagError> {
        if window_ps == 0 {
            return Err(TagError::Invalid("coincidence window must be positive".into()));
        }
        Ok(Self {
            window_ps,
            half_bins: max_delay_ps / window_ps,
        })
    }

    pub fn len(&self) -> usize {
        (2 * self.half_bins + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delay_ps(&self, index: usize) -> i64 {
        (index as i64 - self.half_bins as i64) * self.window_ps as i64
    }

    /// Visits every `(a index, bin index)` for pairs inside some bin.
    fn scan<F: FnMut(usize, usize)>(&self, a: &[u64], b: &[u64], mut visit: F) {
        let w = i128::from(self.window_ps);
        let k_max = i128::from(self.half_bins);
        // 2Δ must lie in [−(2K+1)w, (2K+1)w]
        let reach = (2 * k_max + 1) * w;
        let mut lo = 0usize;
        for (ia, &ta) in a.iter().enumerate() {
            let ta = i128::from(ta);
            while lo < b.len() && 2 * (i128::from(b[lo]) - ta) < -reach {
                lo += 1;
            }
            let mut j = lo;
            while j < b.len() {
                let two_delta = 2 * (i128::from(b[j]) - ta);
                if two_delta > reach {
                    break;
                }
                let den = 2 * w;
                let k_lo = -(-(two_delta - w)).div_euclid(den);
                let k_hi = (two_delta + w).div_euclid(den);
                for k in k_lo.max(-k_max)..=k_hi.min(k_max) {
                    visit(ia, (k + k_max) as usize);
                }
                j += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub window_ps: u64,
    pub delays_ps: Vec<i64>,
    pub raw_counts: Vec<u64>,
    pub g2: Vec<f64>,
    pub rate_a_cps: f64,
    pub rate_b_cps: f64,
    pub duration_s: f64,
}

impl CorrelationHistogram {
    /// Accidental count expected per bin for uncorrelated inputs, `N_a·N_b·τ_b·T`.
    pub fn accidental_expectation(&self) -> f64 {
        self.rate_a_cps * self.rate_b_cps * self.window_ps as f64 * 1e-12 * self.duration_s
    }

    pub fn center_index(&self) -> usize {
        self.delays_ps.len() / 2
    }

    pub fn g2_at_zero(&self) -> f64 {
        self.g2[self.center_index()]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "delay_ps,raw_counts,g2")?;
        for ((d, c), g) in self.delays_ps.iter().zip(&self.raw_counts).zip(&self.g2) {
            writeln!(w, "{d},{c},{g}")?;
        }
        w.flush()
    }
}

fn shared_duration(streams: &[&EventStream]) -> Result<u64, TagError> {
    let d = streams[0].duration_ps();
    if streams.iter().any(|s| s.duration_ps() != d) {
        return Err(TagError::Invalid(
            "streams have different acquisition durations".into(),
        ));
    }
    if d == 0 {
        return Err(TagError::Invalid("zero acquisition duration".into()));
    }
    Ok(d)
}

/// Cross-correlation histogram normalized as `N_ab / (N_a·N_b·τ_b·T)`.
pub fn cross_correlation(
    a: &EventStream,
    b: &EventStream,
    window_ps: u64,
    max_delay_ps: u64,
) -> Result<CorrelationHistogram, TagError> {
    let duration_ps = shared_duration(&[a, b])?;
    if a.is_empty() || b.is_empty() {
        return Err(TagError::ZeroRate {
            channel: if a.is_empty() { a.channel() } else { b.channel() },
        });
    }
    let bins = DelayBins::covering(window_ps, max_delay_ps)?;
    let mut raw = vec![0u64; bins.len()];
    bins.scan(a.timestamps(), b.timestamps(), |_, k| raw[k] += 1);

    let duration_s = duration_ps as f64 * 1e-12;
    let rate_a = a.len() as f64 / duration_s;
    let rate_b = b.len() as f64 / duration_s;
    let norm = rate_a * rate_b * window_ps as f64 * 1e-12 * duration_s;
    Ok(CorrelationHistogram {
        window_ps,
        delays_ps: (0..bins.len()).map(|i| bins.delay_ps(i)).collect(),
        g2: raw.iter().map(|&c| c as f64 / norm).collect(),
        raw_counts: raw,
        rate_a_cps: rate_a,
        rate_b_cps: rate_b,
        duration_s,
    })
}

/// One delay of the heralded autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldedPoint {
    pub delay_ps: i64,
    /// Herald–s1–s2 triples: s1 at zero delay and s2 at this delay, same herald.
    pub triples: u64,
    /// Herald–s1 coincidences at zero delay.
    pub herald_s1_zero: u64,
    /// Herald–s2 coincidences at this delay.
    pub herald_s2: u64,
    pub heralds: u64,
    /// `N_ssi·N_i / (N_s1i(0)·N_s2i(τ))`; 0 when the numerator is 0.
    pub g2: f64,
    /// Set when the denominator is zero.
    pub flagged: bool,
}

/// Heralded second-order autocorrelation versus s2 delay.
pub fn heralded_g2(
    herald: &EventStream,
    s1: &EventStream,
    s2: &EventStream,
    window_ps: u64,
    max_delay_ps: u64,
) -> Result<Vec<HeraldedPoint>, TagError> {
    shared_duration(&[herald, s1, s2])?;
    if herald.is_empty() {
        return Err(TagError::ZeroRate {
            channel: herald.channel(),
        });
    }
    let bins = DelayBins::covering(window_ps, max_delay_ps)?;
    let h = herald.timestamps();

    // Per-herald s1 multiplicity at zero delay.
    let w = i128::from(window_ps);
    let s1t = s1.timestamps();
    let mut c1 = vec![0u64; h.len()];
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, &th) in h.iter().enumerate() {
        let th = i128::from(th);
        while lo < s1t.len() && 2 * (i128::from(s1t[lo]) - th) < -w {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < s1t.len() && 2 * (i128::from(s1t[hi]) - th) <= w {
            hi += 1;
        }
        c1[i] = (hi - lo) as u64;
    }
    let n_s1i: u64 = c1.iter().sum();

    let mut n_s2i = vec![0u64; bins.len()];
    let mut n_ssi = vec![0u64; bins.len()];
    bins.scan(h, s2.timestamps(), |ih, k| {
        n_s2i[k] += 1;
        n_ssi[k] += c1[ih];
    });

    let n_i = h.len() as u64;
    Ok((0..bins.len())
        .map(|k| {
            let numerator = n_ssi[k] as f64 * n_i as f64;
            let denominator = n_s1i as f64 * n_s2i[k] as f64;
            let flagged = denominator == 0.0;
            let g2 = if numerator == 0.0 {
                0.0
            } else if flagged {
                f64::NAN
            } else {
                numerator / denominator
            };
            HeraldedPoint {
                delay_ps: bins.delay_ps(k),
                triples: n_ssi[k],
                herald_s1_zero: n_s1i,
                herald_s2: n_s2i[k],
                heralds: n_i,
                g2,
                flagged,
            }
        })
        .collect())
}

pub fn write_heralded_csv<W: Write>(points: &[HeraldedPoint], out: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "delay_ps,n_ssi,n_s1i_zero,n_s2i,n_i,g2_h,flagged")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.delay_ps,
            p.triples,
            p.herald_s1_zero,
            p.herald_s2,
            p.heralds,
            p.g2,
            u8::from(p.flagged)
        )?;
    }
    w.flush()
}

/// Value at zero delay of a heralded series.
pub fn heralded_at_zero(points: &[HeraldedPoint]) -> Option<&HeraldedPoint> {
    points.iter().find(|p| p.delay_ps == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(ch: u8, ts: &[u64]) -> EventStream {
        EventStream::new(ch, ts.to_vec(), 1_000_000).unwrap()
    }

    #[test]
    fn single_pair_inside_window() {
        assert_eq!(count_coincidences(&[0], &[100], 1500, 0), 1);
    }

    #[test]
    fn single_pair_outside_window() {
        assert_eq!(count_coincidences(&[0], &[2000], 1500, 0), 0);
    }

    #[test]
    fn window_edges_inclusive() {
        assert_eq!(count_coincidences(&[1000], &[250, 1750], 1500, 0), 2);
        assert_eq!(count_coincidences(&[1000], &[249, 1751], 1500, 0), 0);
        assert_eq!(count_coincidences(&[1000], &[3000], 1500, 2000), 1);
        assert_eq!(count_coincidences(&[3000], &[1000], 1500, -2000), 1);
    }

    #[test]
    fn multiple_pairing() {
        assert_eq!(count_coincidences(&[100, 200], &[150, 160, 170], 1500, 0), 6);
    }

    #[test]
    fn histogram_bins_agree_with_counter() {
        let a = stream(0, &[10, 500, 2000, 2100, 9000]);
        let b = stream(1, &[0, 600, 1900, 3500, 3750, 9001, 12_000]);
        let hist = cross_correlation(&a, &b, 1500, 6000).unwrap();
        assert_eq!(hist.delays_ps.len(), 9);
        for (i, &d) in hist.delays_ps.iter().enumerate() {
            assert_eq!(
                hist.raw_counts[i],
                count_coincidences(a.timestamps(), b.timestamps(), 1500, d),
                "delay {d}"
            );
        }
    }

    #[test]
    fn zero_rate_rejected() {
        let a = stream(0, &[1]);
        let b = stream(1, &[]);
        assert!(matches!(
            cross_correlation(&a, &b, 1500, 0),
            Err(TagError::ZeroRate { channel: 1 })
        ));
        assert!(heralded_g2(&b, &a, &a, 1500, 0).is_err());
    }

    #[test]
    fn empty_s2_gives_zero_flagged() {
        let h = stream(0, &[100, 5000]);
        let s1 = stream(1, &[110]);
        let s2 = stream(2, &[]);
        let pts = heralded_g2(&h, &s1, &s2, 1500, 3000).unwrap();
        assert_eq!(pts.len(), 5);
        for p in pts {
            assert_eq!(p.g2, 0.0);
            assert!(p.flagged);
        }
    }

    #[test]
    fn ideal_single_photons_have_no_triples() {
        let heralds: Vec<u64> = (0..100).map(|i| i * 10_000).collect();
        let s1: Vec<u64> = heralds.iter().step_by(2).copied().collect();
        let s2: Vec<u64> = heralds.iter().skip(1).step_by(2).copied().collect();
        let pts = heralded_g2(&stream(0, &heralds), &stream(1, &s1), &stream(2, &s2), 1500, 0)
            .unwrap();
        assert_eq!(pts[0].triples, 0);
        assert_eq!(pts[0].g2, 0.0);
        assert!(!pts[0].flagged);
    }

    #[test]
    fn triples_tied_to_same_herald() {
        // herald at 0 sees s1; herald at 100_000 sees s2 only: no triple.
        let h = stream(0, &[0, 100_000, 200_000]);
        let s1 = stream(1, &[10, 200_010]);
        let s2 = stream(2, &[100_020, 200_030]);
        let pts = heralded_g2(&h, &s1, &s2, 1500, 0).unwrap();
        assert_eq!(pts[0].triples, 1);
        assert_eq!(pts[0].herald_s1_zero, 2);
        assert_eq!(pts[0].herald_s2, 2);
        assert!((pts[0].g2 - 0.75).abs() < 1e-12);
    }
}
