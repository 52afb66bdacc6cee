//! Sum-frequency tuning curve versus signal wavelength at fixed pump.

use std::io::Write;

use super::qpm::{phase_mismatch, ModeIndex, WavelengthTriple};
use super::DispersionError;

/// Fabry–Pérot modulation from the two uncoated facets.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FringeSpec {
    /// Facet power reflectivity; `None` uses the normal-incidence Fresnel
    /// value of the signal mode index at the phase-matching wavelength.
    pub reflectivity: Option<f64>,
}

/// Signal sweep and calibration inputs for [`tuning_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSweep {
    pub pump_nm: f64,
    pub signal_start_nm: f64,
    pub signal_stop_nm: f64,
    pub step_nm: f64,
    /// Added to the computed Δk before scaling (rad/μm).
    pub calibration_offset: f64,
    /// Multiplies `Δk + calibration_offset`; stretches the curve about its center.
    pub slope_scale: f64,
    pub fringe: Option<FringeSpec>,
}

impl TuningSweep {
    /// The measured sweep: 1500–1560 nm signal, 1950 nm pump, uncalibrated.
    pub fn measured_range() -> Self {
        Self {
            pump_nm: 1950.0,
            signal_start_nm: 1500.0,
            signal_stop_nm: 1560.0,
            step_nm: 0.01,
            calibration_offset: 0.0,
            slope_scale: 1.0,
            fringe: None,
        }
    }

    fn validate(&self) -> Result<(), DispersionError> {
        if !(self.step_nm > 0.0)
            || !(self.signal_stop_nm > self.signal_start_nm)
            || !(self.pump_nm > 0.0)
            || !(self.slope_scale > 0.0)
            || !self.calibration_offset.is_finite()
        {
            return Err(DispersionError::InvalidInput(format!(
                "bad tuning sweep {self:?}"
            )));
        }
        if let Some(FringeSpec {
            reflectivity: Some(r),
        }) = self.fringe
        {
            if !(0.0..1.0).contains(&r) {
                return Err(DispersionError::InvalidInput(format!(
                    "facet reflectivity must lie in [0, 1), got {r}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSample {
    pub signal_nm: f64,
    pub relative_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub samples: Vec<TuningSample>,
    pub center_nm: f64,
    pub fwhm_nm: f64,
}

impl TuningCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["lambda_signal_nm", "relative_efficiency"])?;
        for s in &self.samples {
            w.write_record([s.signal_nm.to_string(), s.relative_efficiency.to_string()])?;
        }
        w.flush()
    }
}

/// Offset and slope scale that pin a curve to a measured center and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningCalibration {
    pub calibration_offset: f64,
    pub slope_scale: f64,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Evaluates the calibrated mismatch and the sinc² response at one signal wavelength.
struct Response<'a, I> {
    modes: &'a I,
    length_um: f64,
    period_um: f64,
    pump_nm: f64,
    offset: f64,
    scale: f64,
}

impl<I: ModeIndex> Response<'_, I> {
    fn mismatch(&self, signal_nm: f64) -> Result<f64, DispersionError> {
        let triple = WavelengthTriple::from_signal_pump(signal_nm, self.pump_nm)?;
        let dk = phase_mismatch(self.modes, &triple, self.period_um)?;
        Ok(self.scale * (dk + self.offset))
    }

    fn sinc2(&self, signal_nm: f64) -> Result<f64, DispersionError> {
        let x = 0.5 * self.mismatch(signal_nm)? * self.length_um;
        Ok(sinc(x).powi(2))
    }

    /// Zero of the calibrated mismatch between two bracketing wavelengths.
    fn root(&self, mut lo: f64, mut hi: f64) -> Result<f64, DispersionError> {
        let mut f_lo = self.mismatch(lo)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-10 {
                break;
            }
            let f_mid = self.mismatch(mid)?;
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// First sign change of the mismatch on the sweep grid.
    fn find_center(&self, grid: &[f64]) -> Result<f64, DispersionError> {
        let mut prev: Option<(f64, f64)> = None;
        for &wl in grid {
            let m = self.mismatch(wl)?;
            if m == 0.0 {
                return Ok(wl);
            }
            if let Some((pwl, pm)) = prev {
                if (pm > 0.0) != (m > 0.0) {
                    return self.root(pwl, wl);
                }
            }
            prev = Some((wl, m));
        }
        Err(DispersionError::NoPhaseMatching {
            start_nm: grid.first().copied().unwrap_or(f64::NAN),
            stop_nm: grid.last().copied().unwrap_or(f64::NAN),
        })
    }

    /// Continuous half-maximum full width of the bare sinc² response.
    fn half_max_width(&self, center: f64, start: f64, stop: f64) -> Result<f64, DispersionError> {
        let edge = |outer: f64| -> Result<f64, DispersionError> {
            let mut inner = center;
            let mut outer = outer;
            if self.sinc2(outer)? >= 0.5 {
                return Err(DispersionError::FwhmOutOfRange);
            }
            for _ in 0..200 {
                if (outer - inner).abs() <= 1e-10 {
                    break;
                }
                let mid = 0.5 * (inner + outer);
                if self.sinc2(mid)? >= 0.5 {
                    inner = mid;
                } else {
                    outer = mid;
                }
            }
            Ok(0.5 * (inner + outer))
        };
        // Bracket the main lobe only: its first null sits where |Δk|·L/2 = π.
        let lobe = |dir: f64| -> Result<f64, DispersionError> {
            let limit = if dir < 0.0 { start } else { stop };
            let mut probe = 1e-3;
            loop {
                let wl = center + dir * probe;
                if (dir < 0.0 && wl <= limit) || (dir > 0.0 && wl >= limit) {
                    return Ok(limit);
                }
                if (0.5 * self.mismatch(wl)? * self.length_um).abs() >= std::f64::consts::PI {
                    return Ok(wl);
                }
                probe *= 1.5;
            }
        };
        let left = edge(lobe(-1.0)?)?;
        let right = edge(lobe(1.0)?)?;
        Ok(right - left)
    }
}

fn sweep_grid(sweep: &TuningSweep) -> Vec<f64> {
    let n = ((sweep.signal_stop_nm - sweep.signal_start_nm) / sweep.step_nm + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| sweep.signal_start_nm + i as f64 * sweep.step_nm)
        .collect()
}

/// Half-maximum width by linear interpolation between the outermost
/// half-maximum crossings of a sampled curve.
fn sampled_fwhm(samples: &[TuningSample]) -> Result<f64, DispersionError> {
    let peak = samples
        .iter()
        .map(|s| s.relative_efficiency)
        .fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * peak;
    let first_above = samples
        .iter()
        .position(|s| s.relative_efficiency >= half)
        .ok_or(DispersionError::FwhmOutOfRange)?;
    let last_above = samples
        .iter()
        .rposition(|s| s.relative_efficiency >= half)
        .ok_or(DispersionError::FwhmOutOfRange)?;
    if first_above == 0 || last_above + 1 >= samples.len() {
        return Err(DispersionError::FwhmOutOfRange);
    }
    let cross = |a: &TuningSample, b: &TuningSample| {
        let t = (half - a.relative_efficiency) / (b.relative_efficiency - a.relative_efficiency);
        a.signal_nm + t * (b.signal_nm - a.signal_nm)
    };
    let left = cross(&samples[first_above - 1], &samples[first_above]);
    let right = cross(&samples[last_above], &samples[last_above + 1]);
    Ok(right - left)
}

/// Tuning curve for an arbitrary mode-index source.
///
/// Relative efficiency is `sinc²(Δk'·L/2)` with `Δk' = scale·(Δk + offset)`.
/// The phase-matching wavelength is found by root bracketing and inserted
/// as a sample, so the curve peaks at exactly 1 there. With fringes the
/// response is multiplied by an Airy transmission whose phase is referenced
/// to that wavelength, with free spectral range `λ²/(2·n_g·L)` and `n_g`
/// from a 1 nm central difference of the signal mode index.
pub fn tuning_curve_for<I: ModeIndex>(
    modes: &I,
    length_um: f64,
    poling_period_um: f64,
    sweep: &TuningSweep,
) -> Result<TuningCurve, DispersionError> {
    sweep.validate()?;
    if !(length_um > 0.0) {
        return Err(DispersionError::InvalidInput(format!(
            "interaction length must be positive, got {length_um} μm"
        )));
    }
    let response = Response {
        modes,
        length_um,
        period_um: poling_period_um,
        pump_nm: sweep.pump_nm,
        offset: sweep.calibration_offset,
        scale: sweep.slope_scale,
    };
    let grid = sweep_grid(sweep);
    let center = response.find_center(&grid)?;

    let airy = match sweep.fringe {
        None => None,
        Some(spec) => {
            let n = modes.mode_index(center)?;
            let n_group = n - center
                * (modes.mode_index(center + 1.0)? - modes.mode_index(center - 1.0)?)
                / 2.0;
            let r = spec
                .reflectivity
                .unwrap_or_else(|| ((n - 1.0) / (n + 1.0)).powi(2));
            Some((r, n_group))
        }
    };
    let length_nm = length_um * 1e3;
    let modulation = |wl: f64| match airy {
        None => 1.0,
        Some((r, n_group)) => {
            let delta = 4.0 * std::f64::consts::PI * n_group * length_nm * (1.0 / wl - 1.0 / center);
            let a = (1.0 - r).powi(2);
            a / (a + 4.0 * r * (0.5 * delta).sin().powi(2))
        }
    };

    let mut samples = Vec::with_capacity(grid.len() + 1);
    let mut inserted = false;
    for &wl in &grid {
        if !inserted && wl >= center {
            if wl != center {
                samples.push(TuningSample {
                    signal_nm: center,
                    relative_efficiency: 1.0,
                });
            }
            inserted = true;
        }
        let eff = if wl == center {
            1.0
        } else {
            response.sinc2(wl)? * modulation(wl)
        };
        samples.push(TuningSample {
            signal_nm: wl,
            relative_efficiency: eff,
        });
    }
    let peak = samples
        .iter()
        .map(|s| s.relative_efficiency)
        .fold(f64::NEG_INFINITY, f64::max);
    for s in &mut samples {
        s.relative_efficiency /= peak;
    }
    let fwhm_nm = sampled_fwhm(&samples)?;
    Ok(TuningCurve {
        samples,
        center_nm: center,
        fwhm_nm,
    })
}

/// Finds the offset placing the phase-matching point at `center_nm` and
/// the slope scale giving a bare sinc² half-maximum width of `fwhm_nm`.
pub fn calibrate_tuning_for<I: ModeIndex>(
    modes: &I,
    length_um: f64,
    poling_period_um: f64,
    pump_nm: f64,
    center_nm: f64,
    fwhm_nm: f64,
) -> Result<TuningCalibration, DispersionError> {
    if !(fwhm_nm > 0.0) || !(length_um > 0.0) {
        return Err(DispersionError::InvalidInput(format!(
            "target width {fwhm_nm} nm and length {length_um} μm must be positive"
        )));
    }
    let triple = WavelengthTriple::from_signal_pump(center_nm, pump_nm)?;
    let offset = -phase_mismatch(modes, &triple, poling_period_um)?;
    let span = 20.0 * fwhm_nm;
    let mut scale = 1.0;
    for _ in 0..50 {
        let response = Response {
            modes,
            length_um,
            period_um: poling_period_um,
            pump_nm,
            offset,
            scale,
        };
        let width = response.half_max_width(center_nm, center_nm - span, center_nm + span)?;
        let ratio = width / fwhm_nm;
        scale *= ratio;
        if (ratio - 1.0).abs() < 1e-10 {
            break;
        }
    }
    Ok(TuningCalibration {
        calibration_offset: offset,
        slope_scale: scale,
    })
}
