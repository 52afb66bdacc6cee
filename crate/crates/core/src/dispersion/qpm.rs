//! Quasi-phase-matching for sum-frequency generation.

use std::f64::consts::PI;

use super::ridge::{ridge_effective_index, WaveguideGeometry};
use super::{DispersionError, MaterialIndex};

/// Signal, pump and sum-frequency wavelengths tied by energy conservation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthTriple {
    signal_nm: f64,
    pump_nm: f64,
    sum_nm: f64,
}

const ENERGY_TOLERANCE: f64 = 1e-9;

impl WavelengthTriple {
    /// Builds the triple from signal and pump, deriving the sum frequency.
    pub fn from_signal_pump(signal_nm: f64, pump_nm: f64) -> Result<Self, DispersionError> {
        if !(signal_nm > 0.0) || !(pump_nm > 0.0) {
            return Err(DispersionError::InvalidInput(format!(
                "wavelengths must be positive, got signal {signal_nm} nm, pump {pump_nm} nm"
            )));
        }
        let sum_nm = 1.0 / (1.0 / signal_nm + 1.0 / pump_nm);
        Ok(Self {
            signal_nm,
            pump_nm,
            sum_nm,
        })
    }

    /// Builds the triple from all three wavelengths, checking energy conservation.
    pub fn new(signal_nm: f64, pump_nm: f64, sum_nm: f64) -> Result<Self, DispersionError> {
        let derived = Self::from_signal_pump(signal_nm, pump_nm)?;
        let rel = ((1.0 / sum_nm) - (1.0 / derived.sum_nm)).abs() * derived.sum_nm;
        if !(rel <= ENERGY_TOLERANCE) {
            return Err(DispersionError::EnergyNotConserved {
                signal_nm,
                pump_nm,
                sum_nm,
            });
        }
        Ok(Self {
            signal_nm,
            pump_nm,
            sum_nm,
        })
    }

    pub fn signal_nm(&self) -> f64 {
        self.signal_nm
    }

    pub fn pump_nm(&self) -> f64 {
        self.pump_nm
    }

    pub fn sum_nm(&self) -> f64 {
        self.sum_nm
    }
}

/// Source of the propagation index seen by each interacting wave.
pub trait ModeIndex {
    fn mode_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError>;
}

/// Guided quasi-TM mode of a ridge, via the effective-index method.
#[derive(Debug, Clone, Copy)]
pub struct RidgeMode<'a, M> {
    pub geometry: &'a WaveguideGeometry,
    pub material: &'a M,
}

impl<'a, M: MaterialIndex> RidgeMode<'a, M> {
    pub fn new(geometry: &'a WaveguideGeometry, material: &'a M) -> Self {
        Self { geometry, material }
    }
}

impl<M: MaterialIndex> ModeIndex for RidgeMode<'_, M> {
    fn mode_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        ridge_effective_index(self.geometry, self.material, wavelength_nm)
    }
}

/// Plane waves in the bulk material; skips the waveguide solves.
#[derive(Debug, Clone, Copy)]
pub struct BulkMode<M>(pub M);

impl<M: MaterialIndex> ModeIndex for BulkMode<M> {
    fn mode_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        self.0.refractive_index(wavelength_nm)
    }
}

impl<T: ModeIndex + ?Sized> ModeIndex for &T {
    fn mode_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        (**self).mode_index(wavelength_nm)
    }
}

/// Wavevector in rad/μm for an index and a wavelength in nm.
pub(crate) fn wavevector(index: f64, wavelength_nm: f64) -> f64 {
    2.0 * PI * index / (wavelength_nm * 1e-3)
}

/// Material mismatch `k_sf − k_p − k_s` in rad/μm, before poling.
pub fn material_mismatch<I: ModeIndex>(
    modes: &I,
    triple: &WavelengthTriple,
) -> Result<f64, DispersionError> {
    let n_sf = modes.mode_index(triple.sum_nm)?;
    let n_p = modes.mode_index(triple.pump_nm)?;
    let n_s = modes.mode_index(triple.signal_nm)?;
    Ok(wavevector(n_sf, triple.sum_nm)
        - wavevector(n_p, triple.pump_nm)
        - wavevector(n_s, triple.signal_nm))
}

/// Signed quasi-phase mismatch `Δk = k_sf − k_p − k_s − 2π/Λ` in rad/μm.
pub fn phase_mismatch<I: ModeIndex>(
    modes: &I,
    triple: &WavelengthTriple,
    poling_period_um: f64,
) -> Result<f64, DispersionError> {
    if !(poling_period_um > 0.0) {
        return Err(DispersionError::PolingPeriodUnset);
    }
    Ok(material_mismatch(modes, triple)? - 2.0 * PI / poling_period_um)
}

/// First-order poling period in μm that zeroes the mismatch.
pub fn qpm_period<I: ModeIndex>(
    modes: &I,
    triple: &WavelengthTriple,
) -> Result<f64, DispersionError> {
    let mismatch = material_mismatch(modes, triple)?;
    // Relative floor: a mismatch at rounding level of k_sf is treated as zero.
    let scale = wavevector(modes.mode_index(triple.sum_nm)?, triple.sum_nm);
    if !(mismatch > 1e-12 * scale) {
        return Err(DispersionError::NoFirstOrderPeriod { mismatch });
    }
    Ok(2.0 * PI / mismatch)
}

/// Mismatch of the ridge using the geometry's own poling period.
pub fn ridge_phase_mismatch<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    triple: &WavelengthTriple,
) -> Result<f64, DispersionError> {
    let period = geometry.poling_period()?;
    phase_mismatch(&RidgeMode::new(geometry, material), triple, period)
}

pub fn ridge_qpm_period<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    triple: &WavelengthTriple,
) -> Result<f64, DispersionError> {
    geometry.validate()?;
    qpm_period(&RidgeMode::new(geometry, material), triple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{ConstantIndex, SellmeierModel};

    fn device_triple() -> WavelengthTriple {
        WavelengthTriple::from_signal_pump(1531.1, 1950.0).unwrap()
    }

    #[test]
    fn energy_conservation_enforced() {
        let t = device_triple();
        assert!(WavelengthTriple::new(1531.1, 1950.0, t.sum_nm()).is_ok());
        assert!(matches!(
            WavelengthTriple::new(1531.1, 1950.0, 860.0),
            Err(DispersionError::EnergyNotConserved { .. })
        ));
        assert!(WavelengthTriple::from_signal_pump(-1.0, 1950.0).is_err());
    }

    #[test]
    fn period_zeroes_mismatch() {
        let geometry = WaveguideGeometry::converter_chip();
        let material = SellmeierModel::default();
        let ridge = RidgeMode::new(&geometry, &material);
        let period = qpm_period(&ridge, &device_triple()).unwrap();
        let dk = phase_mismatch(&ridge, &device_triple(), period).unwrap();
        assert!(dk.abs() < 1e-9, "{dk}");
    }

    #[test]
    fn dispersionless_material_leaves_only_grating_term() {
        let flat = BulkMode(ConstantIndex(2.2));
        let triple = device_triple();
        assert!(material_mismatch(&flat, &triple).unwrap().abs() < 1e-12);
        let dk = phase_mismatch(&flat, &triple, 4.1).unwrap();
        assert!((dk + 2.0 * PI / 4.1).abs() < 1e-12);
        assert!(matches!(
            qpm_period(&flat, &triple),
            Err(DispersionError::NoFirstOrderPeriod { .. })
        ));
    }

    #[test]
    fn bulk_period_hand_value() {
        // Hand evaluation of the Sellmeier formula at the three wavelengths.
        let bulk = BulkMode(SellmeierModel::default());
        let period = qpm_period(&bulk, &device_triple()).unwrap();
        assert!((period - 23.480_509_858_123_23).abs() < 1e-6, "{period}");
    }

    #[test]
    fn device_geometry_period_near_fabricated() {
        let period = ridge_qpm_period(
            &WaveguideGeometry::converter_chip(),
            &SellmeierModel::default(),
            &device_triple(),
        )
        .unwrap();
        assert!((period - 4.1).abs() <= 0.25 * 4.1, "{period}");
    }

    #[test]
    fn device_geometry_small_residual_mismatch() {
        // Staged root-scan oracle: Δk = 2π/4.0807 − 2π/4.1 rad/μm.
        let dk = ridge_phase_mismatch(
            &WaveguideGeometry::converter_chip(),
            &SellmeierModel::default(),
            &device_triple(),
        )
        .unwrap();
        assert!(dk != 0.0);
        assert!((dk - 0.007_236_713).abs() < 1e-6, "{dk}");
    }

    #[test]
    fn unset_period_is_error() {
        let geometry = WaveguideGeometry {
            poling_period_um: None,
            ..WaveguideGeometry::converter_chip()
        };
        assert!(matches!(
            ridge_phase_mismatch(&geometry, &SellmeierModel::default(), &device_triple()),
            Err(DispersionError::PolingPeriodUnset)
        ));
    }
}
