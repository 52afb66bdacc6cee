//! Refractive indices, guided-mode indices and phase matching of the ridge converter.
//!
//! Mode indices come from the effective-index method rather than a full-vector
//! solver; the residual error is absorbed by the explicit calibration inputs of
//! [`TuningSweep`].

mod qpm;
mod ridge;
mod sellmeier;
mod slab;
mod tuning;

use thiserror::Error;

pub use qpm::{
    material_mismatch, phase_mismatch, qpm_period, ridge_phase_mismatch, ridge_qpm_period,
    BulkMode, ModeIndex, RidgeMode, WavelengthTriple,
};
pub use ridge::{ridge_effective_index, ridge_indices, RidgeIndices, WaveguideGeometry};
pub use sellmeier::{ConstantIndex, MaterialIndex, SellmeierCoefficients, SellmeierModel};
pub use slab::{slab_effective_index, slab_effective_index_pol, Polarization};
pub use tuning::{
    calibrate_tuning_for, tuning_curve_for, FringeSpec, TuningCalibration, TuningCurve,
    TuningSample, TuningSweep,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("wavelength {wavelength_nm} nm outside the model range [{min_nm}, {max_nm}] nm")]
    WavelengthOutOfRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },
    #[error("Sellmeier evaluation gives n² = {n2} at {wavelength_nm} nm")]
    NonPhysicalIndex { wavelength_nm: f64, n2: f64 },
    #[error("mode order {mode_order} is cut off at {wavelength_nm} nm for a {thickness_nm} nm layer")]
    Cutoff {
        wavelength_nm: f64,
        thickness_nm: f64,
        mode_order: u32,
    },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("energy not conserved: 1/{sum_nm} != 1/{signal_nm} + 1/{pump_nm}")]
    EnergyNotConserved {
        signal_nm: f64,
        pump_nm: f64,
        sum_nm: f64,
    },
    #[error("poling period is unset")]
    PolingPeriodUnset,
    #[error("no first-order poling period: material mismatch is {mismatch} rad/μm")]
    NoFirstOrderPeriod { mismatch: f64 },
    #[error("no phase-matching point between {start_nm} and {stop_nm} nm")]
    NoPhaseMatching { start_nm: f64, stop_nm: f64 },
    #[error("half-maximum crossings fall outside the sweep")]
    FwhmOutOfRange,
}

/// Tuning curve of a ridge: uses the geometry's length and poling period.
pub fn tuning_curve<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    sweep: &TuningSweep,
) -> Result<TuningCurve, DispersionError> {
    geometry.validate()?;
    tuning_curve_for(
        &RidgeMode::new(geometry, material),
        geometry.length_um(),
        geometry.poling_period()?,
        sweep,
    )
}

pub fn calibrate_tuning<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    pump_nm: f64,
    center_nm: f64,
    fwhm_nm: f64,
) -> Result<TuningCalibration, DispersionError> {
    geometry.validate()?;
    calibrate_tuning_for(
        &RidgeMode::new(geometry, material),
        geometry.length_um(),
        geometry.poling_period()?,
        pump_nm,
        center_nm,
        fwhm_nm,
    )
}
