//! Ridge waveguide geometry and its effective-index-method mode solve.

use super::slab::{slab_effective_index_pol, Polarization};
use super::{DispersionError, MaterialIndex};

/// Cross-section and length of an etched ridge in a thin film.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideGeometry {
    pub film_thickness_nm: f64,
    pub etch_depth_nm: f64,
    pub top_width_um: f64,
    pub sidewall_angle_deg: f64,
    pub length_mm: f64,
    pub poling_period_um: Option<f64>,
    pub top_cladding_index: f64,
    pub bottom_cladding_index: f64,
}

impl WaveguideGeometry {
    /// The fabricated converter chip: 800 nm Z-cut film, 422 nm ridge,
    /// 1.8 μm top width, 60° sidewalls, 5.3 mm long, 4.1 μm poling period,
    /// air above and thermal oxide below.
    pub fn converter_chip() -> Self {
        Self {
            film_thickness_nm: 800.0,
            etch_depth_nm: 422.0,
            top_width_um: 1.8,
            sidewall_angle_deg: 60.0,
            length_mm: 5.3,
            poling_period_um: Some(4.1),
            top_cladding_index: 1.0,
            bottom_cladding_index: 1.444,
        }
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        let invalid = |msg: String| Err(DispersionError::InvalidGeometry(msg));
        let positive = [
            ("film_thickness_nm", self.film_thickness_nm),
            ("etch_depth_nm", self.etch_depth_nm),
            ("top_width_um", self.top_width_um),
            ("length_mm", self.length_mm),
            ("top_cladding_index", self.top_cladding_index),
            ("bottom_cladding_index", self.bottom_cladding_index),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return invalid(format!("{name} must be positive, got {value}"));
            }
        }
        if self.etch_depth_nm > self.film_thickness_nm {
            return invalid(format!(
                "etch depth {} nm exceeds film thickness {} nm",
                self.etch_depth_nm, self.film_thickness_nm
            ));
        }
        if !(self.sidewall_angle_deg > 0.0 && self.sidewall_angle_deg <= 90.0) {
            return invalid(format!(
                "sidewall angle must lie in (0, 90] degrees, got {}",
                self.sidewall_angle_deg
            ));
        }
        if let Some(p) = self.poling_period_um {
            if !(p > 0.0) || !p.is_finite() {
                return invalid(format!("poling period must be positive, got {p}"));
            }
        }
        Ok(())
    }

    pub fn poling_period(&self) -> Result<f64, DispersionError> {
        self.poling_period_um.ok_or(DispersionError::PolingPeriodUnset)
    }

    /// Mean of the top and base widths of the trapezoidal ridge.
    pub fn mean_width_um(&self) -> f64 {
        let run_nm = self.etch_depth_nm / self.sidewall_angle_deg.to_radians().tan();
        self.top_width_um + run_nm * 1e-3
    }

    pub fn slab_thickness_nm(&self) -> f64 {
        self.film_thickness_nm - self.etch_depth_nm
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }
}

/// The three indices produced by one effective-index solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeIndices {
    /// Vertical TM slab index under the ridge.
    pub ridge_region: f64,
    /// Vertical TM slab index of the etched side regions (the cladding
    /// index when the film is etched through).
    pub slab_region: f64,
    /// Lateral solve: the guided mode's effective index.
    pub effective: f64,
}

/// Effective-index method for the quasi-TM fundamental mode.
///
/// Stage one solves the vertical TM slab in the ridge and side regions.
/// Stage two solves a symmetric lateral slab of the mean ridge width with
/// those indices; the dominant field is then parallel to the lateral
/// interfaces, so that stage is TE.
pub fn ridge_indices<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    wavelength_nm: f64,
) -> Result<RidgeIndices, DispersionError> {
    geometry.validate()?;
    let core = material.refractive_index(wavelength_nm)?;
    let top = geometry.top_cladding_index;
    let bottom = geometry.bottom_cladding_index;

    let ridge_region = slab_effective_index_pol(
        core,
        bottom,
        top,
        geometry.film_thickness_nm,
        wavelength_nm,
        0,
        Polarization::Tm,
    )?;
    let slab_thickness = geometry.slab_thickness_nm();
    let slab_region = if slab_thickness > 0.0 {
        slab_effective_index_pol(
            core,
            bottom,
            top,
            slab_thickness,
            wavelength_nm,
            0,
            Polarization::Tm,
        )?
    } else {
        top
    };
    let effective = slab_effective_index_pol(
        ridge_region,
        slab_region,
        slab_region,
        geometry.mean_width_um() * 1e3,
        wavelength_nm,
        0,
        Polarization::Te,
    )?;
    Ok(RidgeIndices {
        ridge_region,
        slab_region,
        effective,
    })
}

pub fn ridge_effective_index<M: MaterialIndex>(
    geometry: &WaveguideGeometry,
    material: &M,
    wavelength_nm: f64,
) -> Result<f64, DispersionError> {
    ridge_indices(geometry, material, wavelength_nm).map(|r| r.effective)
}
