//! Bulk refractive index of congruent lithium niobate.

use super::DispersionError;

/// Anything that can report a bulk refractive index at a vacuum wavelength.
pub trait MaterialIndex {
    fn refractive_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError>;
}

/// Coefficients of the temperature-dependent extended Sellmeier form
///
/// ```text
/// n² = a1 + b1·f + (a2 + b2·f) / (λ² − (a3 + b3·f)²) + (a4 + b4·f) / (λ² − a5²) − a6·λ²
/// f  = (T − 24.5)(T + 570.82)
/// ```
///
/// with λ in micrometres and T in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl SellmeierCoefficients {
    /// Extraordinary index of congruent LiNbO3, D. H. Jundt, Opt. Lett. 22, 1553 (1997).
    pub const CONGRUENT_LN_EXTRAORDINARY: Self = Self {
        a1: 5.35583,
        a2: 0.100473,
        a3: 0.20692,
        a4: 100.0,
        a5: 11.34927,
        a6: 1.5334e-2,
        b1: 4.629e-7,
        b2: 3.862e-8,
        b3: -0.89e-8,
        b4: 2.657e-5,
    };
}

/// A Sellmeier dispersion model with its wavelength validity window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierModel {
    pub coefficients: SellmeierCoefficients,
    pub min_wavelength_nm: f64,
    pub max_wavelength_nm: f64,
    pub temperature_c: f64,
}

impl Default for SellmeierModel {
    fn default() -> Self {
        Self::congruent_ln_extraordinary()
    }
}

impl SellmeierModel {
    pub const DEFAULT_TEMPERATURE_C: f64 = 18.0;

    /// Congruent LN, extraordinary axis, valid 0.4–5 μm, evaluated at 18 °C.
    pub fn congruent_ln_extraordinary() -> Self {
        Self {
            coefficients: SellmeierCoefficients::CONGRUENT_LN_EXTRAORDINARY,
            min_wavelength_nm: 400.0,
            max_wavelength_nm: 5000.0,
            temperature_c: Self::DEFAULT_TEMPERATURE_C,
        }
    }

    pub fn with_temperature(mut self, temperature_c: f64) -> Self {
        self.temperature_c = temperature_c;
        self
    }

    pub fn contains(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.min_wavelength_nm && wavelength_nm <= self.max_wavelength_nm
    }
}

impl MaterialIndex for SellmeierModel {
    fn refractive_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        if !wavelength_nm.is_finite() || !self.contains(wavelength_nm) {
            return Err(DispersionError::WavelengthOutOfRange {
                wavelength_nm,
                min_nm: self.min_wavelength_nm,
                max_nm: self.max_wavelength_nm,
            });
        }
        let c = &self.coefficients;
        let t = self.temperature_c;
        let f = (t - 24.5) * (t + 570.82);
        let l2 = (wavelength_nm * 1e-3).powi(2);
        let pole_uv = c.a3 + c.b3 * f;
        let n2 = c.a1 + c.b1 * f + (c.a2 + c.b2 * f) / (l2 - pole_uv * pole_uv)
            + (c.a4 + c.b4 * f) / (l2 - c.a5 * c.a5)
            - c.a6 * l2;
        if n2 <= 1.0 {
            return Err(DispersionError::NonPhysicalIndex { wavelength_nm, n2 });
        }
        Ok(n2.sqrt())
    }
}

/// Wavelength-independent index; the dispersionless toy material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantIndex(pub f64);

impl MaterialIndex for ConstantIndex {
    fn refractive_index(&self, _wavelength_nm: f64) -> Result<f64, DispersionError> {
        Ok(self.0)
    }
}

impl<M: MaterialIndex + ?Sized> MaterialIndex for &M {
    fn refractive_index(&self, wavelength_nm: f64) -> Result<f64, DispersionError> {
        (**self).refractive_index(wavelength_nm)
    }
}
