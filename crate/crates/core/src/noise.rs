//! On-chip noise count rate versus pump power.
//!
//! `N(P) = a·P + κ·P²·sin²(√(η_nor·P)·L)`: the second term is cascaded
//! SHG-SPDC noise (pair generation ∝ P², upconverted with the same sin²
//! factor as the signal), the first lumps every residual in-band process.
//! All rates refer to the 0.09 nm etalon detection bandwidth.

use std::io::Read;

use thiserror::Error;

use crate::conversion::ConversionModel;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid noise model: {0}")]
    InvalidModel(String),
    #[error("pump power must be positive, got {0} W")]
    InvalidPower(f64),
    #[error("noise count rate is zero at {0} W")]
    ZeroRate(f64),
    #[error("fit needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate design matrix: {0}")]
    Degenerate(String),
    #[error("invalid noise sample: {0}")]
    InvalidSample(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    linear_cps_per_w: f64,
    spdc_cps_per_w2: f64,
    conversion: ConversionModel,
}

impl NoiseModel {
    pub fn new(
        linear_cps_per_w: f64,
        spdc_cps_per_w2: f64,
        conversion: ConversionModel,
    ) -> Result<Self, NoiseError> {
        if !(linear_cps_per_w >= 0.0) || !(spdc_cps_per_w2 >= 0.0) {
            return Err(NoiseError::InvalidModel(format!(
                "coefficients must be non-negative, got a = {linear_cps_per_w}, κ = {spdc_cps_per_w2}"
            )));
        }
        Ok(Self {
            linear_cps_per_w,
            spdc_cps_per_w2,
            conversion,
        })
    }

    /// Pure SHG-SPDC model through `(pump_w, total_cps)`.
    pub fn calibrate_spdc_only(
        conversion: ConversionModel,
        pump_w: f64,
        total_cps: f64,
    ) -> Result<Self, NoiseError> {
        check_power(pump_w)?;
        let shape = pump_w * pump_w * conversion.sin2_factor(pump_w);
        Self::new(0.0, total_cps / shape, conversion)
    }

    /// Model through `(pump_w, total_cps)` whose SPDC share equals one half at `half_w`.
    pub fn calibrate_with_crossing(
        conversion: ConversionModel,
        pump_w: f64,
        total_cps: f64,
        half_w: f64,
    ) -> Result<Self, NoiseError> {
        check_power(pump_w)?;
        check_power(half_w)?;
        // a·h = κ·h²·s²(h)  =>  a = κ·h·s²(h); substitute into N(p) = total.
        let a_per_kappa = half_w * conversion.sin2_factor(half_w);
        let shape = a_per_kappa * pump_w + pump_w * pump_w * conversion.sin2_factor(pump_w);
        let kappa = total_cps / shape;
        Self::new(kappa * a_per_kappa, kappa, conversion)
    }

    pub fn linear_cps_per_w(&self) -> f64 {
        self.linear_cps_per_w
    }

    pub fn spdc_cps_per_w2(&self) -> f64 {
        self.spdc_cps_per_w2
    }

    pub fn conversion(&self) -> &ConversionModel {
        &self.conversion
    }

    pub fn linear_rate(&self, pump_w: f64) -> f64 {
        self.linear_cps_per_w * pump_w
    }

    pub fn spdc_rate(&self, pump_w: f64) -> f64 {
        self.spdc_cps_per_w2 * pump_w * pump_w * self.conversion.sin2_factor(pump_w)
    }

    /// Total on-chip noise count rate in cps.
    pub fn ncr_on_chip(&self, pump_w: f64) -> f64 {
        if pump_w <= 0.0 {
            return 0.0;
        }
        self.linear_rate(pump_w) + self.spdc_rate(pump_w)
    }

    /// Analytic `d ln N / d ln P`.
    ///
    /// The SPDC term's own log-slope is `2 + x·cot x` with `x = √(η_nor·P)·L`;
    /// the total is the rate-weighted mean of that and 1.
    pub fn loglog_slope(&self, pump_w: f64) -> Result<f64, NoiseError> {
        check_power(pump_w)?;
        let total = self.ncr_on_chip(pump_w);
        if total <= 0.0 {
            return Err(NoiseError::ZeroRate(pump_w));
        }
        let x = self.conversion.argument(pump_w);
        let spdc = self.spdc_rate(pump_w);
        let spdc_slope = if spdc > 0.0 { 2.0 + x / x.tan() } else { 0.0 };
        Ok((self.linear_rate(pump_w) + spdc * spdc_slope) / total)
    }

    pub fn spdc_fraction(&self, pump_w: f64) -> Result<f64, NoiseError> {
        check_power(pump_w)?;
        let total = self.ncr_on_chip(pump_w);
        if total <= 0.0 {
            return Err(NoiseError::ZeroRate(pump_w));
        }
        Ok(self.spdc_rate(pump_w) / total)
    }
}

fn check_power(pump_w: f64) -> Result<(), NoiseError> {
    if !(pump_w > 0.0) || !pump_w.is_finite() {
        return Err(NoiseError::InvalidPower(pump_w));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub pump_power_w: f64,
    pub ncr_cps: f64,
}

/// Reads `pump_power_w,ncr_cps` rows.
pub fn read_noise_csv<R: Read>(input: R) -> Result<Vec<NoiseSample>, NoiseError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pump_power_w", "ncr_cps"] {
        return Err(NoiseError::InvalidSample(format!(
            "expected header pump_power_w,ncr_cps, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<(f64, f64)>() {
        let (p, n) = row?;
        if !(p >= 0.0) || !(n >= 0.0) {
            return Err(NoiseError::InvalidSample(format!("({p}, {n})")));
        }
        out.push(NoiseSample {
            pump_power_w: p,
            ncr_cps: n,
        });
    }
    Ok(out)
}

/// Non-negative least squares for `(a, κ)` with the conversion model fixed.
///
/// The model is linear in both coefficients. With two unknowns the active
/// set is enumerated: the unconstrained solution if feasible, else the
/// better of the two single-coefficient fits.
pub fn fit_noise(
    samples: &[NoiseSample],
    conversion: ConversionModel,
) -> Result<NoiseModel, NoiseError> {
    if samples.len() < 3 {
        return Err(NoiseError::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let columns: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|s| {
            let p = s.pump_power_w;
            (p, p * p * conversion.sin2_factor(p), s.ncr_cps)
        })
        .collect();
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y) in &columns {
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        b1 += u * y;
        b2 += v * y;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * s11 * s22) {
        return Err(NoiseError::Degenerate(
            "pump powers do not separate the linear and SPDC terms".into(),
        ));
    }
    let a = (s22 * b1 - s12 * b2) / det;
    let kappa = (s11 * b2 - s12 * b1) / det;
    if a >= 0.0 && kappa >= 0.0 {
        return NoiseModel::new(a, kappa, conversion);
    }
    let sse = |a: f64, k: f64| -> f64 {
        columns
            .iter()
            .map(|&(u, v, y)| (a * u + k * v - y).powi(2))
            .sum()
    };
    let a_only = (b1 / s11).max(0.0);
    let k_only = (b2 / s22).max(0.0);
    if sse(a_only, 0.0) <= sse(0.0, k_only) {
        NoiseModel::new(a_only, 0.0, conversion)
    } else {
        NoiseModel::new(0.0, k_only, conversion)
    }
}
