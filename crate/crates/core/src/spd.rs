//! Upconversion single-photon detector: the converter, noise model and the
//! component loss cascade composed into detection efficiency and noise
//! count rate versus pump power.

use std::io::Write;

use thiserror::Error;

use crate::conversion::{ConversionError, ConversionModel};
use crate::noise::NoiseModel;
use crate::photonstats::DetectorModel;

#[derive(Debug, Error)]
pub enum SpdError {
    #[error("invalid loss budget: {0}")]
    InvalidBudget(String),
    #[error("invalid pump range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub fn db_to_transmission(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

pub fn transmission_to_db(transmission: f64) -> f64 {
    -10.0 * transmission.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attenuation {
    Transmission(f64),
    LossDb(f64),
}

impl Attenuation {
    pub fn transmission(self) -> f64 {
        match self {
            Attenuation::Transmission(t) => t,
            Attenuation::LossDb(db) => db_to_transmission(db),
        }
    }
}

/// One position in the cascade, in optical order.
#[derive(Debug, Clone, PartialEq)]
pub enum BudgetItem {
    Static { name: String, value: Attenuation },
    /// Internal conversion; `nominal` applies when no model is supplied.
    Conversion { nominal: f64 },
    Detector { efficiency: f64 },
}

impl BudgetItem {
    pub fn db(name: &str, loss_db: f64) -> Self {
        BudgetItem::Static {
            name: name.to_string(),
            value: Attenuation::LossDb(loss_db),
        }
    }

    pub fn transmission(name: &str, t: f64) -> Self {
        BudgetItem::Static {
            name: name.to_string(),
            value: Attenuation::Transmission(t),
        }
    }
}

/// Ordered cascade with exactly one conversion slot and one detector slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBudget {
    items: Vec<BudgetItem>,
}

impl LossBudget {
    pub fn new(items: Vec<BudgetItem>) -> Result<Self, SpdError> {
        let mut conversions = 0;
        let mut detectors = 0;
        for item in &items {
            let (label, t) = match item {
                BudgetItem::Static { name, value } => {
                    if let Attenuation::LossDb(db) = value {
                        if !db.is_finite() || *db < 0.0 {
                            return Err(SpdError::InvalidBudget(format!("{name}: loss {db} dB")));
                        }
                    }
                    (name.as_str(), value.transmission())
                }
                BudgetItem::Conversion { nominal } => {
                    conversions += 1;
                    ("conversion", *nominal)
                }
                BudgetItem::Detector { efficiency } => {
                    detectors += 1;
                    ("detector", *efficiency)
                }
            };
            if !(t > 0.0 && t <= 1.0) {
                return Err(SpdError::InvalidBudget(format!(
                    "{label}: transmission {t} outside (0, 1]"
                )));
            }
        }
        if conversions != 1 || detectors != 1 {
            return Err(SpdError::InvalidBudget(format!(
                "need one conversion and one detector slot, got {conversions} and {detectors}"
            )));
        }
        Ok(Self { items })
    }

    /// Component losses of the fabricated converter: fiber WDM/polarization
    /// control/lensed fiber, fiber-to-chip coupling, conversion, filtering and
    /// free-space-to-fiber coupling, silicon SPAD.
    pub fn reference() -> Self {
        Self::new(vec![
            BudgetItem::db("wdm_pc_lensed_fiber", 0.5),
            BudgetItem::db("fiber_to_chip", 4.0),
            BudgetItem::Conversion { nominal: 0.72 },
            BudgetItem::db("filtering_space_to_fiber", 1.6),
            BudgetItem::Detector { efficiency: 0.5 },
        ])
        .expect("valid budget")
    }

    pub fn items(&self) -> &[BudgetItem] {
        &self.items
    }

    pub fn nominal_conversion(&self) -> f64 {
        self.items
            .iter()
            .find_map(|i| match i {
                BudgetItem::Conversion { nominal } => Some(*nominal),
                _ => None,
            })
            .expect("validated")
    }

    pub fn detector_efficiency(&self) -> f64 {
        self.items
            .iter()
            .find_map(|i| match i {
                BudgetItem::Detector { efficiency } => Some(*efficiency),
                _ => None,
            })
            .expect("validated")
    }

    /// Product of the static entries only.
    pub fn static_transmission(&self) -> f64 {
        self.items
            .iter()
            .map(|i| match i {
                BudgetItem::Static { value, .. } => value.transmission(),
                _ => 1.0,
            })
            .product()
    }

    /// Static entries after the conversion slot.
    pub fn post_chip_transmission(&self) -> f64 {
        self.items
            .iter()
            .skip_while(|i| !matches!(i, BudgetItem::Conversion { .. }))
            .map(|i| match i {
                BudgetItem::Static { value, .. } => value.transmission(),
                _ => 1.0,
            })
            .product()
    }

    /// DE with the nominal conversion value.
    pub fn nominal_de(&self) -> f64 {
        self.static_transmission() * self.nominal_conversion() * self.detector_efficiency()
    }
}

/// Detection efficiency at pump power `pump_w`, the conversion slot taken from the model.
pub fn system_de(budget: &LossBudget, conversion: &ConversionModel, pump_w: f64) -> Result<f64, SpdError> {
    Ok(budget.static_transmission() * conversion.efficiency(pump_w)? * budget.detector_efficiency())
}

/// Detected noise count rate: on-chip noise through the post-chip optics and
/// the detector, plus its dark counts.
pub fn system_ncr(noise: &NoiseModel, post_chip_transmission: f64, spad: &DetectorModel, pump_w: f64) -> f64 {
    noise.ncr_on_chip(pump_w) * post_chip_transmission * spad.efficiency + spad.dark_rate_cps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdPoint {
    pub pump_power_w: f64,
    pub de: f64,
    pub ncr_cps: f64,
}

/// `(P, DE, NCR)` on `start, start + step, …` up to `stop` inclusive.
///
/// The detector model must agree with the budget's detector slot.
pub fn de_ncr_curve(
    budget: &LossBudget,
    conversion: &ConversionModel,
    noise: &NoiseModel,
    spad: &DetectorModel,
    start_w: f64,
    stop_w: f64,
    step_w: f64,
) -> Result<Vec<SpdPoint>, SpdError> {
    if !(start_w >= 0.0) || !(stop_w >= start_w) || !(step_w > 0.0) || !stop_w.is_finite() {
        return Err(SpdError::InvalidRange(format!(
            "start {start_w} W, stop {stop_w} W, step {step_w} W"
        )));
    }
    if (spad.efficiency - budget.detector_efficiency()).abs() > 1e-12 {
        return Err(SpdError::InvalidBudget(format!(
            "detector efficiency {} differs from budget slot {}",
            spad.efficiency,
            budget.detector_efficiency()
        )));
    }
    let n = ((stop_w - start_w) / step_w + 1e-9).floor() as usize;
    let post = budget.post_chip_transmission();
    (0..=n)
        .map(|i| {
            let p = start_w + i as f64 * step_w;
            Ok(SpdPoint {
                pump_power_w: p,
                de: system_de(budget, conversion, p)?,
                ncr_cps: system_ncr(noise, post, spad, p),
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(points: &[SpdPoint], out: W) -> Result<(), SpdError> {
    let mut w = crate::conversion::csv_writer(out);
    w.write_record(["pump_power_w", "de", "ncr_cps"])?;
    for p in points {
        w.write_record([p.pump_power_w.to_string(), p.de.to_string(), p.ncr_cps.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
