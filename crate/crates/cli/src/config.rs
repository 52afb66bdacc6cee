//! Run configuration: strict TOML, unit-suffixed keys, dotted overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qfc_core::conversion::ConversionModel;
use qfc_core::dispersion::{FringeSpec, SellmeierModel, TuningSweep, WavelengthTriple, WaveguideGeometry};
use qfc_core::photonstats::{
    DetectorModel, ExperimentLayout, LayoutKind, PairSourceModel, PairStatistics, QfcStage,
};
use qfc_core::spd::{BudgetItem, LossBudget};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub sellmeier: SellmeierSection,
    pub geometry: GeometrySection,
    pub qpm: QpmSection,
    pub sweep: SweepSection,
    pub conversion: ConversionSection,
    pub noise: NoiseSection,
    pub source: SourceSection,
    pub layout: LayoutSection,
    pub qfc: QfcSection,
    pub detectors: DetectorsSection,
    pub spad: DetectorSection,
    pub budget: BudgetSection,
    pub correlation: CorrelationSection,
    pub spd: SpdSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SellmeierSection {
    pub temperature_c: f64,
}

impl Default for SellmeierSection {
    fn default() -> Self {
        Self { temperature_c: 18.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub film_thickness_nm: f64,
    pub etch_depth_nm: f64,
    pub top_width_um: f64,
    pub sidewall_angle_deg: f64,
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub top_cladding_index: f64,
    pub bottom_cladding_index: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = WaveguideGeometry::converter_chip();
        Self {
            film_thickness_nm: g.film_thickness_nm,
            etch_depth_nm: g.etch_depth_nm,
            top_width_um: g.top_width_um,
            sidewall_angle_deg: g.sidewall_angle_deg,
            length_mm: g.length_mm,
            poling_period_um: g.poling_period_um.unwrap_or(4.1),
            top_cladding_index: g.top_cladding_index,
            bottom_cladding_index: g.bottom_cladding_index,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QpmSection {
    pub signal_wavelength_nm: f64,
    pub pump_wavelength_nm: f64,
}

impl Default for QpmSection {
    fn default() -> Self {
        Self {
            signal_wavelength_nm: 1531.1,
            pump_wavelength_nm: 1950.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub pump_wavelength_nm: f64,
    pub signal_start_nm: f64,
    pub signal_stop_nm: f64,
    pub signal_step_nm: f64,
    pub calibration_offset_rad_per_um: f64,
    pub slope_scale: f64,
    /// Solve offset and scale from the targets below before sweeping.
    pub calibrate: bool,
    pub target_center_nm: f64,
    pub target_fwhm_nm: f64,
    pub fringes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facet_reflectivity: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = TuningSweep::measured_range();
        Self {
            pump_wavelength_nm: s.pump_nm,
            signal_start_nm: s.signal_start_nm,
            signal_stop_nm: s.signal_stop_nm,
            signal_step_nm: s.step_nm,
            calibration_offset_rad_per_um: s.calibration_offset,
            slope_scale: s.slope_scale,
            calibrate: true,
            target_center_nm: 1531.1,
            target_fwhm_nm: 10.5,
            fringes: false,
            facet_reflectivity: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConversionSection {
    pub eta_max: f64,
    pub eta_nor_percent_per_w_cm2: f64,
    pub length_cm: f64,
    /// `pump_power_w,efficiency` samples for `fit-efficiency`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_csv: Option<PathBuf>,
}

impl Default for ConversionSection {
    fn default() -> Self {
        Self {
            eta_max: 0.73,
            eta_nor_percent_per_w_cm2: 2837.0,
            length_cm: 0.53,
            input_csv: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub calibration_pump_power_mw: f64,
    pub calibration_ncr_cps: f64,
    /// Pump power at which the SPDC share is one half; pure SPDC when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spdc_half_power_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_cps_per_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spdc_cps_per_w2: Option<f64>,
    /// `pump_power_w,ncr_cps` samples; fitted when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_csv: Option<PathBuf>,
    pub pump_start_mw: f64,
    pub pump_stop_mw: f64,
    pub pump_step_mw: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            calibration_pump_power_mw: 240.0,
            calibration_ncr_cps: 900.0,
            spdc_half_power_mw: None,
            linear_cps_per_w: None,
            spdc_cps_per_w2: None,
            input_csv: None,
            pump_start_mw: 10.0,
            pump_stop_mw: 400.0,
            pump_step_mw: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsName {
    Thermal,
    Poisson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    pub mean_pairs_per_mode: f64,
    pub mode_duration_ps: u64,
    pub duration_s: f64,
    pub statistics: StatisticsName,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            mean_pairs_per_mode: 1.0 / 21.0,
            mode_duration_ps: 1500,
            duration_s: 0.015,
            statistics: StatisticsName::Thermal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    Pair,
    Hsps,
    HspsQfc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutSection {
    pub kind: LayoutName,
    pub signal_loss_db: f64,
    pub idler_loss_db: f64,
    pub splitter_ratio: f64,
}

impl Default for LayoutSection {
    fn default() -> Self {
        Self {
            kind: LayoutName::Pair,
            signal_loss_db: 0.0,
            idler_loss_db: 0.0,
            splitter_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QfcSection {
    pub conversion_efficiency: f64,
    pub noise_rate_cps: f64,
}

impl Default for QfcSection {
    fn default() -> Self {
        Self {
            conversion_efficiency: 0.72,
            noise_rate_cps: 900.0,
        }
    }
}

/// Unset fields fall back to the defaults of the detector's role.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dark_rate_cps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter_sigma_ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dead_time_ps: Option<u64>,
}

impl DetectorSection {
    pub fn resolve(&self, base: DetectorModel) -> DetectorModel {
        DetectorModel {
            efficiency: self.efficiency.unwrap_or(base.efficiency),
            dark_rate_cps: self.dark_rate_cps.unwrap_or(base.dark_rate_cps),
            jitter_sigma_ps: self.jitter_sigma_ps.unwrap_or(base.jitter_sigma_ps),
            dead_time_ps: self.dead_time_ps.unwrap_or(base.dead_time_ps),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorsSection {
    pub signal: DetectorSection,
    pub idler: DetectorSection,
    pub s1: DetectorSection,
    pub s2: DetectorSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmission: Option<f64>,
}

/// Ordered cascade; the entries named `conversion` and `detector` are the
/// model-driven slots, their values the nominal figures.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub entries: Vec<BudgetEntry>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let db = |name: &str, v: f64| BudgetEntry {
            name: name.into(),
            db: Some(v),
            transmission: None,
        };
        let t = |name: &str, v: f64| BudgetEntry {
            name: name.into(),
            db: None,
            transmission: Some(v),
        };
        Self {
            entries: vec![
                db("wdm_pc_lensed_fiber", 0.5),
                db("fiber_to_chip", 4.0),
                t("conversion", 0.72),
                db("filtering_space_to_fiber", 1.6),
                t("detector", 0.5),
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationSection {
    pub window_ps: u64,
    pub max_delay_ps: u64,
    /// QTAG1 file to analyse; simulated from the config when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub channel_a: u8,
    pub channel_b: u8,
    pub herald_channel: u8,
    pub s1_channel: u8,
    pub s2_channel: u8,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        Self {
            window_ps: 1500,
            max_delay_ps: 15_000,
            input: None,
            channel_a: 0,
            channel_b: 1,
            herald_channel: 0,
            s1_channel: 1,
            s2_channel: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpdSection {
    pub pump_start_mw: f64,
    pub pump_stop_mw: f64,
    pub pump_step_mw: f64,
}

impl Default for SpdSection {
    fn default() -> Self {
        Self {
            pump_start_mw: 0.0,
            pump_stop_mw: 400.0,
            pump_step_mw: 5.0,
        }
    }
}

/// Reads the config file (if any) and applies `key=value` overrides.
///
/// Override values are TOML literals; anything that does not parse as one
/// is taken as a string.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut root = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Parse(format!("config {}: {}", p.display(), one_line(&e.to_string()))))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("override `{item}` is not key=value")))?;
        let value = parse_literal(raw.trim());
        set_dotted(&mut root, key.trim(), value)?;
    }
    RunConfig::deserialize(toml::Value::Table(root))
        .map_err(|e| CliError::Parse(format!("config: {}", one_line(&e.to_string()))))
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Parse(format!("malformed override key `{key}`")));
    }
    let (last, parents) = parts.split_last().expect("non-empty");
    let mut table = root;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Parse(format!("override `{key}`: `{p}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

pub fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

impl RunConfig {
    pub fn material(&self) -> SellmeierModel {
        SellmeierModel::congruent_ln_extraordinary().with_temperature(self.sellmeier.temperature_c)
    }

    pub fn geometry(&self) -> Result<WaveguideGeometry, CliError> {
        let g = &self.geometry;
        let geometry = WaveguideGeometry {
            film_thickness_nm: g.film_thickness_nm,
            etch_depth_nm: g.etch_depth_nm,
            top_width_um: g.top_width_um,
            sidewall_angle_deg: g.sidewall_angle_deg,
            length_mm: g.length_mm,
            poling_period_um: Some(g.poling_period_um),
            top_cladding_index: g.top_cladding_index,
            bottom_cladding_index: g.bottom_cladding_index,
        };
        geometry.validate().map_err(invalid)?;
        Ok(geometry)
    }

    pub fn qpm_triple(&self) -> Result<WavelengthTriple, CliError> {
        WavelengthTriple::from_signal_pump(self.qpm.signal_wavelength_nm, self.qpm.pump_wavelength_nm)
            .map_err(invalid)
    }

    pub fn sweep(&self) -> TuningSweep {
        let s = &self.sweep;
        TuningSweep {
            pump_nm: s.pump_wavelength_nm,
            signal_start_nm: s.signal_start_nm,
            signal_stop_nm: s.signal_stop_nm,
            step_nm: s.signal_step_nm,
            calibration_offset: s.calibration_offset_rad_per_um,
            slope_scale: s.slope_scale,
            fringe: s.fringes.then_some(FringeSpec {
                reflectivity: s.facet_reflectivity,
            }),
        }
    }

    pub fn conversion(&self) -> Result<ConversionModel, CliError> {
        let c = &self.conversion;
        ConversionModel::from_percent(c.eta_max, c.eta_nor_percent_per_w_cm2, c.length_cm).map_err(invalid)
    }

    pub fn source(&self) -> Result<PairSourceModel, CliError> {
        let s = &self.source;
        let statistics = match s.statistics {
            StatisticsName::Thermal => PairStatistics::Thermal,
            StatisticsName::Poisson => PairStatistics::Poisson,
        };
        Ok(PairSourceModel::new(s.mean_pairs_per_mode, s.mode_duration_ps, s.duration_s)
            .map_err(invalid)?
            .with_statistics(statistics))
    }

    pub fn layout(&self) -> Result<ExperimentLayout, CliError> {
        let l = &self.layout;
        let snspd = DetectorModel::snspd();
        let d = &self.detectors;
        let (kind, detectors) = match l.kind {
            LayoutName::Pair => (LayoutKind::Pair, vec![d.signal.resolve(snspd), d.idler.resolve(snspd)]),
            LayoutName::Hsps | LayoutName::HspsQfc => (
                if l.kind == LayoutName::Hsps { LayoutKind::Hsps } else { LayoutKind::HspsQfc },
                vec![d.idler.resolve(snspd), d.s1.resolve(snspd), d.s2.resolve(snspd)],
            ),
        };
        let layout = ExperimentLayout {
            kind,
            source: self.source()?,
            signal_loss_db: l.signal_loss_db,
            idler_loss_db: l.idler_loss_db,
            splitter_ratio: l.splitter_ratio,
            qfc: Some(QfcStage {
                conversion_efficiency: self.qfc.conversion_efficiency,
                noise_rate_cps: self.qfc.noise_rate_cps,
            }),
            detectors,
        };
        layout.validate().map_err(invalid)?;
        Ok(layout)
    }

    pub fn spad(&self) -> Result<DetectorModel, CliError> {
        let d = self.spad.resolve(DetectorModel::spad());
        d.validate().map_err(invalid)?;
        Ok(d)
    }

    pub fn budget(&self) -> Result<LossBudget, CliError> {
        let items = self
            .budget
            .entries
            .iter()
            .map(|e| {
                let t = match (e.db, e.transmission) {
                    (Some(db), None) => qfc_core::spd::db_to_transmission(db),
                    (None, Some(t)) => t,
                    _ => {
                        return Err(CliError::Validation(format!(
                            "budget entry `{}` needs exactly one of db, transmission",
                            e.name
                        )))
                    }
                };
                Ok(match e.name.as_str() {
                    "conversion" => BudgetItem::Conversion { nominal: t },
                    "detector" => BudgetItem::Detector { efficiency: t },
                    name => match e.db {
                        Some(db) => BudgetItem::db(name, db),
                        None => BudgetItem::transmission(name, t),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        LossBudget::new(items).map_err(invalid)
    }
}
