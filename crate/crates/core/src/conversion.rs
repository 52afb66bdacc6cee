//! Pump-power dependence of the internal conversion efficiency.
//!
//! The model is `η(P) = η_max · sin²(√(η_nor·P)·L)` with P in W at the output
//! facet, η_nor in 1/(W·cm²) and L in cm. Percent-valued normalized
//! efficiencies are converted once, at construction.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConversionError {
    #[error("invalid conversion model: {0}")]
    InvalidModel(String),
    #[error("pump power must be non-negative, got {0} W")]
    NegativePower(f64),
    #[error("invalid efficiency sample: {0}")]
    InvalidSample(String),
    #[error("fit needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("fit left the model domain: {0}")]
    OutOfDomain(String),
    #[error("signal fully depleted: sin² factor is 1 at {0} W")]
    InfiniteDepletion(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// `(η_max, η_nor, L)` of the conversion-efficiency law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionModel {
    eta_max: f64,
    eta_nor: f64,
    length_cm: f64,
}

impl ConversionModel {
    pub fn new(eta_max: f64, eta_nor_per_w_cm2: f64, length_cm: f64) -> Result<Self, ConversionError> {
        if !(eta_max > 0.0 && eta_max <= 1.0) {
            return Err(ConversionError::InvalidModel(format!(
                "eta_max must lie in (0, 1], got {eta_max}"
            )));
        }
        if !(eta_nor_per_w_cm2 > 0.0) || !eta_nor_per_w_cm2.is_finite() {
            return Err(ConversionError::InvalidModel(format!(
                "eta_nor must be positive, got {eta_nor_per_w_cm2} /(W·cm²)"
            )));
        }
        if !(length_cm > 0.0) || !length_cm.is_finite() {
            return Err(ConversionError::InvalidModel(format!(
                "length must be positive, got {length_cm} cm"
            )));
        }
        Ok(Self {
            eta_max,
            eta_nor: eta_nor_per_w_cm2,
            length_cm,
        })
    }

    /// Accepts η_nor in %/(W·cm²).
    pub fn from_percent(
        eta_max: f64,
        eta_nor_percent: f64,
        length_cm: f64,
    ) -> Result<Self, ConversionError> {
        Self::new(eta_max, eta_nor_percent / 100.0, length_cm)
    }

    /// Fitted chip: 73 % peak, 2837 %/(W·cm²), 0.53 cm.
    pub fn converter_chip() -> Self {
        Self {
            eta_max: 0.73,
            eta_nor: 28.37,
            length_cm: 0.53,
        }
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    pub fn eta_nor(&self) -> f64 {
        self.eta_nor
    }

    pub fn length_cm(&self) -> f64 {
        self.length_cm
    }

    /// Phase argument `√(η_nor·P)·L`.
    pub fn argument(&self, pump_w: f64) -> f64 {
        (self.eta_nor * pump_w).sqrt() * self.length_cm
    }

    /// `sin²(√(η_nor·P)·L)`, the loss-free conversion fraction.
    pub fn sin2_factor(&self, pump_w: f64) -> f64 {
        self.argument(pump_w).sin().powi(2)
    }

    pub fn efficiency(&self, pump_w: f64) -> Result<f64, ConversionError> {
        check_power(pump_w)?;
        Ok(self.eta_max * self.sin2_factor(pump_w))
    }

    /// Pump power of the first efficiency maximum, `(π/2)² / (η_nor·L²)`.
    pub fn optimal_pump(&self) -> f64 {
        FRAC_PI_2 * FRAC_PI_2 / (self.eta_nor * self.length_cm * self.length_cm)
    }

    /// Depletion of the transmitted signal in dB, `−10·log₁₀(1 − sin²)`.
    pub fn depletion_db(&self, pump_w: f64) -> Result<f64, ConversionError> {
        check_power(pump_w)?;
        let remaining = 1.0 - self.sin2_factor(pump_w);
        if remaining <= 0.0 {
            return Err(ConversionError::InfiniteDepletion(pump_w));
        }
        Ok(-10.0 * remaining.log10())
    }
}

fn check_power(pump_w: f64) -> Result<(), ConversionError> {
    if pump_w < 0.0 || pump_w.is_nan() {
        return Err(ConversionError::NegativePower(pump_w));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencySample {
    pub pump_power_w: f64,
    pub efficiency: f64,
}

impl EfficiencySample {
    pub fn new(pump_power_w: f64, efficiency: f64) -> Result<Self, ConversionError> {
        if !(pump_power_w >= 0.0) || !pump_power_w.is_finite() {
            return Err(ConversionError::InvalidSample(format!(
                "power must be non-negative, got {pump_power_w}"
            )));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(ConversionError::InvalidSample(format!(
                "efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        Ok(Self {
            pump_power_w,
            efficiency,
        })
    }
}

/// Fitted model with one-sigma standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionFit {
    pub model: ConversionModel,
    pub eta_max_stderr: f64,
    pub eta_nor_stderr: f64,
    pub residual_sum_squares: f64,
    pub iterations: usize,
}

impl ConversionFit {
    /// Report as CSV `param,value,stderr`; η_nor in 1/(W·cm²).
    pub fn write_report<W: Write>(&self, out: W) -> Result<(), ConversionError> {
        let mut w = csv_writer(out);
        w.write_record(["param", "value", "stderr"])?;
        w.write_record([
            "eta_max".to_string(),
            self.model.eta_max.to_string(),
            self.eta_max_stderr.to_string(),
        ])?;
        w.write_record([
            "eta_nor_per_w_cm2".to_string(),
            self.model.eta_nor.to_string(),
            self.eta_nor_stderr.to_string(),
        ])?;
        w.write_record([
            "length_cm".to_string(),
            self.model.length_cm.to_string(),
            "0".to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Reads `pump_power_w,efficiency` rows.
pub fn read_efficiency_csv<R: Read>(input: R) -> Result<Vec<EfficiencySample>, ConversionError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pump_power_w", "efficiency"] {
        return Err(ConversionError::InvalidSample(format!(
            "expected header pump_power_w,efficiency, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for row in reader.deserialize::<(f64, f64)>() {
        let (p, eta) = row?;
        samples.push(EfficiencySample::new(p, eta)?);
    }
    Ok(samples)
}

const GRID_POINTS: usize = 600;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-9;

/// Least-squares fit of `(η_max, η_nor)` at fixed length.
///
/// A coarse grid over the phase argument at the highest power (η_max solved
/// in closed form at each node) picks the starting lobe; damped Gauss–Newton
/// then refines both parameters until the relative step drops below 1e-9.
pub fn fit_conversion(
    samples: &[EfficiencySample],
    length_cm: f64,
) -> Result<ConversionFit, ConversionError> {
    if samples.len() < 3 {
        return Err(ConversionError::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    if !(length_cm > 0.0) {
        return Err(ConversionError::InvalidModel(format!(
            "length must be positive, got {length_cm} cm"
        )));
    }
    let p_max = samples
        .iter()
        .map(|s| s.pump_power_w)
        .fold(f64::NEG_INFINITY, f64::max);
    let p_min_positive = samples
        .iter()
        .map(|s| s.pump_power_w)
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    if samples.iter().all(|s| s.pump_power_w == samples[0].pump_power_w) {
        return Err(ConversionError::DegenerateData(
            "all samples share one pump power".into(),
        ));
    }
    if !(p_max >= 3.0 * p_min_positive) {
        return Err(ConversionError::DegenerateData(format!(
            "pump powers must span a factor of 3, got {p_min_positive}..{p_max} W"
        )));
    }

    let sse = |eta_max: f64, eta_nor: f64| -> f64 {
        samples
            .iter()
            .map(|s| {
                let x = (eta_nor * s.pump_power_w).sqrt() * length_cm;
                (eta_max * x.sin().powi(2) - s.efficiency).powi(2)
            })
            .sum()
    };

    // Coarse grid on the argument reached at p_max, 0.02..3π.
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..GRID_POINTS {
        let x_max = 0.02 + (3.0 * std::f64::consts::PI - 0.02) * i as f64 / (GRID_POINTS - 1) as f64;
        let eta_nor = (x_max / length_cm).powi(2) / p_max;
        let (mut sy, mut ss) = (0.0, 0.0);
        for s in samples {
            let f = ((eta_nor * s.pump_power_w).sqrt() * length_cm).sin().powi(2);
            sy += f * s.efficiency;
            ss += f * f;
        }
        if ss == 0.0 {
            continue;
        }
        let eta_max = sy / ss;
        let e = sse(eta_max, eta_nor);
        if e < best.0 {
            best = (e, eta_max, eta_nor);
        }
    }
    let (_, mut eta_max, mut eta_nor) = best;

    let jacobian = |eta_max: f64, eta_nor: f64, p: f64| -> (f64, f64, f64) {
        let x = (eta_nor * p).sqrt() * length_cm;
        let s2 = x.sin().powi(2);
        let d_nor = eta_max * (2.0 * x).sin() * x / (2.0 * eta_nor);
        (s2, d_nor, eta_max * s2)
    };

    let mut damping = 1e-3;
    let mut current = sse(eta_max, eta_nor);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in samples {
            let (j1, j2, model) = jacobian(eta_max, eta_nor, s.pump_power_w);
            let r = s.efficiency - model;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let b11 = a11 * (1.0 + damping);
            let b22 = a22 * (1.0 + damping);
            let det = b11 * b22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                damping *= 10.0;
                continue;
            }
            let d1 = (b22 * g1 - a12 * g2) / det;
            let d2 = (b11 * g2 - a12 * g1) / det;
            let (t1, t2) = (eta_max + d1, eta_nor + d2);
            if t2 > 0.0 {
                let trial = sse(t1, t2);
                if trial <= current {
                    accepted = Some((d1, d2, trial));
                    break;
                }
            }
            damping *= 10.0;
        }
        let Some((d1, d2, trial)) = accepted else {
            // No descent direction left: the grid point is already a minimum.
            converged = true;
            break;
        };
        eta_max += d1;
        eta_nor += d2;
        current = trial;
        damping = (damping * 0.1).max(1e-12);
        let rel = (d1 / eta_max).abs().max((d2 / eta_nor).abs());
        if rel < STEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ConversionError::NotConverged { iterations });
    }
    if !(eta_max > 0.0 && eta_max <= 1.0 + 1e-9) {
        return Err(ConversionError::OutOfDomain(format!(
            "eta_max = {eta_max} (eta_nor = {eta_nor})"
        )));
    }
    let model = ConversionModel::new(eta_max.min(1.0), eta_nor, length_cm)
        .map_err(|e| ConversionError::OutOfDomain(e.to_string()))?;

    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for s in samples {
        let (j1, j2, _) = jacobian(eta_max, eta_nor, s.pump_power_w);
        a11 += j1 * j1;
        a12 += j1 * j2;
        a22 += j2 * j2;
    }
    let det = a11 * a22 - a12 * a12;
    let dof = (samples.len() - 2) as f64;
    let sigma2 = current / dof;
    let (eta_max_stderr, eta_nor_stderr) = if det > 0.0 {
        ((sigma2 * a22 / det).sqrt(), (sigma2 * a11 / det).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(ConversionFit {
        model,
        eta_max_stderr,
        eta_nor_stderr,
        residual_sum_squares: current,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn chip() -> ConversionModel {
        ConversionModel::new(0.73, 28.37, 0.53).unwrap()
    }

    #[test]
    fn zero_power_zero_efficiency() {
        assert_eq!(chip().efficiency(0.0).unwrap(), 0.0);
    }

    #[test]
    fn peak_at_310_mw() {
        assert!((chip().efficiency(0.310).unwrap() - 0.730).abs() < 1e-3);
    }

    #[test]
    fn hand_value_at_246_mw() {
        // sin²(1.400 14) = 0.971 13 by hand.
        let m = chip();
        assert!((m.sin2_factor(0.246) - 0.9711).abs() < 1e-4);
        assert!((m.efficiency(0.246).unwrap() - 0.7089).abs() < 1e-4);
    }

    #[test]
    fn negative_power_rejected() {
        assert!(matches!(
            chip().efficiency(-0.1),
            Err(ConversionError::NegativePower(_))
        ));
    }

    #[test]
    fn percent_units_convert() {
        let m = ConversionModel::from_percent(0.73, 2837.0, 0.53).unwrap();
        assert!((m.eta_nor() - 28.37).abs() < 1e-12);
        assert!(ConversionModel::new(1.2, 28.37, 0.53).is_err());
        assert!(ConversionModel::new(0.7, 0.0, 0.53).is_err());
    }

    #[test]
    fn optimal_pump_values() {
        assert!((chip().optimal_pump() - 0.3096).abs() < 1e-4);
        let doubled = ConversionModel::new(0.73, 28.37, 1.06).unwrap();
        assert!((doubled.optimal_pump() * 4.0 - chip().optimal_pump()).abs() < 1e-15);
        let unit = ConversionModel::new(0.5, FRAC_PI_2 * FRAC_PI_2, 1.0).unwrap();
        assert!((unit.optimal_pump() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depletion_values() {
        let m = chip();
        let d = m.depletion_db(0.246).unwrap();
        assert!((d - 15.4).abs() < 0.05, "{d}");
        assert!((d - 14.8).abs() < 1.0);
        assert!(m.depletion_db(1e-12).unwrap().abs() < 1e-6);
        assert!(matches!(
            m.depletion_db(m.optimal_pump()),
            Err(ConversionError::InfiniteDepletion(_))
        ));
    }

    fn sweep(model: &ConversionModel, n: usize) -> Vec<EfficiencySample> {
        let p_star = model.optimal_pump();
        (0..n)
            .map(|i| {
                let p = p_star * (0.05 + 1.15 * i as f64 / (n - 1) as f64);
                EfficiencySample::new(p, model.efficiency(p).unwrap()).unwrap()
            })
            .collect()
    }

    #[test]
    fn noiseless_roundtrip() {
        let fit = fit_conversion(&sweep(&chip(), 12), 0.53).unwrap();
        assert!((fit.model.eta_max() / 0.73 - 1.0).abs() < 1e-6);
        assert!((fit.model.eta_nor() / 28.37 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_recovery_within_reported_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_221);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let samples: Vec<_> = sweep(&chip(), 20)
            .into_iter()
            .map(|s| {
                let eta = (s.efficiency * (1.0 + noise.sample(&mut rng))).clamp(0.0, 1.0);
                EfficiencySample::new(s.pump_power_w, eta).unwrap()
            })
            .collect();
        let fit = fit_conversion(&samples, 0.53).unwrap();
        assert!((fit.model.eta_nor() - 28.37).abs() < 0.97, "{fit:?}");
        assert!(fit.eta_nor_stderr > 0.0 && fit.eta_nor_stderr < 0.97);
    }

    #[test]
    fn too_few_or_degenerate() {
        let s = sweep(&chip(), 2);
        assert!(matches!(
            fit_conversion(&s, 0.53),
            Err(ConversionError::TooFewSamples { .. })
        ));
        let same = vec![EfficiencySample::new(0.2, 0.5).unwrap(); 5];
        assert!(matches!(
            fit_conversion(&same, 0.53),
            Err(ConversionError::DegenerateData(_))
        ));
        let narrow: Vec<_> = [0.2, 0.25, 0.3]
            .iter()
            .map(|&p| EfficiencySample::new(p, chip().efficiency(p).unwrap()).unwrap())
            .collect();
        assert!(fit_conversion(&narrow, 0.53).is_err());
    }

    #[test]
    fn report_csv() {
        let fit = fit_conversion(&sweep(&chip(), 12), 0.53).unwrap();
        let mut buf = Vec::new();
        fit.write_report(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("param,value,stderr\neta_max,"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn reads_sample_csv() {
        let text = "pump_power_w,efficiency\n0.1,0.3\n0.2,0.55\n";
        let s = read_efficiency_csv(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].efficiency, 0.55);
        assert!(read_efficiency_csv("p,e\n0.1,0.3\n".as_bytes()).is_err());
        assert!(read_efficiency_csv("pump_power_w,efficiency\n0.1,1.3\n".as_bytes()).is_err());
    }
}
