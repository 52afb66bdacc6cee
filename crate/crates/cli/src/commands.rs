use std::path::Path;

use qfc_core::conversion::{fit_conversion, read_efficiency_csv};
use qfc_core::dispersion::{
    calibrate_tuning, ridge_phase_mismatch, ridge_qpm_period, tuning_curve, DispersionError,
};
use qfc_core::noise::{fit_noise, read_noise_csv, NoiseModel};
use qfc_core::photonstats::run_experiment;
use qfc_core::spd::{de_ncr_curve, write_curve_csv};
use qfc_core::timetag::{
    cross_correlation, heralded_g2, read_events_path, write_events, write_heralded_csv, EventSet, EventStream,
};

use crate::config::RunConfig;
use crate::error::{CliError, ResultExt};
use crate::output::{sha256_hex, FileRecord, OutputDir};

/// Per-run state shared by the subcommands.
pub struct Context {
    pub out: OutputDir,
    pub seed: u64,
    pub seed_used: bool,
    pub inputs: Vec<FileRecord>,
    pub stdout: Vec<String>,
}

impl Context {
    fn seed(&mut self) -> u64 {
        self.seed_used = true;
        self.seed
    }

    fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).runtime(&format!("read {}", path.display()))?;
        self.inputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

fn dispersion(e: DispersionError) -> CliError {
    match e {
        DispersionError::InvalidGeometry(_)
        | DispersionError::InvalidInput(_)
        | DispersionError::WavelengthOutOfRange { .. }
        | DispersionError::EnergyNotConserved { .. }
        | DispersionError::PolingPeriodUnset => CliError::Validation(e.to_string()),
        other => CliError::Runtime(anyhow::anyhow!(other)),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn tuning(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let geometry = cfg.geometry()?;
    let material = cfg.material();
    let mut sweep = cfg.sweep();
    if cfg.sweep.calibrate {
        let cal = calibrate_tuning(
            &geometry,
            &material,
            sweep.pump_nm,
            cfg.sweep.target_center_nm,
            cfg.sweep.target_fwhm_nm,
        )
        .map_err(dispersion)?;
        sweep.calibration_offset = cal.calibration_offset;
        sweep.slope_scale = cal.slope_scale;
    }
    let curve = tuning_curve(&geometry, &material, &sweep).map_err(dispersion)?;
    let bytes = csv_bytes(|b| curve.write_csv(b).runtime("tuning csv"))?;
    ctx.out.write("tuning_curve.csv", &bytes)?;
    ctx.stdout.push(format!(
        "center_nm={} fwhm_nm={} calibration_offset_rad_per_um={} slope_scale={}",
        curve.center_nm, curve.fwhm_nm, sweep.calibration_offset, sweep.slope_scale
    ));
    Ok(())
}

pub fn qpm_period(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let geometry = cfg.geometry()?;
    let material = cfg.material();
    let triple = cfg.qpm_triple()?;
    let period = ridge_qpm_period(&geometry, &material, &triple).map_err(dispersion)?;
    let mismatch = ridge_phase_mismatch(&geometry, &material, &triple).map_err(dispersion)?;
    let text = format!(
        "signal_nm,pump_nm,sum_nm,period_um,configured_period_um,mismatch_at_configured_rad_per_um\n{},{},{},{},{},{}\n",
        triple.signal_nm(),
        triple.pump_nm(),
        triple.sum_nm(),
        period,
        cfg.geometry.poling_period_um,
        mismatch
    );
    ctx.out.write("qpm_period.csv", text.as_bytes())?;
    ctx.stdout.push(format!("poling_period_um={period}"));
    Ok(())
}

pub fn fit_efficiency(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let path = cfg
        .conversion
        .input_csv
        .as_ref()
        .ok_or_else(|| CliError::Validation("conversion.input_csv is required".into()))?;
    ctx.record_input(path)?;
    let file = std::fs::File::open(path).runtime(&format!("open {}", path.display()))?;
    let samples = read_efficiency_csv(file).runtime(&path.display().to_string())?;
    let fit = fit_conversion(&samples, cfg.conversion.length_cm).runtime("fit")?;
    let bytes = csv_bytes(|b| fit.write_report(b).runtime("report"))?;
    ctx.out.write("conversion_fit.csv", &bytes)?;
    ctx.stdout.push(format!(
        "eta_max={} eta_nor_percent_per_w_cm2={} optimal_pump_mw={}",
        fit.model.eta_max(),
        fit.model.eta_nor() * 100.0,
        fit.model.optimal_pump() * 1e3
    ));
    Ok(())
}

fn noise_model(cfg: &RunConfig, ctx: &mut Context) -> Result<NoiseModel, CliError> {
    let conv = cfg.conversion()?;
    let n = &cfg.noise;
    if let Some(path) = &n.input_csv {
        ctx.record_input(path)?;
        let file = std::fs::File::open(path).runtime(&format!("open {}", path.display()))?;
        let samples = read_noise_csv(file).runtime(&path.display().to_string())?;
        return fit_noise(&samples, conv).runtime("noise fit");
    }
    match (n.linear_cps_per_w, n.spdc_cps_per_w2) {
        (Some(a), Some(k)) => NoiseModel::new(a, k, conv).validation(),
        (None, None) => {
            let p = n.calibration_pump_power_mw * 1e-3;
            match n.spdc_half_power_mw {
                Some(h) => NoiseModel::calibrate_with_crossing(conv, p, n.calibration_ncr_cps, h * 1e-3),
                None => NoiseModel::calibrate_spdc_only(conv, p, n.calibration_ncr_cps),
            }
            .validation()
        }
        _ => Err(CliError::Validation(
            "noise.linear_cps_per_w and noise.spdc_cps_per_w2 must be given together".into(),
        )),
    }
}

fn power_grid(start_mw: f64, stop_mw: f64, step_mw: f64) -> Result<Vec<f64>, CliError> {
    if !(start_mw >= 0.0 && stop_mw >= start_mw && step_mw > 0.0 && stop_mw.is_finite()) {
        return Err(CliError::Validation(format!(
            "pump range {start_mw}..{stop_mw} mW step {step_mw} mW"
        )));
    }
    let n = ((stop_mw - start_mw) / step_mw + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| (start_mw + i as f64 * step_mw) * 1e-3).collect())
}

pub fn noise_budget(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let model = noise_model(cfg, ctx)?;
    let n = &cfg.noise;
    if !(n.pump_start_mw > 0.0) {
        return Err(CliError::Validation("noise.pump_start_mw must be positive".into()));
    }
    let mut text = String::from("pump_power_w,ncr_cps,linear_cps,spdc_cps,spdc_fraction,loglog_slope\n");
    for p in power_grid(n.pump_start_mw, n.pump_stop_mw, n.pump_step_mw)? {
        text.push_str(&format!(
            "{p},{},{},{},{},{}\n",
            model.ncr_on_chip(p),
            model.linear_rate(p),
            model.spdc_rate(p),
            model.spdc_fraction(p).runtime("fraction")?,
            model.loglog_slope(p).runtime("slope")?
        ));
    }
    ctx.out.write("noise_budget.csv", text.as_bytes())?;
    ctx.stdout.push(format!(
        "linear_cps_per_w={} spdc_cps_per_w2={}",
        model.linear_cps_per_w(),
        model.spdc_cps_per_w2()
    ));
    Ok(())
}

fn simulated_events(cfg: &RunConfig, ctx: &mut Context) -> Result<(EventSet, Vec<&'static str>), CliError> {
    let layout = cfg.layout()?;
    let run = run_experiment(&layout, ctx.seed()).runtime("simulation")?;
    Ok((run.events, layout.kind.channel_names().to_vec()))
}

pub fn simulate(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let (events, names) = simulated_events(cfg, ctx)?;
    let mut bytes = Vec::new();
    write_events(&events, &mut bytes).runtime("encode events")?;
    ctx.out.write("events.qtag", &bytes)?;
    let mut text = String::from("channel,name,events,rate_cps\n");
    for (s, name) in events.streams().iter().zip(&names) {
        text.push_str(&format!("{},{name},{},{}\n", s.channel(), s.len(), s.rate_cps()));
    }
    ctx.out.write("event_counts.csv", text.as_bytes())?;
    ctx.stdout.push(format!("events={} channels={}", events.total_events(), names.join(",")));
    Ok(())
}

fn analysis_events(cfg: &RunConfig, ctx: &mut Context) -> Result<EventSet, CliError> {
    match &cfg.correlation.input {
        Some(path) => {
            ctx.record_input(path)?;
            read_events_path(path).runtime(&path.display().to_string())
        }
        None => simulated_events(cfg, ctx).map(|(e, _)| e),
    }
}

fn channel(events: &EventSet, id: u8) -> Result<&EventStream, CliError> {
    events.channel(id).ok_or_else(|| {
        CliError::Validation(format!(
            "channel {id} not present ({} channels)",
            events.streams().len()
        ))
    })
}

pub fn g2(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let events = analysis_events(cfg, ctx)?;
    let c = &cfg.correlation;
    let a = channel(&events, c.channel_a)?;
    let b = channel(&events, c.channel_b)?;
    let hist = cross_correlation(a, b, c.window_ps, c.max_delay_ps).validation()?;
    let bytes = csv_bytes(|w| hist.write_csv(w).runtime("g2 csv"))?;
    ctx.out.write("g2.csv", &bytes)?;
    ctx.stdout.push(format!(
        "g2_zero={} raw_zero={}",
        hist.g2_at_zero(),
        hist.raw_counts[hist.center_index()]
    ));
    Ok(())
}

pub fn heralded(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let events = analysis_events(cfg, ctx)?;
    let c = &cfg.correlation;
    let h = channel(&events, c.herald_channel)?;
    let s1 = channel(&events, c.s1_channel)?;
    let s2 = channel(&events, c.s2_channel)?;
    let points = heralded_g2(h, s1, s2, c.window_ps, c.max_delay_ps).validation()?;
    let bytes = csv_bytes(|w| write_heralded_csv(&points, w).runtime("heralded csv"))?;
    ctx.out.write("heralded_g2.csv", &bytes)?;
    let zero = points[points.len() / 2];
    ctx.stdout.push(format!("g2_h_zero={} triples_zero={}", zero.g2, zero.triples));
    Ok(())
}

pub fn spd_curve(cfg: &RunConfig, ctx: &mut Context) -> Result<(), CliError> {
    let budget = cfg.budget()?;
    let conversion = cfg.conversion()?;
    let noise = noise_model(cfg, ctx)?;
    let spad = cfg.spad()?;
    let s = &cfg.spd;
    power_grid(s.pump_start_mw, s.pump_stop_mw, s.pump_step_mw)?;
    let points = de_ncr_curve(
        &budget,
        &conversion,
        &noise,
        &spad,
        s.pump_start_mw * 1e-3,
        s.pump_stop_mw * 1e-3,
        s.pump_step_mw * 1e-3,
    )
    .validation()?;
    let bytes = csv_bytes(|w| write_curve_csv(&points, w).runtime("spd csv"))?;
    ctx.out.write("spd_curve.csv", &bytes)?;
    let best = points
        .iter()
        .max_by(|a, b| a.de.total_cmp(&b.de))
        .expect("non-empty grid");
    ctx.stdout.push(format!(
        "max_de={} at_pump_w={} ncr_cps={}",
        best.de, best.pump_power_w, best.ncr_cps
    ));
    Ok(())
}
