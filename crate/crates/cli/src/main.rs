mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sha256_hex, Manifest, OutputDir};

/// Models and simulations for a thin-film lithium niobate frequency converter
/// and upconversion single-photon detector.
#[derive(Debug, Parser)]
#[command(name = "qfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized conversion efficiency versus signal wavelength.
    TuningCurve(Common),
    /// First-order poling period for the configured wavelengths.
    QpmPeriod(Common),
    /// Fit the saturating conversion model to measured efficiencies.
    FitEfficiency(Common),
    /// Noise count rate versus pump power, split into its two processes.
    NoiseBudget(Common),
    /// Simulate photon pairs through an optical layout into time tags.
    Simulate(Common),
    /// Cross-correlation g2 between two channels.
    G2(Common),
    /// Heralded autocorrelation from a herald and two split channels.
    HeraldedG2(Common),
    /// Detection efficiency and noise count rate versus pump power.
    SpdCurve(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Config overrides such as `noise.calibration_ncr_cps=900`.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

type Handler = fn(&RunConfig, &mut Context) -> Result<(), CliError>;

impl Command {
    fn parts(&self) -> (&'static str, &Common, Handler) {
        match self {
            Command::TuningCurve(c) => ("tuning-curve", c, commands::tuning),
            Command::QpmPeriod(c) => ("qpm-period", c, commands::qpm_period),
            Command::FitEfficiency(c) => ("fit-efficiency", c, commands::fit_efficiency),
            Command::NoiseBudget(c) => ("noise-budget", c, commands::noise_budget),
            Command::Simulate(c) => ("simulate", c, commands::simulate),
            Command::G2(c) => ("g2", c, commands::g2),
            Command::HeraldedG2(c) => ("heralded-g2", c, commands::heralded),
            Command::SpdCurve(c) => ("spd-curve", c, commands::spd_curve),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, handler) = cli.command.parts();
    let mut cfg = config::load(common.config.as_deref(), &common.overrides)?;
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &common.out {
        cfg.out_dir = Some(out.clone());
    }
    let (seed, seed_source) = match cfg.seed {
        Some(s) if common.seed.is_some() => (s, "flag"),
        Some(s) => (s, "config"),
        None => (rand::random::<u64>() >> 1, "auto"),
    };
    if seed > i64::MAX as u64 {
        return Err(CliError::Validation(format!(
            "seed {seed} exceeds {}; manifests store it as a TOML integer",
            i64::MAX
        )));
    }
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Context {
        out: OutputDir::create(&out_dir)?,
        seed,
        seed_used: false,
        inputs: Vec::new(),
        stdout: Vec::new(),
    };
    handler(&cfg, &mut ctx)?;

    let mut effective = cfg.clone();
    if ctx.seed_used {
        effective.seed = Some(seed);
    }
    let config_text = toml::to_string(&effective).map_err(|e| CliError::Runtime(e.into()))?;
    let manifest = Manifest {
        tool: "qfc",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name.to_string(),
        seed: ctx.seed_used.then_some(seed),
        seed_source: ctx.seed_used.then_some(seed_source),
        config_sha256: sha256_hex(config_text.as_bytes()),
        config: config_text,
        inputs: std::mem::take(&mut ctx.inputs),
        outputs: Vec::new(),
    };
    let lines = std::mem::take(&mut ctx.stdout);
    ctx.out.finish(manifest)?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = config::one_line(&e.to_string());
            let err = CliError::Parse(text.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.line());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
