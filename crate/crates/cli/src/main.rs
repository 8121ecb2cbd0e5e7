//! Command-line front end: reads a scenario/experiment configuration, runs
//! sweeps or single designs, and writes CSV outputs plus a run manifest.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure.

mod config;
mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use bdstap_core::numerics::eig_hermitian;
use bdstap_core::{
    build_clairvoyant_covariance, clutter_ridge_slope, export_weight_map, generate_snapshots,
    run_doppler_sweep, run_snapshot_sweep, scbds_design, BeamDopplerBasis, SweepResult,
};

use config::{ConfigFile, SweepKind};
use output::{failure_totals, fmt_f64, manifest_toml, sweep_csv, weight_map_csv, write_file};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    fn config(e: impl ToString) -> Self {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

fn core_err(e: bdstap_core::Error) -> CliError {
    use bdstap_core::Error::*;
    match e {
        InvalidArgument(_) | DimensionMismatch(_) | NotHermitian(_) => {
            CliError::Config(e.to_string())
        }
        Singular(_) | SolverFailure(_) => CliError::Numerical(e.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "bdstap", version, about = "Beam-Doppler STAP simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the scenario: geometry, clutter rank and eigenspectrum
    ScenarioReport {
        /// Configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo SCNR-loss sweep and write CSV plus manifest
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep the training snapshot count or the target Doppler frequency
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured trial count
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Design the sparse beam-Doppler filter once and export its weight map
    WeightMap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured master seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ScenarioReport { config, out } => {
            let resolved = load_config(&config)?.resolve(None, None)?;
            prepare_out_dir(&out)?;
            cmd_scenario_report(&resolved, &out)
        }
        Command::Sweep {
            config,
            kind,
            out,
            seed,
            trials,
        } => {
            let resolved = load_config(&config)?.resolve(seed, trials)?;
            prepare_out_dir(&out)?;
            cmd_sweep(&resolved, kind, &out)
        }
        Command::WeightMap { config, out, seed } => {
            let resolved = load_config(&config)?.resolve(seed, None)?;
            prepare_out_dir(&out)?;
            cmd_weight_map(&resolved, &out)
        }
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    ConfigFile::parse(&text)
}

fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))
}

fn cmd_scenario_report(resolved: &ConfigFile, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let radar = resolved.radar_config()?;
    let cov = build_clairvoyant_covariance(&radar, resolved.scenario.num_clutter_patches)
        .map_err(core_err)?;
    let (eigenvalues, _) = eig_hermitian(cov.matrix()).map_err(core_err)?;

    let nm = radar.dof() as f64;
    let noise = radar.noise_power;
    let rank = eigenvalues.iter().filter(|&&v| v > 10.0 * noise).count();
    let trace: f64 = eigenvalues.iter().sum();
    let clutter_power = trace - nm * noise;
    let realized_cnr_db = if clutter_power > 0.0 {
        fmt_f64(10.0 * (clutter_power / (nm * noise)).log10())
    } else {
        "-inf".to_string()
    };

    let mut report = String::new();
    report.push_str("scenario report\n");
    report.push_str("===============\n");
    report.push_str(&format!("elements_m: {}\n", radar.num_elements));
    report.push_str(&format!("pulses_n: {}\n", radar.num_pulses));
    report.push_str(&format!("wavelength_m: {}\n", fmt_f64(radar.wavelength())));
    report.push_str(&format!(
        "element_spacing_m: {}\n",
        fmt_f64(radar.element_spacing_m)
    ));
    report.push_str(&format!(
        "ridge_slope_beta: {}\n",
        fmt_f64(clutter_ridge_slope(&radar))
    ));
    report.push_str(&format!("noise_power: {}\n", fmt_f64(noise)));
    report.push_str(&format!(
        "cnr_configured_db: {}\n",
        if radar.cnr_db.is_finite() {
            fmt_f64(radar.cnr_db)
        } else {
            "-inf".to_string()
        }
    ));
    report.push_str(&format!("cnr_realized_db: {realized_cnr_db}\n"));
    report.push_str(&format!("clutter_rank_estimate: {rank}\n"));
    report.push_str(&format!(
        "clutter_patches: {}\n",
        resolved.scenario.num_clutter_patches
    ));
    report.push_str("eigenvalue_spectrum: eigenspectrum.csv\n");
    write_file(&out.join("scenario_report.txt"), &report)?;

    let mut spectrum = String::from("index,eigenvalue\n");
    for (i, v) in eigenvalues.iter().enumerate() {
        spectrum.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    write_file(&out.join("eigenspectrum.csv"), &spectrum)?;

    println!(
        "scenario report written to {} in {:.2?} (clutter rank {rank})",
        out.display(),
        started.elapsed()
    );
    Ok(())
}

fn cmd_sweep(resolved: &ConfigFile, kind: SweepKind, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let spec = resolved.experiment(kind)?;
    let result: SweepResult = match kind {
        SweepKind::Snapshots => run_snapshot_sweep(&spec).map_err(core_err)?,
        SweepKind::Doppler => run_doppler_sweep(&spec).map_err(core_err)?,
    };

    let csv_name = format!("sweep_{}.csv", kind.as_str());
    write_file(&out.join(&csv_name), &sweep_csv(&result)?)?;

    let command = format!("sweep --kind {}", kind.as_str());
    write_file(
        &out.join("manifest.toml"),
        &manifest_toml(resolved, &command, failure_totals(&result)),
    )?;

    println!(
        "sweep ({}) finished in {:.2?}: {} abscissae x {} methods x {} trials -> {}",
        kind.as_str(),
        started.elapsed(),
        result.abscissae.len(),
        result.methods.len(),
        result.num_trials,
        out.join(csv_name).display(),
    );
    Ok(())
}

fn cmd_weight_map(resolved: &ConfigFile, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let (solver_cfg, snapshots) = resolved.scbds_config().ok_or_else(|| {
        CliError::Config("weight-map requires an [algorithms.scbds] section".to_string())
    })?;

    let radar = resolved.radar_config()?;
    let cov = build_clairvoyant_covariance(&radar, resolved.scenario.num_clutter_patches)
        .map_err(core_err)?;
    let basis = BeamDopplerBasis::build(resolved.target.fs, resolved.target.fd, &radar);
    let batch = generate_snapshots(&cov, snapshots, resolved.sweep.master_seed);
    let (weights, diagnostics) =
        scbds_design(&batch.data, &basis, &solver_cfg, radar.noise_power).map_err(core_err)?;
    let map = export_weight_map(&weights, &basis).map_err(core_err)?;

    write_file(&out.join("weight_map.csv"), &weight_map_csv(&map))?;
    write_file(
        &out.join("manifest.toml"),
        &manifest_toml(resolved, "weight-map", Vec::new()),
    )?;

    println!(
        "weight map written to {} in {:.2?} ({} iterations, {} active cells)",
        out.join("weight_map.csv").display(),
        started.elapsed(),
        diagnostics.iterations_used,
        weights.support.len(),
    );
    Ok(())
}
