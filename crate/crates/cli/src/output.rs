//! CSV and manifest writers with byte-reproducible formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bdstap_core::{SweepResult, WeightMap};

use crate::config::{ConfigFile, MethodFailures, RunInfo};
use crate::CliError;

/// Fixed 12-significant-digit decimal formatting, so repeated runs emit
/// byte-identical files.
pub fn fmt_f64(x: f64) -> String {
    assert!(x.is_finite(), "CSV fields must be finite, got {x}");
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-9..12).contains(&exp) {
        return format!("{:.11e}", x);
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// One row per (abscissa, method):
/// `abscissa,method,mean_scnr_loss_db,std_db,trials,failures`.
pub fn sweep_csv(result: &SweepResult) -> Result<String, CliError> {
    let mut out = String::from("abscissa,method,mean_scnr_loss_db,std_db,trials,failures\n");
    for (ai, &abscissa) in result.abscissae.iter().enumerate() {
        for (mi, method) in result.methods.iter().enumerate() {
            let mean = result.mean_db[ai][mi];
            let std = result.std_db[ai][mi];
            if !mean.is_finite() || !std.is_finite() {
                return Err(CliError::Numerical(format!(
                    "method '{method}' produced no usable trials at abscissa {abscissa}"
                )));
            }
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(abscissa),
                method,
                fmt_f64(mean),
                fmt_f64(std),
                result.num_trials,
                result.failures[ai][mi],
            )
            .expect("string write");
        }
    }
    Ok(out)
}

/// N rows of M amplitude values with a beam-offset header; the target cell
/// is emitted as the sentinel `-1`.
pub fn weight_map_csv(map: &WeightMap) -> String {
    let mut out = String::from("doppler_offset");
    for m in 0..map.num_beams() {
        write!(out, ",{m}").expect("string write");
    }
    out.push('\n');
    for (k, row) in map.grid.iter().enumerate() {
        write!(out, "{k}").expect("string write");
        for (m, &value) in row.iter().enumerate() {
            if (k, m) == map.target_cell {
                out.push_str(",-1");
            } else {
                write!(out, ",{}", fmt_f64(value)).expect("string write");
            }
        }
        out.push('\n');
    }
    out
}

/// The run manifest: the fully resolved configuration plus deterministic run
/// metadata. Feeding the manifest back in as `--config` reproduces the run.
pub fn manifest_toml(
    resolved: &ConfigFile,
    command: &str,
    failures: Vec<MethodFailures>,
) -> String {
    let mut manifest = resolved.clone();
    manifest.run = Some(RunInfo {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        master_seed: resolved.sweep.master_seed,
        failures,
    });
    manifest.to_toml()
}

pub fn failure_totals(result: &SweepResult) -> Vec<MethodFailures> {
    result
        .methods
        .iter()
        .enumerate()
        .map(|(mi, name)| MethodFailures {
            method: name.clone(),
            count: result.failures.iter().map(|row| row[mi]).sum(),
        })
        .collect()
}
