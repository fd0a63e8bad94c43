//! Command execution: runs the computation a [`RunConfig`] describes and
//! writes the resulting table (plus a metadata sidecar where applicable).

use std::fs;
use std::path::PathBuf;

use wjc_core::boundstate::{default_tau_grid, generic_bound_profile, tail_decay_rate};
use wjc_core::correlation::g2_curve;
use wjc_core::export::{
    correlation_csv, correlation_json, envelope_csv, envelope_json, ep_csv, ep_json, profile_csv,
    profile_json, spectrum_csv, spectrum_json, tightness_csv, tightness_json,
    CorrelationMetadata, EnvelopeRecord, EpRecord, ProfileMetadata, TightnessRecord,
};
use wjc_core::nphoton::{envelope_general, envelope_resonant};
use wjc_core::sector::{build_sector, exceptional_point_kappa, sweep_spectrum};
use wjc_core::{C64, CoreError, SystemParams};

use crate::config::{parse_range, CommandKind, OutputFormat, RunConfig, MAX_GRID_POINTS};
use crate::fault::CliError;

pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let (body, meta) = match config.command {
        CommandKind::Spectrum => run_spectrum(config)?,
        CommandKind::Ep => run_ep(config)?,
        CommandKind::Boundstate => run_boundstate(config)?,
        CommandKind::G2 => run_g2(config)?,
        CommandKind::Nphoton => run_nphoton(config)?,
        CommandKind::SweepTightness => run_sweep_tightness(config)?,
    };
    write_output(config, &body, meta)
}

fn write_output(
    config: &RunConfig,
    body: &str,
    meta: Option<String>,
) -> Result<(), CliError> {
    match &config.output {
        None => {
            print!("{body}");
        }
        Some(path) => {
            fs::write(path, body)?;
            eprintln!("wrote {}", path.display());
            if let Some(meta) = meta {
                let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
                fs::write(&meta_path, meta)?;
                eprintln!("wrote {}", meta_path.display());
            }
        }
    }
    Ok(())
}

fn meta_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new("io-error", format!("metadata serialization: {e}")))
}

fn linspace(stop: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(stop.is_finite() && stop > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "grid span must be finite and positive, got {stop}"
        ))
        .into());
    }
    if points < 2 || points > MAX_GRID_POINTS {
        return Err(CoreError::InvalidArgument(format!(
            "grid needs between 2 and {MAX_GRID_POINTS} points, got {points}"
        ))
        .into());
    }
    Ok((0..points)
        .map(|i| stop * i as f64 / (points - 1) as f64)
        .collect())
}

fn run_spectrum(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let params = config.system_params()?;
    let n_list = config.n.clone().unwrap_or_else(|| vec![1]);
    let kappas = config.require_range("kappa-range")?;
    let omegas = config
        .omega_range
        .as_deref()
        .map(parse_range)
        .transpose()?;
    let total = n_list.len() * kappas.len() * omegas.as_ref().map_or(1, Vec::len);
    if total > MAX_GRID_POINTS {
        return Err(CoreError::ComplexityLimit(format!(
            "sweep has {total} points, cap is {MAX_GRID_POINTS}"
        ))
        .into());
    }
    eprintln!("spectrum: sweeping {total} grid points");
    let rows = sweep_spectrum(&params, &n_list, omegas.as_deref(), &kappas)?;
    let body = match config.format() {
        OutputFormat::Csv => spectrum_csv(&rows),
        OutputFormat::Json => spectrum_json(&rows)?,
    };
    Ok((body, None))
}

fn run_ep(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let params = config.system_params()?;
    let n_list = config.n.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let mut records = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let kappa_ep = exceptional_point_kappa(&params, n)?;
        let critical = SystemParams::new(params.omega, params.omega_atom, params.g, kappa_ep)?;
        let sector = build_sector(&critical, n)?;
        records.push(EpRecord {
            n,
            kappa_ep,
            re_e: sector.e_plus.re,
            im_e: sector.e_plus.im,
        });
    }
    let body = match config.format() {
        OutputFormat::Csv => ep_csv(&records),
        OutputFormat::Json => ep_json(&records)?,
    };
    Ok((body, None))
}

fn run_boundstate(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let params = config.system_params()?;
    let k1 = config.k1.unwrap_or(params.omega);
    let k2 = config.k2.unwrap_or(params.omega);
    let taus = match (config.tau_max, config.points) {
        (Some(tau_max), points) => linspace(tau_max, points.unwrap_or(512))?,
        (None, Some(points)) => {
            let default = default_tau_grid(&params);
            linspace(*default.last().expect("default grid is nonempty"), points)?
        }
        (None, None) => default_tau_grid(&params),
    };
    eprintln!("boundstate: {} separations", taus.len());
    let profile = generic_bound_profile(&params, k1, k2, &taus)?;
    let meta = ProfileMetadata {
        params,
        regime: profile.regime,
        tail_rate: tail_decay_rate(&profile).ok(),
    };
    let body = match config.format() {
        OutputFormat::Csv => profile_csv(&profile),
        OutputFormat::Json => profile_json(&profile)?,
    };
    Ok((body, Some(meta_json(&meta)?)))
}

fn run_g2(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let params = config.system_params()?;
    let tau_max = config.tau_max.unwrap_or(80.0);
    let points = config.points.unwrap_or(2048);
    if points > MAX_GRID_POINTS {
        return Err(CoreError::InvalidArgument(format!(
            "grid needs at most {MAX_GRID_POINTS} points, got {points}"
        ))
        .into());
    }
    eprintln!("g2: {points} delays up to tau = {tau_max}");
    let curve = g2_curve(&params, tau_max, points)?;
    let meta = CorrelationMetadata {
        params,
        asymptote: curve.asymptote,
        approach_rate: curve.approach_rate,
    };
    let body = match config.format() {
        OutputFormat::Csv => correlation_csv(&curve),
        OutputFormat::Json => correlation_json(&curve)?,
    };
    Ok((body, Some(meta_json(&meta)?)))
}

fn run_nphoton(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let params = config.system_params()?;
    let gap1 = config.require_range("gap1-range")?;
    let gap2 = config
        .gap2_range
        .as_deref()
        .map(parse_range)
        .transpose()?;
    let photons = if gap2.is_some() { 3 } else { 2 };
    if let Some(k_list) = &config.k {
        if k_list.len() != photons {
            return Err(CoreError::InvalidArgument(format!(
                "--k needs {photons} frequencies for this grid, got {}",
                k_list.len()
            ))
            .into());
        }
    }
    let total = gap1.len() * gap2.as_ref().map_or(1, Vec::len);
    if total > MAX_GRID_POINTS {
        return Err(CoreError::ComplexityLimit(format!(
            "envelope grid has {total} points, cap is {MAX_GRID_POINTS}"
        ))
        .into());
    }
    eprintln!("nphoton: {photons}-photon envelope over {total} grid points");

    let value_at = |coords: &[f64]| -> Result<C64, CoreError> {
        match &config.k {
            Some(k_list) => envelope_general(&params, k_list, coords).map(|e| e.value),
            None => envelope_resonant(&params, coords).map(|e| e.value),
        }
    };
    let mut records = Vec::with_capacity(total);
    match &gap2 {
        None => {
            for &d1 in &gap1 {
                let value = value_at(&[d1, 0.0])?;
                records.push(EnvelopeRecord::new(vec![d1], value));
            }
        }
        Some(gap2) => {
            for &d1 in &gap1 {
                for &d2 in gap2 {
                    let value = value_at(&[d1 + d2, d2, 0.0])?;
                    records.push(EnvelopeRecord::new(vec![d1, d2], value));
                }
            }
        }
    }
    let body = match config.format() {
        OutputFormat::Csv => envelope_csv(photons - 1, &records),
        OutputFormat::Json => envelope_json(&records)?,
    };
    Ok((body, None))
}

fn run_sweep_tightness(config: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let base = config.system_params()?;
    let kappas = config.require_range("kappa-range")?;
    let g = base.g;
    let taus: Vec<f64> = (0..4096)
        .map(|i| 300.0 / g * i as f64 / 4095.0)
        .collect();
    eprintln!("sweep-tightness: {} kappa points", kappas.len());
    let mut records = Vec::with_capacity(kappas.len());
    for &kappa in &kappas {
        let params = SystemParams::new(base.omega, base.omega_atom, g, kappa)?;
        let profile = generic_bound_profile(&params, params.omega, params.omega, &taus)?;
        let tail_rate = tail_decay_rate(&profile)?;
        let curve = g2_curve(&params, 300.0 / g, 32_768)?;
        records.push(TightnessRecord {
            kappa,
            tail_rate,
            approach_rate: curve.approach_rate,
            is_argmax_tail: false,
            is_argmax_approach: false,
        });
    }
    if let Some(best) = argmax(records.iter().map(|r| r.tail_rate)) {
        records[best].is_argmax_tail = true;
    }
    if let Some(best) = argmax(records.iter().map(|r| r.approach_rate)) {
        records[best].is_argmax_approach = true;
    }
    let body = match config.format() {
        OutputFormat::Csv => tightness_csv(&records),
        OutputFormat::Json => tightness_json(&records)?,
    };
    Ok((body, None))
}

fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
