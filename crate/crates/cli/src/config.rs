//! Run configuration: schema, defaults, config-file merging, grid parsing.
//!
//! A run is described by one [`RunConfig`], assembled from an optional JSON
//! config file and the command-line flags, with flags taking precedence
//! field by field. `--dump-config` emits the merged result, and feeding
//! that JSON back through `--config` reproduces the run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wjc_core::{CoreError, Result, SystemParams};

/// Config file schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on the total number of grid points any command accepts.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    Ep,
    Boundstate,
    G2,
    Nphoton,
    SweepTightness,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Ep => "ep",
            CommandKind::Boundstate => "boundstate",
            CommandKind::G2 => "g2",
            CommandKind::Nphoton => "nphoton",
            CommandKind::SweepTightness => "sweep-tightness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// System parameters as given, before defaults are applied.
///
/// `Omega` (capital O) is the atomic transition frequency and `omega` the
/// waveguide/cavity frequency; they differ only by case on the command
/// line, mirroring the conventional symbols.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParamSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(rename = "Omega", skip_serializing_if = "Option::is_none")]
    pub omega_atom: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    pub command: CommandKind,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap1_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap2_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            command,
            params: ParamSpec::default(),
            n: None,
            omega_range: None,
            kappa_range: None,
            tau_max: None,
            points: None,
            k1: None,
            k2: None,
            k: None,
            gap1_range: None,
            gap2_range: None,
            output: None,
            format: None,
        }
    }

    /// Fills every unset field from `file`, keeping values already present
    /// (command-line flags win over the config file).
    pub fn merge_file(mut self, file: RunConfig) -> Self {
        fn fill<T>(slot: &mut Option<T>, from: Option<T>) {
            if slot.is_none() {
                *slot = from;
            }
        }
        fill(&mut self.params.omega, file.params.omega);
        fill(&mut self.params.omega_atom, file.params.omega_atom);
        fill(&mut self.params.g, file.params.g);
        fill(&mut self.params.kappa, file.params.kappa);
        fill(&mut self.n, file.n);
        fill(&mut self.omega_range, file.omega_range);
        fill(&mut self.kappa_range, file.kappa_range);
        fill(&mut self.tau_max, file.tau_max);
        fill(&mut self.points, file.points);
        fill(&mut self.k1, file.k1);
        fill(&mut self.k2, file.k2);
        fill(&mut self.k, file.k);
        fill(&mut self.gap1_range, file.gap1_range);
        fill(&mut self.gap2_range, file.gap2_range);
        fill(&mut self.output, file.output);
        fill(&mut self.format, file.format);
        self
    }

    /// Resolved system parameters: `Omega` defaults to 1, `omega` to
    /// `Omega` (resonance), `g` to 0.1, and `kappa` to the critical `4g`.
    pub fn system_params(&self) -> Result<SystemParams> {
        let omega_atom = self.params.omega_atom.unwrap_or(1.0);
        let omega = self.params.omega.unwrap_or(omega_atom);
        let g = self.params.g.unwrap_or(0.1);
        let kappa = self.params.kappa.unwrap_or(4.0 * g);
        SystemParams::new(omega, omega_atom, g, kappa)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Csv)
    }

    pub fn require_range(&self, field: &str) -> Result<Vec<f64>> {
        let spec = match field {
            "kappa-range" => &self.kappa_range,
            "gap1-range" => &self.gap1_range,
            other => {
                return Err(CoreError::InvalidArgument(format!(
                    "unknown range field {other}"
                )))
            }
        };
        match spec {
            Some(spec) => parse_range(spec),
            None => Err(CoreError::InvalidArgument(format!(
                "{} requires --{field} start:stop:step",
                self.command.name()
            ))),
        }
    }
}

/// Reads a grid specification `start:stop:step` into an ascending vector,
/// inclusive of `stop` up to rounding slack of one part in 10^9 of a step.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CoreError::InvalidArgument(format!(
            "range must be start:stop:step, got {spec:?}"
        )));
    }
    let mut values = [0.0f64; 3];
    for (slot, text) in values.iter_mut().zip(&parts) {
        *slot = text.trim().parse().map_err(|_| {
            CoreError::InvalidArgument(format!("range component {text:?} is not a number"))
        })?;
    }
    let [start, stop, step] = values;
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() || step <= 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "range {spec:?} needs finite bounds and a positive step"
        )));
    }
    if stop < start {
        return Err(CoreError::InvalidArgument(format!(
            "range {spec:?} has stop below start"
        )));
    }
    let count = ((stop - start) / step * (1.0 + 1e-9)).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(CoreError::ComplexityLimit(format!(
            "range {spec:?} has {count} points, cap is {MAX_GRID_POINTS}"
        )));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}
