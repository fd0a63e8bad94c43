//! wjc: few-photon transport calculator for a cavity-atom system coupled
//! to a waveguide.
//!
//! Subcommands emit data tables (CSV or JSON) for eigenvalue sweeps,
//! exceptional points, bound-state profiles, photon correlations, and
//! N-photon envelopes. `--Omega` (capital O) is the atomic transition
//! frequency and `--omega` the cavity frequency; the two symbols differ
//! only by case. Errors leave as one JSON object on stderr with a
//! machine-readable code; `WJC_THREADS` caps the worker thread count.

mod commands;
mod config;
mod fault;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, OutputFormat, RunConfig, SCHEMA_VERSION};
use fault::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "wjc",
    version,
    about = "Few-photon transport for a waveguide-coupled cavity-atom system"
)]
struct Cli {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the merged configuration as JSON and exit without computing.
    #[arg(long, global = true)]
    dump_config: bool,

    /// Output file (stdout when omitted); profile and correlation runs
    /// also write a `<PATH>.meta.json` sidecar.
    #[arg(long, short = 'o', global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Option<CommandArgs>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// System parameters shared by every subcommand.
#[derive(Args, Debug, Default)]
struct ParamArgs {
    /// Waveguide/cavity frequency (defaults to the atomic Omega).
    #[arg(long)]
    omega: Option<f64>,

    /// Atomic transition frequency (capital O; defaults to 1).
    #[arg(long = "Omega", value_name = "FREQ")]
    omega_atom: Option<f64>,

    /// Cavity-atom coupling (defaults to 0.1).
    #[arg(long)]
    g: Option<f64>,

    /// Cavity-waveguide decay rate (defaults to the critical 4g).
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Sweep the sector eigenvalue pairs over a kappa (and optionally
    /// omega) grid.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        /// Excitation sectors, comma-separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
        /// kappa grid.
        #[arg(long, value_name = "START:STOP:STEP")]
        kappa_range: Option<String>,
        /// Optional omega grid, swept in product with the kappa grid.
        #[arg(long, value_name = "START:STOP:STEP")]
        omega_range: Option<String>,
    },
    /// Critical coupling and coalesced eigenvalue for each sector.
    Ep {
        #[command(flatten)]
        params: ParamArgs,
        /// Excitation sectors, comma-separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
    },
    /// Two-photon bound-state separation profile.
    Boundstate {
        #[command(flatten)]
        params: ParamArgs,
        /// First incoming frequency (defaults to omega).
        #[arg(long)]
        k1: Option<f64>,
        /// Second incoming frequency (defaults to omega).
        #[arg(long)]
        k2: Option<f64>,
        /// Largest separation on the grid.
        #[arg(long)]
        tau_max: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Second-order correlation of the transmitted field.
    G2 {
        #[command(flatten)]
        params: ParamArgs,
        /// Largest delay on the grid.
        #[arg(long)]
        tau_max: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// N-photon bound-state envelope over neighbor-gap grids.
    Nphoton {
        #[command(flatten)]
        params: ParamArgs,
        /// First neighbor-gap grid.
        #[arg(long, value_name = "START:STOP:STEP")]
        gap1_range: Option<String>,
        /// Second neighbor-gap grid; selects the three-photon envelope.
        #[arg(long, value_name = "START:STOP:STEP")]
        gap2_range: Option<String>,
        /// Incoming frequencies, comma-separated; the resonant product
        /// form is used when omitted.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<f64>>,
    },
    /// Fitted bound-state and correlation decay rates over a kappa grid,
    /// with the argmax rows flagged.
    SweepTightness {
        #[command(flatten)]
        params: ParamArgs,
        /// kappa grid.
        #[arg(long, value_name = "START:STOP:STEP")]
        kappa_range: Option<String>,
    },
}

impl CommandArgs {
    fn into_config(self) -> RunConfig {
        fn base(kind: CommandKind, params: ParamArgs) -> RunConfig {
            let mut config = RunConfig::new(kind);
            config.params.omega = params.omega;
            config.params.omega_atom = params.omega_atom;
            config.params.g = params.g;
            config.params.kappa = params.kappa;
            config
        }
        match self {
            CommandArgs::Spectrum {
                params,
                n,
                kappa_range,
                omega_range,
            } => {
                let mut config = base(CommandKind::Spectrum, params);
                config.n = n;
                config.kappa_range = kappa_range;
                config.omega_range = omega_range;
                config
            }
            CommandArgs::Ep { params, n } => {
                let mut config = base(CommandKind::Ep, params);
                config.n = n;
                config
            }
            CommandArgs::Boundstate {
                params,
                k1,
                k2,
                tau_max,
                points,
            } => {
                let mut config = base(CommandKind::Boundstate, params);
                config.k1 = k1;
                config.k2 = k2;
                config.tau_max = tau_max;
                config.points = points;
                config
            }
            CommandArgs::G2 {
                params,
                tau_max,
                points,
            } => {
                let mut config = base(CommandKind::G2, params);
                config.tau_max = tau_max;
                config.points = points;
                config
            }
            CommandArgs::Nphoton {
                params,
                gap1_range,
                gap2_range,
                k,
            } => {
                let mut config = base(CommandKind::Nphoton, params);
                config.gap1_range = gap1_range;
                config.gap2_range = gap2_range;
                config.k = k;
                config
            }
            CommandArgs::SweepTightness {
                params,
                kappa_range,
            } => {
                let mut config = base(CommandKind::SweepTightness, params);
                config.kappa_range = kappa_range;
                config
            }
        }
    }
}

fn load_config_file(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::new(
            "config-error",
            format!("config file {}: {e}", path.display()),
        )
    })?;
    if config.schema != SCHEMA_VERSION {
        return Err(CliError::new(
            "config-error",
            format!(
                "config file {} has schema {}, this build reads schema {SCHEMA_VERSION}",
                path.display(),
                config.schema
            ),
        ));
    }
    Ok(config)
}

/// Merges command-line flags over the optional config file into the final
/// run configuration.
fn assemble(cli: Cli) -> Result<(RunConfig, bool), CliError> {
    let dump = cli.dump_config;
    let from_flags = cli.command.map(CommandArgs::into_config);
    let from_file = cli.config.as_ref().map(load_config_file).transpose()?;
    let mut merged = match (from_flags, from_file) {
        (Some(flags), Some(file)) => flags.merge_file(file),
        (Some(flags), None) => flags,
        (None, Some(file)) => file,
        (None, None) => {
            return Err(CliError::new(
                "usage-error",
                "no command given; pass a subcommand or --config FILE (see --help)",
            ))
        }
    };
    if let Some(output) = cli.output {
        merged.output = Some(output);
    }
    if let Some(format) = cli.format {
        merged.format = Some(format.into());
    }
    Ok((merged, dump))
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("WJC_THREADS") {
        Ok(value) => {
            let threads: usize = value.trim().parse().map_err(|_| {
                CliError::new(
                    "invalid-argument",
                    format!("WJC_THREADS must be a non-negative integer, got {value:?}"),
                )
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::new("invalid-argument", format!("thread pool: {e}")))?;
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::new(
            "invalid-argument",
            format!("WJC_THREADS: {e}"),
        )),
    }
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.exit()
        }
        Err(e) => return Err(CliError::new("usage-error", e.render().to_string())),
    };
    configure_threads()?;
    let (config, dump) = assemble(cli)?;
    if dump {
        let text = serde_json::to_string_pretty(&config)
            .map_err(|e| CliError::new("config-error", e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    commands::execute(&config)
}

fn main() {
    if let Err(err) = run() {
        let payload = serde_json::json!({ "error": err.code, "message": err.message });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
