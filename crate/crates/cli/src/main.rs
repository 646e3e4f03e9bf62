use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use optocool_core::model::Approx;
use optocool_core::modes::LambdaSystem;
use optocool_core::spectra::linspace;
use optocool_cli::config::{self, parse_number, ConfigError, OmegaRange, RawConfig, RunConfig};
use optocool_cli::{presets, sweep, CliError, Provenance};

/// Ground-state cooling of loop-coupled mechanical resonators.
#[derive(Parser, Debug)]
#[command(name = "optocool", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file (key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in parameter set; a config file, if given, overrides its keys.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rotating-wave optomechanical coupling.
    #[arg(long, global = true, conflicts_with = "om_full")]
    om_rwa: bool,
    /// Keep counter-rotating optomechanical terms (default).
    #[arg(long, global = true)]
    om_full: bool,
    /// Rotating-wave phonon hopping (default).
    #[arg(long, global = true, conflicts_with = "mech_full")]
    mech_rwa: bool,
    /// Keep counter-rotating phonon-hopping terms.
    #[arg(long, global = true)]
    mech_full: bool,
    /// Worker threads for sweeps and scans.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state phonon numbers (JSON).
    Cool,
    /// Parameter sweep over one or two axes (CSV).
    Sweep {
        /// File with a [sweep] section; defaults to the one in --config.
        #[arg(long)]
        sweep: Option<PathBuf>,
    },
    /// Transmittance and scattering-rate spectrum (CSV).
    Spectrum {
        /// `start,stop,points` in the same units as omega.
        #[arg(long, value_parser = parse_range_arg)]
        omega_range: Option<OmegaRange>,
    },
    /// Bright/dark, hybrid and normal-mode structure (JSON).
    Modes,
    /// Three-level Lambda-system eigenstates (JSON).
    Lambda {
        /// Hopping ratio eta = Omega_b / Omega_1.
        #[arg(long)]
        eta: f64,
        /// Phase; accepts multiples of pi such as `pi/2`.
        #[arg(long, value_parser = parse_number_arg, default_value = "0")]
        theta: f64,
        /// Evaluate on this many phases spanning [0, 2pi] instead of --theta.
        #[arg(long)]
        theta_points: Option<usize>,
        /// Two-photon detuning in units of Omega_1.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Ratio Omega_2 / Omega_1.
        #[arg(long, default_value_t = 1.0)]
        omega2: f64,
    },
    /// Analytic cooling limits next to the exact result (JSON).
    Limits,
    /// Drift-matrix eigenvalues and Hurwitz verdict (JSON).
    Stability,
}

fn parse_number_arg(s: &str) -> Result<f64, String> {
    parse_number(s)
}

fn parse_range_arg(s: &str) -> Result<OmegaRange, String> {
    config::parse_range(s)
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let base = common
        .preset
        .as_deref()
        .map(presets::by_name)
        .transpose()?;
    let mut cfg = match (&common.config, base) {
        (Some(path), base) => {
            let text = read(path)?;
            config::resolve(&RawConfig::parse(&text)?, base)?
        }
        (None, Some(b)) => b,
        (None, None) => {
            return Err(ConfigError::Missing {
                field: "--config".into(),
                message: "give --config <path> or --preset <name>".into(),
            }
            .into())
        }
    };
    if common.om_rwa {
        cfg.approx.optomechanical = Approx::Rwa;
    }
    if common.om_full {
        cfg.approx.optomechanical = Approx::Full;
    }
    if common.mech_rwa {
        cfg.approx.mechanical = Approx::Rwa;
    }
    if common.mech_full {
        cfg.approx.mechanical = Approx::Full;
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

const UNSTABLE: u8 = 3;

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let out = cli.common.out.as_deref();
    let code = match cli.command {
        Command::Cool => {
            let cfg = load(&cli.common)?;
            let r = optocool_cli::cool(&cfg)?;
            optocool_cli::emit(&optocool_cli::to_json(&r)?, out)?;
            if r.report.stable { 0 } else { UNSTABLE }
        }
        Command::Sweep { sweep: path } => {
            let cfg = load(&cli.common)?;
            let spec_sweep = match path {
                Some(p) => config::parse_sweep_file(&read(&p)?, &cfg.spec)?,
                None => cfg.sweep.clone().ok_or_else(|| ConfigError::Missing {
                    field: "sweep.axis1".into(),
                    message: "no [sweep] section in the config and no --sweep file".into(),
                })?,
            };
            let table = sweep::run_sweep(&cfg.spec, cfg.approx, &spec_sweep, cli.common.workers)?;
            let prov = Provenance::new("sweep", cfg.approx);
            optocool_cli::emit(&optocool_cli::render_csv(&prov, &cfg.spec, &table), out)?;
            0
        }
        Command::Spectrum { omega_range } => {
            let cfg = load(&cli.common)?;
            let range = omega_range.or(cfg.spectrum).unwrap_or(OmegaRange {
                start: 0.9 * cfg.spec.omega[0],
                stop: 1.1 * cfg.spec.omega[0],
                points: 801,
            });
            let run = || optocool_cli::spectrum(&cfg, range);
            let table = match cli.common.workers {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| CliError::Compute(format!("worker pool: {e}")))?
                    .install(run)?,
                None => run()?,
            };
            match table {
                Some(t) => {
                    let prov = Provenance::new("spectrum", cfg.approx);
                    optocool_cli::emit(&optocool_cli::render_csv(&prov, &cfg.spec, &t), out)?;
                    0
                }
                None => {
                    eprintln!("error: drift matrix is unstable; no spectrum written");
                    UNSTABLE
                }
            }
        }
        Command::Modes => {
            let cfg = load(&cli.common)?;
            optocool_cli::emit(&optocool_cli::to_json(&optocool_cli::modes_report(&cfg)?)?, out)?;
            0
        }
        Command::Lambda {
            eta,
            theta,
            theta_points,
            delta,
            omega2,
        } => {
            let base = LambdaSystem {
                delta,
                omega1: 1.0,
                omega2,
                omega_b: eta,
                theta,
            };
            let thetas = match theta_points {
                Some(n) if n >= 2 => linspace(0.0, TAU, n),
                Some(_) => {
                    return Err(ConfigError::Missing {
                        field: "--theta-points".into(),
                        message: "needs at least 2 points".into(),
                    }
                    .into())
                }
                None => vec![theta],
            };
            let pts = optocool_cli::lambda_points(&base, &thetas)?;
            let text = if theta_points.is_some() {
                optocool_cli::to_json(&pts)?
            } else {
                optocool_cli::to_json(&pts[0])?
            };
            optocool_cli::emit(&text, out)?;
            0
        }
        Command::Limits => {
            let cfg = load(&cli.common)?;
            let r = optocool_cli::limits_cmd(&cfg)?;
            optocool_cli::emit(&optocool_cli::to_json(&r)?, out)?;
            if r.exact.stable { 0 } else { UNSTABLE }
        }
        Command::Stability => {
            let cfg = load(&cli.common)?;
            let r = optocool_cli::stability(&cfg)?;
            optocool_cli::emit(&optocool_cli::to_json(&r)?, out)?;
            if r.stable { 0 } else { UNSTABLE }
        }
    };
    Ok(ExitCode::from(code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).context("optocool") {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<CliError>()
                .map(CliError::exit_code)
                .unwrap_or(1);
            ExitCode::from(code)
        }
    }
}
