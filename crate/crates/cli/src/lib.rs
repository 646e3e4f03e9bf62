//! Library side of the `optocool` command-line tool: configuration, presets,
//! sweeps and the report builders behind each subcommand.

pub mod config;
pub mod presets;
pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use optocool_core::limits::{self, LimitResult, LimitsError, LimitsReport};
use optocool_core::model::{
    build_drift, linearize, ClassicalSteadyState, CouplingApprox, Drive, ModelError, SystemSpec,
};
use optocool_core::modes::{self, BrightDarkModes, HybridModes, LambdaEigen, LambdaSystem,
    ModesError, NormalModeAnalysis};
use optocool_core::numkit::{self, NumError};
use optocool_core::spectra::{self, Cooperativities, SpectraError};
use optocool_core::steadystate::{solve_cooling, CoolingReport, SteadyError};
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, OmegaRange, RunConfig};
pub use sweep::{SweepSpec, Table};

pub const TOOL: &str = "optocool";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// How relative scattering rates are normalized in every output.
pub const NORMALIZER: &str = "analytic_resonant_tmax";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid system: {0}")]
    Spec(String),
    #[error("{0}")]
    Compute(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything the user can fix in the input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Spec(_) => 2,
            Self::Compute(_) | Self::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidSpec(m) => Self::Spec(m),
            other => Self::Compute(other.to_string()),
        }
    }
}

impl From<NumError> for CliError {
    fn from(e: NumError) -> Self {
        Self::Compute(e.to_string())
    }
}

impl From<SteadyError> for CliError {
    fn from(e: SteadyError) -> Self {
        Self::Compute(e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Model(m) => m.into(),
            SpectraError::DomainError(m) => Self::Spec(m),
            other => Self::Compute(other.to_string()),
        }
    }
}

impl From<LimitsError> for CliError {
    fn from(e: LimitsError) -> Self {
        match e {
            LimitsError::Model(m) => m.into(),
            LimitsError::DomainError(m) => Self::Spec(m),
        }
    }
}

impl From<ModesError> for CliError {
    fn from(e: ModesError) -> Self {
        match e {
            ModesError::DomainError(m) => Self::Spec(m),
            ModesError::Model(m) => m.into(),
            other => Self::Compute(other.to_string()),
        }
    }
}

/// Shortest round-trip text for a double; non-finite values as `nan`/`inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Linearized copy of `spec`, plus the classical solution when the drive was
/// physical.
pub fn prepare(
    spec: &SystemSpec,
) -> Result<(SystemSpec, Option<ClassicalSteadyState>), CliError> {
    match spec.drive {
        Drive::Linearized { .. } => Ok((spec.clone(), None)),
        Drive::Physical { .. } => {
            let cl = linearize(spec)?;
            Ok((cl.to_linearized_spec(spec)?, Some(cl)))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: u64,
    pub approx: CouplingApprox,
    pub normalizer: &'static str,
}

impl Provenance {
    pub fn new(command: &str, approx: CouplingApprox) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            timestamp,
            approx,
            normalizer: NORMALIZER,
        }
    }
}

/// CSV text: `#` metadata block (provenance, then the resolved configuration
/// in config grammar), a header row, then data rows.
pub fn render_csv(prov: &Provenance, spec: &SystemSpec, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {} {}\n", prov.tool, prov.version));
    out.push_str(&format!("# command = {}\n", prov.command));
    out.push_str(&format!("# timestamp = {}\n", prov.timestamp));
    out.push_str(&format!("# normalizer = {}\n", prov.normalizer));
    for line in config::render(spec, prov.approx).lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write `text` to `out`, or stdout when `out` is `None`. A partially
/// written file is removed on failure.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("writing to stdout", e))
        }
        Some(path) => fs::write(path, text).map_err(|e| {
            let _ = fs::remove_file(path);
            CliError::io(format!("writing {}", path.display()), e)
        }),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Compute(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Analytic limits as shown alongside single-point reports.
#[derive(Debug, Clone, Serialize)]
pub struct LimitsSummary {
    pub simplified: LimitResult,
    pub full: LimitResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoolOutput {
    pub provenance: Provenance,
    pub spec: SystemSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSteadyState>,
    #[serde(flatten)]
    pub report: CoolingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsSummary>,
}

pub fn cool(cfg: &RunConfig) -> Result<CoolOutput, CliError> {
    let (lin, classical) = prepare(&cfg.spec)?;
    let report = solve_cooling(&build_drift(&lin, cfg.approx)?)?;
    let limits = if lin.n_mech == 2 {
        let r = limits::limits_report(&lin)?;
        Some(LimitsSummary {
            simplified: r.simplified,
            full: r.full,
        })
    } else {
        None
    };
    Ok(CoolOutput {
        provenance: Provenance::new("cool", cfg.approx),
        spec: cfg.spec.clone(),
        classical,
        report,
        limits,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityOutput {
    pub provenance: Provenance,
    pub spec: SystemSpec,
    pub stable: bool,
    pub spectral_abscissa: f64,
    pub converged: bool,
    pub eigenvalues: Vec<C64>,
}

pub fn stability(cfg: &RunConfig) -> Result<StabilityOutput, CliError> {
    let (lin, _) = prepare(&cfg.spec)?;
    let drift = build_drift(&lin, cfg.approx)?;
    let eig = numkit::eigenvalues(&drift.a)?;
    let abscissa = eig.spectral_abscissa();
    let mut values = eig.values.clone();
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(StabilityOutput {
        provenance: Provenance::new("stability", cfg.approx),
        spec: cfg.spec.clone(),
        stable: eig.converged && abscissa < optocool_core::steadystate::STABILITY_MARGIN,
        spectral_abscissa: abscissa,
        converged: eig.converged,
        eigenvalues: values,
    })
}

/// Transmittance scan; `None` for the stability verdict means the drift is
/// unstable and no table was produced.
pub fn spectrum(cfg: &RunConfig, range: OmegaRange) -> Result<Option<Table>, CliError> {
    let (lin, _) = prepare(&cfg.spec)?;
    let drift = build_drift(&lin, cfg.approx)?;
    if !solve_cooling(&drift)?.stable {
        return Ok(None);
    }
    let n = lin.n_mech;
    let labels: Vec<String> = std::iter::once("a".to_string())
        .chain((1..=n).map(|j| format!("b{j}")))
        .collect();
    let coop = if n == 2 {
        Cooperativities::from_spec(&lin)
            .ok()
            .filter(|c| c.c1 * c.c2 > 0.0)
    } else {
        None
    };
    let analytic = match &coop {
        Some(c) => Some(spectra::lambda_analytic(c, lin.theta[0])?),
        None => None,
    };

    let mut columns = vec!["omega".to_string()];
    for v in &labels {
        for w in &labels {
            columns.push(format!("T_{v}_{w}"));
        }
    }
    if coop.is_some() {
        columns.extend(["lambda_b2b1", "lambda_b1b2", "lambda_analytic"].map(String::from));
    }

    let omegas = spectra::linspace(range.start, range.stop, range.points);
    let points = spectra::scan(&drift, &omegas, coop.as_ref())?;
    let rows = points
        .iter()
        .map(|p| {
            let mut row = vec![fmt_f64(p.omega)];
            row.extend(p.t.iter().flatten().map(|&x| fmt_f64(x)));
            if let Some(a) = analytic {
                row.push(fmt_f64(p.lambda_rel[1][0]));
                row.push(fmt_f64(p.lambda_rel[0][1]));
                row.push(fmt_f64(a));
            }
            row
        })
        .collect();
    Ok(Some(Table { columns, rows }))
}

#[derive(Debug, Clone, Serialize)]
pub struct ModesOutput {
    pub provenance: Provenance,
    pub spec: SystemSpec,
    pub normal_modes: NormalModeAnalysis,
    pub darkness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bright_dark: Option<BrightDarkModes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridModes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow_area: Option<bool>,
}

pub fn modes_report(cfg: &RunConfig) -> Result<ModesOutput, CliError> {
    let (lin, _) = prepare(&cfg.spec)?;
    let two = lin.n_mech == 2;
    let g_nonzero = lin.linearized()?.1.iter().any(|&g| g != 0.0);
    Ok(ModesOutput {
        provenance: Provenance::new("modes", cfg.approx),
        spec: cfg.spec.clone(),
        normal_modes: modes::normal_modes(&lin)?,
        darkness: modes::darkness(&lin)?,
        bright_dark: if two && lin.eta[0] == 0.0 && g_nonzero {
            Some(modes::bright_dark(&lin)?)
        } else {
            None
        },
        hybrid: if two && lin.eta[0] > 0.0 {
            Some(modes::hybrid_transform(&lin)?)
        } else {
            None
        },
        shadow_area: if two {
            Some(modes::in_shadow_area(&lin)?)
        } else {
            None
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsOutput {
    pub provenance: Provenance,
    pub spec: SystemSpec,
    #[serde(flatten)]
    pub report: LimitsReport,
    /// `n_l` from the closed form evaluated at `Δ = ω_l`.
    pub cooling_limit: [f64; 2],
    pub exact: CoolingReport,
}

pub fn limits_cmd(cfg: &RunConfig) -> Result<LimitsOutput, CliError> {
    let (lin, _) = prepare(&cfg.spec)?;
    let report = limits::limits_report(&lin)?;
    let mut cooling_limit = [0.0; 2];
    for (l, slot) in cooling_limit.iter_mut().enumerate() {
        let at = limits::at_optimal_detuning(&lin, l)?;
        let r = limits::limits_report(&at)?.simplified;
        *slot = if l == 0 { r.n1 } else { r.n2 };
    }
    let exact = solve_cooling(&build_drift(&lin, cfg.approx)?)?;
    Ok(LimitsOutput {
        provenance: Provenance::new("limits", cfg.approx),
        spec: cfg.spec.clone(),
        report,
        cooling_limit,
        exact,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaPoint {
    pub eta: f64,
    pub theta: f64,
    #[serde(flatten)]
    pub eigen: LambdaEigen,
}

/// Lambda-system eigenstates at one phase or over `thetas`.
pub fn lambda_points(base: &LambdaSystem, thetas: &[f64]) -> Result<Vec<LambdaPoint>, CliError> {
    thetas
        .iter()
        .map(|&theta| {
            let sys = LambdaSystem { theta, ..*base };
            Ok(LambdaPoint {
                eta: sys.eta_ratio(),
                theta,
                eigen: modes::lambda_eigensystem(&sys)?,
            })
        })
        .collect()
}
