//! Flat `key = value` configuration with `[section]` grouping.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use optocool_core::model::{Approx, CouplingApprox, Drive, SystemSpec};
use thiserror::Error;

use crate::presets;
use crate::sweep::{Axis, Observable, ParamPath, SweepSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Missing { field: String, message: String },
    #[error("unknown preset `{0}` (known: {known})", known = presets::NAMES.join(", "))]
    UnknownPreset(String),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// Frequency grid for spectrum scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Everything a run needs, after preset and file have been merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SystemSpec,
    pub approx: CouplingApprox,
    pub sweep: Option<SweepSpec>,
    pub spectrum: Option<OmegaRange>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw `section.key → value` map; keys outside any section live under `""`.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["preset"]),
    (
        "system",
        &["n_mech", "omega", "kappa", "gamma", "nbar", "eta", "theta"],
    ),
    (
        "drive",
        &["mode", "delta", "g", "delta_c", "omega_drive", "g_single"],
    ),
    ("approx", &["optomechanical", "mechanical"]),
    ("sweep", &["axis1", "axis2", "outputs"]),
    ("spectrum", &["range"]),
];

const NUMERIC: &[&str] = &[
    "system.n_mech",
    "system.omega",
    "system.kappa",
    "system.gamma",
    "system.nbar",
    "system.eta",
    "system.theta",
    "drive.delta",
    "drive.g",
    "drive.delta_c",
    "drive.omega_drive",
    "drive.g_single",
];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim().to_ascii_lowercase();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Syntax {
                        line,
                        message: format!("unknown section `[{name}]`"),
                    });
                }
                section = name;
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            let field = qualified(&section, &key);
            let allowed = KNOWN
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, keys)| keys.contains(&key.as_str()))
                .unwrap_or(false);
            if !allowed {
                return Err(ConfigError::Field {
                    line,
                    field,
                    message: "unknown key".into(),
                });
            }
            if entries.contains_key(&field) {
                return Err(ConfigError::Field {
                    line,
                    field,
                    message: "duplicate key".into(),
                });
            }
            entries.insert(
                field,
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries })
    }

    /// Report the first malformed numeric value in file order.
    fn check_numbers(&self) -> Result<(), ConfigError> {
        let mut numeric: Vec<(&String, &Entry)> = self
            .entries
            .iter()
            .filter(|(k, _)| NUMERIC.contains(&k.as_str()))
            .collect();
        numeric.sort_by_key(|(_, e)| e.line);
        for (field, e) in numeric {
            parse_list(&e.value).map_err(|m| field_err(e, field, m))?;
        }
        Ok(())
    }

    fn get(&self, field: &str) -> Option<&Entry> {
        self.entries.get(field)
    }

    pub fn preset(&self) -> Option<&str> {
        self.get("preset").map(|e| e.value.as_str())
    }

    fn number(&self, field: &str) -> Result<Option<f64>, ConfigError> {
        self.get(field)
            .map(|e| parse_number(&e.value).map_err(|m| field_err(e, field, m)))
            .transpose()
    }

    fn list(&self, field: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(field)
            .map(|e| parse_list(&e.value).map_err(|m| field_err(e, field, m)))
            .transpose()
    }

    fn word(&self, field: &str) -> Option<(String, &Entry)> {
        self.get(field)
            .map(|e| (e.value.trim().to_ascii_lowercase(), e))
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn field_err(e: &Entry, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        line: e.line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn missing(field: &str) -> ConfigError {
    ConfigError::Missing {
        field: field.to_string(),
        message: "required but not set (and no preset supplies it)".into(),
    }
}

/// A real number, optionally written as a multiple of `pi`:
/// `0.5`, `1e-5`, `pi`, `-pi/2`, `3pi/2`, `1.5*pi`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if t.is_empty() {
        return Err("empty value".into());
    }
    let bad = || format!("expected a number, got `{}`", s.trim());
    let v = match t.find("pi") {
        None => t.parse::<f64>().map_err(|_| bad())?,
        Some(at) => {
            let pre = t[..at].trim().trim_end_matches('*').trim();
            let post = t[at + 2..].trim();
            let coef = match pre {
                "" | "+" => 1.0,
                "-" => -1.0,
                p => p.parse::<f64>().map_err(|_| bad())?,
            };
            let den = match post {
                "" => 1.0,
                p => p
                    .strip_prefix('/')
                    .and_then(|d| d.trim().parse::<f64>().ok())
                    .ok_or_else(bad)?,
            };
            coef * PI / den
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("value `{}` is not finite", s.trim()))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

fn parse_approx(e: &Entry, field: &str, v: &str) -> Result<Approx, ConfigError> {
    match v {
        "full" => Ok(Approx::Full),
        "rwa" => Ok(Approx::Rwa),
        _ => Err(field_err(e, field, format!("expected `full` or `rwa`, got `{v}`"))),
    }
}

/// Stretches a scalar to `len` entries; lists must already have that length.
fn broadcast(
    raw: &RawConfig,
    field: &str,
    vals: Vec<f64>,
    len: usize,
) -> Result<Vec<f64>, ConfigError> {
    match vals.len() {
        1 => Ok(vec![vals[0]; len]),
        n if n == len => Ok(vals),
        n => {
            let e = raw.get(field).expect("value came from this field");
            Err(field_err(
                e,
                field,
                format!("expected 1 or {len} values, got {n}"),
            ))
        }
    }
}

/// Merge `raw` over `base` (a preset or nothing) into a validated run config.
pub fn resolve(raw: &RawConfig, base: Option<RunConfig>) -> Result<RunConfig, ConfigError> {
    raw.check_numbers()?;
    let base = match (raw.preset(), base) {
        (Some(name), None) => Some(presets::by_name(name)?),
        (_, b) => b,
    };

    let n_mech = match raw.number("system.n_mech")? {
        Some(v) => {
            let e = raw.get("system.n_mech").expect("present");
            if v < 1.0 || v.fract() != 0.0 || v > 64.0 {
                return Err(field_err(e, "system.n_mech", "expected an integer in 1..=64"));
            }
            v as usize
        }
        None => base.as_ref().map(|b| b.spec.n_mech).ok_or_else(|| missing("system.n_mech"))?,
    };
    let bonds = n_mech.saturating_sub(1);
    let reuse_base = base.as_ref().filter(|b| b.spec.n_mech == n_mech);

    let per_mode = |field: &str, len: usize, from_base: Option<Vec<f64>>, default: Option<f64>| {
        match raw.list(field)? {
            Some(v) => broadcast(raw, field, v, len),
            None => from_base
                .or_else(|| default.map(|d| vec![d; len]))
                .ok_or_else(|| missing(field)),
        }
    };

    let omega = per_mode(
        "system.omega",
        n_mech,
        reuse_base.map(|b| b.spec.omega.clone()),
        None,
    )?;
    let gamma = per_mode(
        "system.gamma",
        n_mech,
        reuse_base.map(|b| b.spec.gamma.clone()),
        None,
    )?;
    let nbar = per_mode(
        "system.nbar",
        n_mech,
        reuse_base.map(|b| b.spec.nbar.clone()),
        None,
    )?;
    let eta = per_mode(
        "system.eta",
        bonds,
        reuse_base.map(|b| b.spec.eta.clone()),
        Some(0.0),
    )?;
    let theta = per_mode(
        "system.theta",
        bonds,
        reuse_base.map(|b| b.spec.theta.clone()),
        Some(0.0),
    )?;
    let kappa = match raw.number("system.kappa")? {
        Some(v) => v,
        None => base
            .as_ref()
            .map(|b| b.spec.kappa)
            .ok_or_else(|| missing("system.kappa"))?,
    };

    let drive = resolve_drive(raw, n_mech, base.as_ref().map(|b| &b.spec.drive))?;

    let spec = SystemSpec {
        n_mech,
        omega,
        kappa,
        gamma,
        nbar,
        eta,
        theta,
        drive,
    }
    .validated()
    .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let mut approx = base.as_ref().map(|b| b.approx).unwrap_or_default();
    if let Some((v, e)) = raw.word("approx.optomechanical") {
        approx.optomechanical = parse_approx(e, "approx.optomechanical", &v)?;
    }
    if let Some((v, e)) = raw.word("approx.mechanical") {
        approx.mechanical = parse_approx(e, "approx.mechanical", &v)?;
    }

    let sweep = match raw.get("sweep.axis1") {
        Some(_) => Some(parse_sweep(raw, &spec)?),
        None => {
            if let Some(e) = raw.get("sweep.axis2").or_else(|| raw.get("sweep.outputs")) {
                return Err(field_err(e, "sweep.axis1", "a sweep needs `axis1`"));
            }
            base.as_ref().and_then(|b| b.sweep.clone())
        }
    };

    let spectrum = match raw.get("spectrum.range") {
        Some(e) => Some(
            parse_range(&e.value).map_err(|m| field_err(e, "spectrum.range", m))?,
        ),
        None => base.as_ref().and_then(|b| b.spectrum),
    };

    Ok(RunConfig {
        spec,
        approx,
        sweep,
        spectrum,
    })
}

fn resolve_drive(
    raw: &RawConfig,
    n_mech: usize,
    base: Option<&Drive>,
) -> Result<Drive, ConfigError> {
    let any_drive_key = ["drive.mode", "drive.delta", "drive.g", "drive.delta_c"]
        .iter()
        .chain(&["drive.omega_drive", "drive.g_single"])
        .any(|k| raw.get(k).is_some());
    let base_fits = |d: &Drive| match d {
        Drive::Linearized { g, .. } => g.len() == n_mech,
        Drive::Physical { g_single, .. } => g_single.len() == n_mech,
    };
    if !any_drive_key {
        return base
            .filter(|d| base_fits(d))
            .cloned()
            .ok_or_else(|| missing("drive.g"));
    }
    let mode = match raw.word("drive.mode") {
        Some((m, e)) => match m.as_str() {
            "linearized" | "physical" => m,
            _ => {
                return Err(field_err(
                    e,
                    "drive.mode",
                    format!("expected `linearized` or `physical`, got `{m}`"),
                ))
            }
        },
        None => match base {
            Some(Drive::Physical { .. }) => "physical".into(),
            _ => "linearized".into(),
        },
    };
    let list_or = |field: &str, fallback: Option<Vec<f64>>| match raw.list(field)? {
        Some(v) => broadcast(raw, field, v, n_mech),
        None => fallback.ok_or_else(|| missing(field)),
    };
    if mode == "linearized" {
        let (bd, bg) = match base {
            Some(Drive::Linearized { delta, g }) => {
                (Some(*delta), Some(g.clone()).filter(|g| g.len() == n_mech))
            }
            _ => (None, None),
        };
        let delta = raw
            .number("drive.delta")?
            .or(bd)
            .ok_or_else(|| missing("drive.delta"))?;
        Ok(Drive::Linearized {
            delta,
            g: list_or("drive.g", bg)?,
        })
    } else {
        let (bd, bw, bg) = match base {
            Some(Drive::Physical {
                delta_c,
                omega_drive,
                g_single,
            }) => (
                Some(*delta_c),
                Some(*omega_drive),
                Some(g_single.clone()).filter(|g| g.len() == n_mech),
            ),
            _ => (None, None, None),
        };
        let delta_c = raw
            .number("drive.delta_c")?
            .or(bd)
            .ok_or_else(|| missing("drive.delta_c"))?;
        let omega_drive = match raw.list("drive.omega_drive")? {
            Some(v) => match v.as_slice() {
                [re] => [*re, 0.0],
                [re, im] => [*re, *im],
                _ => {
                    let e = raw.get("drive.omega_drive").expect("present");
                    return Err(field_err(e, "drive.omega_drive", "expected `re` or `re, im`"));
                }
            },
            None => bw.ok_or_else(|| missing("drive.omega_drive"))?,
        };
        Ok(Drive::Physical {
            delta_c,
            omega_drive,
            g_single: list_or("drive.g_single", bg)?,
        })
    }
}

/// `start, stop, points`.
pub fn parse_range(s: &str) -> Result<OmegaRange, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected `start, stop, points`, got `{}`", s.trim()));
    }
    let start = parse_number(parts[0])?;
    let stop = parse_number(parts[1])?;
    let points = parse_points(parts[2])?;
    if !(stop > start) {
        return Err("range needs stop > start".into());
    }
    Ok(OmegaRange {
        start,
        stop,
        points,
    })
}

fn parse_points(s: &str) -> Result<usize, String> {
    let p: usize = s
        .trim()
        .parse()
        .map_err(|_| format!("expected a point count, got `{}`", s.trim()))?;
    if p < 2 {
        return Err("a range needs at least 2 points".into());
    }
    Ok(p)
}

/// `path, start, stop, points`.
fn parse_axis(s: &str, spec: &SystemSpec) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected `parameter, start, stop, points`, got `{}`",
            s.trim()
        ));
    }
    let path = ParamPath::parse(parts[0], spec)?;
    Ok(Axis {
        path,
        start: parse_number(parts[1])?,
        stop: parse_number(parts[2])?,
        points: parse_points(parts[3])?,
    })
}

fn parse_sweep(raw: &RawConfig, spec: &SystemSpec) -> Result<SweepSpec, ConfigError> {
    let e1 = raw.get("sweep.axis1").expect("checked by caller");
    let axis1 = parse_axis(&e1.value, spec).map_err(|m| field_err(e1, "sweep.axis1", m))?;
    let axis2 = raw
        .get("sweep.axis2")
        .map(|e| parse_axis(&e.value, spec).map_err(|m| field_err(e, "sweep.axis2", m)))
        .transpose()?;
    let outputs = match raw.get("sweep.outputs") {
        None => vec![Observable::NF, Observable::Stable],
        Some(e) => {
            let mut out = Vec::new();
            for w in e.value.split(',') {
                let o = Observable::parse(w.trim())
                    .map_err(|m| field_err(e, "sweep.outputs", m))?;
                o.check(spec).map_err(|m| field_err(e, "sweep.outputs", m))?;
                if !out.contains(&o) {
                    out.push(o);
                }
            }
            out
        }
    };
    Ok(SweepSpec {
        axis1,
        axis2,
        outputs,
    })
}

/// Parse a standalone sweep file (a `[sweep]` section) against a resolved spec.
pub fn parse_sweep_file(text: &str, spec: &SystemSpec) -> Result<SweepSpec, ConfigError> {
    let raw = RawConfig::parse(text)?;
    if raw.get("sweep.axis1").is_none() {
        return Err(missing("sweep.axis1"));
    }
    parse_sweep(&raw, spec)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn approx_word(a: Approx) -> &'static str {
    match a {
        Approx::Full => "full",
        Approx::Rwa => "rwa",
    }
}

/// Render a system and approximation flags in the config grammar. Numbers use
/// the shortest round-trip form, so parsing the output reproduces the input.
pub fn render(spec: &SystemSpec, approx: CouplingApprox) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[system]");
    let _ = writeln!(s, "n_mech = {}", spec.n_mech);
    let _ = writeln!(s, "omega = {}", join(&spec.omega));
    let _ = writeln!(s, "kappa = {}", spec.kappa);
    let _ = writeln!(s, "gamma = {}", join(&spec.gamma));
    let _ = writeln!(s, "nbar = {}", join(&spec.nbar));
    if spec.n_mech > 1 {
        let _ = writeln!(s, "eta = {}", join(&spec.eta));
        let _ = writeln!(s, "theta = {}", join(&spec.theta));
    }
    let _ = writeln!(s, "[drive]");
    match &spec.drive {
        Drive::Linearized { delta, g } => {
            let _ = writeln!(s, "mode = linearized");
            let _ = writeln!(s, "delta = {delta}");
            let _ = writeln!(s, "g = {}", join(g));
        }
        Drive::Physical {
            delta_c,
            omega_drive,
            g_single,
        } => {
            let _ = writeln!(s, "mode = physical");
            let _ = writeln!(s, "delta_c = {delta_c}");
            let _ = writeln!(s, "omega_drive = {}", join(omega_drive));
            let _ = writeln!(s, "g_single = {}", join(g_single));
        }
    }
    let _ = writeln!(s, "[approx]");
    let _ = writeln!(s, "optomechanical = {}", approx_word(approx.optomechanical));
    let _ = writeln!(s, "mechanical = {}", approx_word(approx.mechanical));
    s
}
