//! One- and two-axis parameter sweeps evaluated on a bounded worker pool.

use optocool_core::limits;
use optocool_core::model::{build_drift, CouplingApprox, Drive, SystemSpec};
use optocool_core::modes;
use optocool_core::spectra::{self, Cooperativities};
use optocool_core::steadystate::solve_cooling;
use rayon::prelude::*;

use crate::{fmt_f64, prepare, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Omega,
    Kappa,
    Gamma,
    Nbar,
    Eta,
    Theta,
    Delta,
    G,
    DeltaC,
    GSingle,
}

/// A sweepable system field, optionally restricted to one (1-based) entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamPath {
    field: Field,
    index: Option<usize>,
    label: String,
}

impl ParamPath {
    /// `name` or `name[j]`, checked against the shape of `spec`.
    pub fn parse(s: &str, spec: &SystemSpec) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        let (name, index) = match s.split_once('[') {
            Some((n, rest)) => {
                let j: usize = rest
                    .strip_suffix(']')
                    .and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| format!("bad index in `{s}`"))?;
                (n.trim().to_string(), Some(j))
            }
            None => (s.clone(), None),
        };
        let field = match name.as_str() {
            "omega" => Field::Omega,
            "kappa" => Field::Kappa,
            "gamma" => Field::Gamma,
            "nbar" => Field::Nbar,
            "eta" => Field::Eta,
            "theta" => Field::Theta,
            "delta" => Field::Delta,
            "g" => Field::G,
            "delta_c" => Field::DeltaC,
            "g_single" => Field::GSingle,
            _ => return Err(format!("unknown sweep parameter `{name}`")),
        };
        let physical = matches!(spec.drive, Drive::Physical { .. });
        match field {
            Field::Delta | Field::G if physical => {
                return Err(format!("`{name}` needs a linearized drive"))
            }
            Field::DeltaC | Field::GSingle if !physical => {
                return Err(format!("`{name}` needs a physical drive"))
            }
            _ => {}
        }
        let len = match field {
            Field::Kappa | Field::Delta | Field::DeltaC => 1,
            Field::Eta | Field::Theta => spec.n_mech.saturating_sub(1),
            _ => spec.n_mech,
        };
        match (field, index) {
            (Field::Kappa | Field::Delta | Field::DeltaC, Some(_)) => {
                return Err(format!("`{name}` is a scalar and takes no index"))
            }
            (_, Some(j)) if j == 0 || j > len => {
                return Err(format!("index {j} out of range 1..={len} for `{name}`"))
            }
            (_, None) if len == 0 => return Err(format!("`{name}` has no entries")),
            _ => {}
        }
        let label = match index {
            Some(j) => format!("{name}[{j}]"),
            None => name,
        };
        Ok(Self {
            field,
            index: index.map(|j| j - 1),
            label,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Set the field; list fields without an index are set entry-wide.
    pub fn apply(&self, spec: &mut SystemSpec, v: f64) {
        let set = |xs: &mut Vec<f64>| match self.index {
            Some(j) => xs[j] = v,
            None => xs.iter_mut().for_each(|x| *x = v),
        };
        match self.field {
            Field::Omega => set(&mut spec.omega),
            Field::Kappa => spec.kappa = v,
            Field::Gamma => set(&mut spec.gamma),
            Field::Nbar => set(&mut spec.nbar),
            Field::Eta => set(&mut spec.eta),
            Field::Theta => set(&mut spec.theta),
            Field::Delta | Field::G => {
                if let Drive::Linearized { delta, g } = &mut spec.drive {
                    if self.field == Field::Delta {
                        *delta = v;
                    } else {
                        set(g);
                    }
                }
            }
            Field::DeltaC | Field::GSingle => {
                if let Drive::Physical {
                    delta_c, g_single, ..
                } = &mut spec.drive
                {
                    if self.field == Field::DeltaC {
                        *delta_c = v;
                    } else {
                        set(g_single);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: ParamPath,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        spectra::linspace(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    NF,
    Stable,
    LambdaRel,
    Limits,
    Darkness,
}

impl Observable {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "n_f" => Ok(Self::NF),
            "stable" => Ok(Self::Stable),
            "lambda_rel" => Ok(Self::LambdaRel),
            "limits" => Ok(Self::Limits),
            "darkness" => Ok(Self::Darkness),
            other => Err(format!(
                "unknown output `{other}` (expected n_f, stable, lambda_rel, limits, darkness)"
            )),
        }
    }

    pub fn check(&self, spec: &SystemSpec) -> Result<(), String> {
        match self {
            Self::LambdaRel | Self::Limits if spec.n_mech != 2 => {
                Err("lambda_rel and limits need exactly two resonators".into())
            }
            _ => Ok(()),
        }
    }

    fn columns(&self, n_mech: usize) -> Vec<String> {
        match self {
            Self::NF => (1..=n_mech)
                .map(|j| format!("n_f_{j}"))
                .chain(["n_cav".to_string()])
                .collect(),
            Self::Stable => Vec::new(),
            Self::LambdaRel => vec!["lambda_b2b1".into(), "lambda_b1b2".into()],
            Self::Limits => ["limit_simplified_1", "limit_simplified_2"]
                .iter()
                .chain(&["limit_full_1", "limit_full_2"])
                .map(|s| s.to_string())
                .collect(),
            Self::Darkness => vec!["darkness".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub outputs: Vec<Observable>,
}

/// Column names and formatted cells, rows in axis order (axis 1 outermost).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepSpec {
    pub fn columns(&self, n_mech: usize) -> Vec<String> {
        let mut c = vec![self.axis1.path.label().to_string()];
        if let Some(a) = &self.axis2 {
            c.push(a.path.label().to_string());
        }
        c.push("stable".into());
        for o in &self.outputs {
            c.extend(o.columns(n_mech));
        }
        c
    }

    pub fn grid(&self) -> Vec<(f64, Option<f64>)> {
        let v1 = self.axis1.values();
        match &self.axis2 {
            None => v1.into_iter().map(|x| (x, None)).collect(),
            Some(a2) => {
                let v2 = a2.values();
                v1.iter()
                    .flat_map(|&x| v2.iter().map(move |&y| (x, Some(y))))
                    .collect()
            }
        }
    }
}

fn evaluate(
    base: &SystemSpec,
    approx: CouplingApprox,
    sweep: &SweepSpec,
    point: (f64, Option<f64>),
) -> Result<Vec<String>, CliError> {
    let mut spec = base.clone();
    sweep.axis1.path.apply(&mut spec, point.0);
    let mut row = vec![fmt_f64(point.0)];
    if let (Some(a2), Some(y)) = (&sweep.axis2, point.1) {
        a2.path.apply(&mut spec, y);
        row.push(fmt_f64(y));
    }
    let spec = spec.validated().map_err(|e| {
        CliError::Spec(format!("sweep point {}: {e}", row.join(", ")))
    })?;
    let (spec, _) = prepare(&spec)?;
    let drift = build_drift(&spec, approx)?;
    let report = solve_cooling(&drift)?;
    row.push(report.stable.to_string());
    for o in &sweep.outputs {
        let width = o.columns(spec.n_mech).len();
        if !report.stable {
            row.extend(std::iter::repeat_n(String::new(), width));
            continue;
        }
        match o {
            Observable::Stable => {}
            Observable::NF => {
                row.extend(report.n_f.iter().map(|&x| fmt_f64(x)));
                row.push(fmt_f64(report.n_cav));
            }
            Observable::LambdaRel => {
                let coop = Cooperativities::from_spec(&spec)?;
                let l = spectra::lambda_numeric(&drift, spec.omega[0], &coop)?;
                row.push(fmt_f64(l[1][0]));
                row.push(fmt_f64(l[0][1]));
            }
            Observable::Limits => {
                let r = limits::limits_report(&spec)?;
                for x in [r.simplified.n1, r.simplified.n2, r.full.n1, r.full.n2] {
                    row.push(fmt_f64(x));
                }
            }
            Observable::Darkness => row.push(fmt_f64(modes::darkness(&spec)?)),
        }
    }
    Ok(row)
}

/// Evaluate every grid point. `workers = None` uses the global pool; `Some(n)`
/// builds a dedicated pool of `n` threads. Output order never depends on it.
pub fn run_sweep(
    spec: &SystemSpec,
    approx: CouplingApprox,
    sweep: &SweepSpec,
    workers: Option<usize>,
) -> Result<Table, CliError> {
    let grid = sweep.grid();
    let work = || -> Result<Vec<Vec<String>>, CliError> {
        grid.par_iter()
            .map(|&p| evaluate(spec, approx, sweep, p))
            .collect()
    };
    let rows = match workers {
        None => work()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Compute(format!("worker pool: {e}")))?
            .install(work)?,
    };
    Ok(Table {
        columns: sweep.columns(spec.n_mech),
        rows,
    })
}

/// Reference single-threaded evaluation, used to check the parallel path.
pub fn run_sweep_serial(
    spec: &SystemSpec,
    approx: CouplingApprox,
    sweep: &SweepSpec,
) -> Result<Table, CliError> {
    let rows = sweep
        .grid()
        .into_iter()
        .map(|p| evaluate(spec, approx, sweep, p))
        .collect::<Result<_, _>>()?;
    Ok(Table {
        columns: sweep.columns(spec.n_mech),
        rows,
    })
}
