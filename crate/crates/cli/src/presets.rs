//! Named parameter sets for the standard figures, in units of `ω_m`.

use std::f64::consts::PI;

use optocool_core::model::{CouplingApprox, SystemSpec};

use crate::config::{ConfigError, OmegaRange, RunConfig};

pub const NAMES: &[&str] = &[
    "fig2", "fig2-dark", "fig3", "fig4", "figS1", "figS8", "figS10", "figS11", "figS13",
];

fn uniform(n: usize, kappa: f64, eta: f64, theta: f64, g: f64) -> SystemSpec {
    SystemSpec::uniform(n, 1.0, kappa, 1e-5, 1e3, eta, theta, 1.0, g)
        .expect("preset parameters are valid")
}

/// Chain with the first bond phase `theta1` and all others zero.
fn chain(n: usize, eta: f64, theta1: f64) -> SystemSpec {
    let mut s = uniform(n, 0.2, eta, 0.0, 0.1);
    s.theta[0] = theta1;
    s
}

fn run(spec: SystemSpec) -> RunConfig {
    RunConfig {
        spec,
        approx: CouplingApprox::default(),
        sweep: None,
        spectrum: Some(OmegaRange {
            start: 0.9,
            stop: 1.1,
            points: 801,
        }),
    }
}

pub fn by_name(name: &str) -> Result<RunConfig, ConfigError> {
    let spec = match name {
        "fig2" | "fig3" | "figS1" | "figS13" => uniform(2, 0.2, 0.05, PI / 2.0, 0.1),
        "fig2-dark" => uniform(2, 0.2, 0.0, 0.0, 0.1),
        "fig4" => uniform(2, 0.2, 0.05, PI / 2.0, 0.05),
        "figS8" => uniform(2, 0.2, 0.05, PI / 2.0, 0.08),
        "figS10" => chain(3, 0.1, PI / 2.0),
        "figS11" => chain(4, 0.1, PI / 2.0),
        _ => return Err(ConfigError::UnknownPreset(name.to_string())),
    };
    Ok(run(spec))
}
