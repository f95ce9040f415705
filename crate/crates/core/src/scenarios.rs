//! Named builtin scenarios.
//!
//! | name | T | γ | x¹, x² | targets |
//! |------|---|---|--------|---------|
//! | `liquidation-plastic` | 2 | 2 | 1, 0 | zero |
//! | `liquidation-elastic` | 2 | 0.1 | 1, 0 | zero |
//! | `liquidation-elastic-prose` | 2 | 0.01 | 1, 0 | zero |
//! | `buying-schedule` | 10 | 2 | 0, 0 | ξ¹ = 1 on [0,5), 2 on [5,10], Ξ¹ = 2 |
//! | `buying-schedule-elastic` | 10 | 0.1 | 0, 0 | as above |
//! | `constant-targets` | 10 | 2 | 0, 0 | ξ¹ ≡ Ξ¹ = 1, ξ² ≡ Ξ² = 0.1 |
//! | `constant-targets-elastic` | 10 | 0.1 | 0, 0 | as above |
//! | `delta-hedge` | 5 | 2 | 1/2, 0 | ξ¹ Bachelier delta, Ξ¹ = 0 |
//! | `delta-hedge-elastic` | 5 | 0.1 | 1/2, 0 | as above |
//! | `delta-hedge-pair` | 5 | 2 | 1/2, 1/20 | ξ¹ delta, ξ² = ξ¹/10, Ξ = 0 |
//! | `delta-hedge-pair-elastic` | 5 | 0.1 | 1/2, 1/20 | as above |
//!
//! All use `σ = λ = 1`.

use crate::coefficients::ModelParams;
use crate::error::{Error, Result};
use crate::targets::{ScenarioSpec, TargetSpec};

pub const BUILTIN_NAMES: [&str; 11] = [
    "liquidation-plastic",
    "liquidation-elastic",
    "liquidation-elastic-prose",
    "buying-schedule",
    "buying-schedule-elastic",
    "constant-targets",
    "constant-targets-elastic",
    "delta-hedge",
    "delta-hedge-elastic",
    "delta-hedge-pair",
    "delta-hedge-pair-elastic",
];

fn params(gamma: f64, horizon: f64) -> ModelParams {
    ModelParams {
        lambda: 1.0,
        gamma,
        sigma: 1.0,
        horizon,
    }
}

fn liquidation(gamma: f64) -> ScenarioSpec {
    ScenarioSpec {
        params: params(gamma, 2.0),
        x1: 1.0,
        x2: 0.0,
        target1: TargetSpec::zero(),
        target2: TargetSpec::zero(),
    }
}

fn buying_schedule(gamma: f64) -> ScenarioSpec {
    ScenarioSpec {
        params: params(gamma, 10.0),
        x1: 0.0,
        x2: 0.0,
        target1: TargetSpec::piecewise(vec![0.0, 5.0, 10.0], vec![1.0, 2.0], 2.0),
        target2: TargetSpec::zero(),
    }
}

fn constant_targets(gamma: f64) -> ScenarioSpec {
    ScenarioSpec {
        params: params(gamma, 10.0),
        x1: 0.0,
        x2: 0.0,
        target1: TargetSpec::constant(1.0, 10.0, 1.0),
        target2: TargetSpec::constant(0.1, 10.0, 0.1),
    }
}

fn delta_hedge(gamma: f64, pair: bool) -> ScenarioSpec {
    ScenarioSpec {
        params: params(gamma, 5.0),
        x1: 0.5,
        x2: if pair { 0.05 } else { 0.0 },
        target1: TargetSpec::bachelier_delta(1.0, 0.0),
        target2: if pair {
            TargetSpec::bachelier_delta(0.1, 0.0)
        } else {
            TargetSpec::zero()
        },
    }
}

pub fn builtin(name: &str) -> Result<ScenarioSpec> {
    Ok(match name {
        "liquidation-plastic" => liquidation(2.0),
        "liquidation-elastic" => liquidation(0.1),
        "liquidation-elastic-prose" => liquidation(0.01),
        "buying-schedule" => buying_schedule(2.0),
        "buying-schedule-elastic" => buying_schedule(0.1),
        "constant-targets" => constant_targets(2.0),
        "constant-targets-elastic" => constant_targets(0.1),
        "delta-hedge" => delta_hedge(2.0, false),
        "delta-hedge-elastic" => delta_hedge(0.1, false),
        "delta-hedge-pair" => delta_hedge(2.0, true),
        "delta-hedge-pair-elastic" => delta_hedge(0.1, true),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown scenario '{other}' (known: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}

/// Every builtin as `(name, scenario)`.
pub fn builtins() -> Vec<(&'static str, ScenarioSpec)> {
    BUILTIN_NAMES
        .iter()
        .map(|&n| (n, builtin(n).expect("registry names resolve")))
        .collect()
}
