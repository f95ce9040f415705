//! Run configuration: config file, then command-line overrides, then defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tracking_game::{builtin, scenario_grid, GridSpec, ScenarioSpec, TimeGrid};

use crate::error::{CliError, Result};

/// Which parts of a solution are written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Inventory columns and `solution.json`.
    pub paths: bool,
    pub rates: bool,
    /// `ξ̂` and `ξ̂ - w⁵ X̂_opp` columns.
    pub signals: bool,
    /// `coeffs.csv` alongside a solve.
    pub weights: bool,
    /// Run the verification suite after a solve.
    pub verification: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            paths: true,
            rates: true,
            signals: true,
            weights: false,
            verification: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    pub n_uniform: Option<usize>,
    pub n_tail: Option<usize>,
    /// `ε_T / T`.
    pub eps_frac: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub grid: GridOverrides,
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub out: Option<PathBuf>,
    pub outputs: Option<Outputs>,
    pub gammas: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
    pub perturbations: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved configuration, echoed into every JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Builtin name or path to a scenario JSON file.
    pub scenario: String,
    pub grid: GridOverrides,
    pub seed: u64,
    pub n_paths: usize,
    pub out: PathBuf,
    pub outputs: Outputs,
    pub gammas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub perturbations: usize,
}

pub const DEFAULT_SCENARIO: &str = "liquidation-plastic";

impl RunConfig {
    pub fn resolve_scenario(&self) -> Result<ScenarioSpec> {
        let path = Path::new(&self.scenario);
        if self.scenario.ends_with(".json") || path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return ScenarioSpec::from_json(&text)
                .map_err(|e| CliError::Validation(format!("scenario {}: {e}", path.display())));
        }
        let spec = builtin(&self.scenario)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid_spec(&self, horizon: f64) -> GridSpec {
        let mut spec = GridSpec::default_for(horizon);
        if let Some(n) = self.grid.n_uniform {
            spec.n_uniform = n;
        }
        if let Some(n) = self.grid.n_tail {
            spec.n_tail = n;
        }
        if let Some(f) = self.grid.eps_frac {
            spec.eps_t = f * horizon;
        }
        spec
    }

    pub fn grid(&self, scenario: &ScenarioSpec) -> Result<TimeGrid> {
        Ok(scenario_grid(scenario, self.grid_spec(scenario.params.horizon))?)
    }

    pub fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}
