//! Defaults loaded from the file named by `LAWTRAVERSE_CONFIG`.
//!
//! Every field is optional; a flag given on the command line always wins
//! over the file, and the file wins over the built-in defaults. Unknown keys
//! are rejected so typos fail loudly instead of being ignored.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    /// Huber loss crossover (`fit --delta`).
    pub delta: Option<f64>,
    /// Resampling bins (`fit --bins`).
    pub bins: Option<usize>,
    /// Residual space, "linear" or "log" (`fit --space`).
    pub space: Option<String>,
    /// Family shape parameter name (`fit --shape-parameter`).
    pub shape_parameter: Option<String>,
    /// Partition grid points (`schedule --grid`).
    pub grid: Option<usize>,
    /// Baseline leg floor (`schedule --min-fraction`).
    pub min_fraction: Option<f64>,
    /// Trajectory sample count (`simulate --samples`).
    pub samples: Option<usize>,
    /// Frontier grid points (`frontier --points`).
    pub points: Option<usize>,
    /// Power usage effectiveness (`carbon --pue`).
    pub pue: Option<f64>,
    /// Carbon intensity in tCO2eq per MWh (`carbon --intensity`).
    pub intensity: Option<f64>,
}

impl Defaults {
    pub const ENV_VAR: &'static str = "LAWTRAVERSE_CONFIG";

    pub fn from_env() -> Result<Self, String> {
        match std::env::var_os(Self::ENV_VAR) {
            None => Ok(Self::default()),
            Some(path) => Self::from_path(Path::new(&path)),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| format!("config {}: {err}", path.display()))?;
        Self::from_json(&text).map_err(|err| format!("config {}: {err}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
