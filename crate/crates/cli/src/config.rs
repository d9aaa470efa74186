//! Flat JSON run configuration. Flags override file values key by key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use diraclap::grid::{GridSpec, PacketSpec};
use diraclap::lap::Sign;
use diraclap::power::{NormMethod, PowerOptions};
use diraclap::scattering::PotentialSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Every parameter a run can take. `None` means "use the subcommand default";
/// the resolved copy written to `run.json` has the defaults filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub method: Option<NormMethod>,
    pub threads: Option<usize>,

    pub n: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub mus: Option<Vec<f64>>,
    pub sign: Option<Sign>,
    pub weight: Option<f64>,
    pub force: Option<bool>,

    pub members: Option<usize>,
    pub dilation: Option<f64>,
    pub lambda_step: Option<f64>,

    pub state: Option<StateKind>,
    pub momentum: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub pmin: Option<f64>,
    pub pmax: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub fd_step: Option<f64>,
    pub refine: Option<usize>,
    pub check_tol: Option<f64>,

    pub m_list: Option<Vec<f64>>,

    pub instances: Option<usize>,
    pub points: Option<usize>,

    pub pot: Option<PathBuf>,
    pub potential: Option<PotentialSpec>,
    #[serde(rename = "T")]
    pub times: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub depth: Option<usize>,
    pub probes: Option<Vec<PacketSpec>>,

    pub expr: Option<String>,
    pub vars: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    /// Gaussian packet restricted to the annulus.
    Packet,
    /// Compactly supported radial bump on the annulus.
    Annulus,
    /// Gaussian radial shell inside the annulus.
    Shell,
}

impl RunConfig {
    pub fn grid_or(&mut self, default: GridSpec) -> Result<GridSpec, CliError> {
        let g = *self.grid.get_or_insert(default);
        g.validate()?;
        Ok(g)
    }

    /// Fills and returns the norm-estimation options.
    pub fn power(&mut self) -> PowerOptions {
        let d = PowerOptions::default();
        PowerOptions {
            tol: *self.tol.get_or_insert(d.tol),
            max_iter: *self.max_iter.get_or_insert(d.max_iter),
            seed: self.seed,
            method: *self.method.get_or_insert(d.method),
        }
    }
}

/// Reads a config file; a previous `run.json` is accepted and its `config` entry used.
pub fn read_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut map = match value {
        Value::Object(m) => m,
        _ => return Err(CliError::Invalid("config file must hold a JSON object".into())),
    };
    if map.contains_key("version") {
        if let Some(Value::Object(inner)) = map.remove("config") {
            return Ok(inner);
        }
    }
    Ok(map)
}

/// Overlays non-null `overrides` onto `base` and parses the result.
pub fn merge(mut base: Map<String, Value>, overrides: Value) -> Result<RunConfig, CliError> {
    if let Value::Object(o) = overrides {
        for (k, v) in o {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Invalid(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flags_override_file() {
        let file = json!({"seed": 3, "mus": [1.0], "grid": {"n": 2, "M": 16, "L": 8.0}});
        let cfg = merge(
            file.as_object().unwrap().clone(),
            json!({"mus": [0.5, 0.25], "grid": null, "subcommand": "lap-scan"}),
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.mus, Some(vec![0.5, 0.25]));
        assert_eq!(cfg.grid.unwrap().points, 16);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(merge(Map::new(), json!({"lamdas": [1.0]})).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig {
            subcommand: "scatter".into(),
            potential: Some(PotentialSpec::coulomb2(0.05)),
            times: Some(vec![2.0, 4.0]),
            ..Default::default()
        };
        cfg.power();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
