use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tbf_core::baseline::{Weighting, DEFAULT_K};
use tbf_core::scene::{DatasetConfig, SceneConfig};
use tbf_core::{ArrayGeometry, OfdmConfig};

use crate::{CliError, GlobalArgs};

fn default_k() -> usize {
    DEFAULT_K
}
fn default_queries() -> usize {
    200
}
fn default_sweep() -> Vec<f64> {
    vec![0.0, 5.0, 10.0, 15.0, 20.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WknnConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub weighting: Weighting,
    /// Random test UTs evaluated against the database.
    #[serde(default = "default_queries")]
    pub n_queries: usize,
    /// SNR of the query fingerprints in the headline report; noiseless when
    /// absent.
    #[serde(default)]
    pub query_snr_db: Option<f64>,
    #[serde(default = "default_sweep")]
    pub snr_sweep_db: Vec<f64>,
}

impl Default for WknnConfig {
    fn default() -> Self {
        Self { k: default_k(), weighting: Weighting::default(), n_queries: default_queries(), query_snr_db: None, snr_sweep_db: default_sweep() }
    }
}

/// Everything a run needs, read from `--config` and overridden by flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub geometry: ArrayGeometry,
    pub ofdm: OfdmConfig,
    pub scene: SceneConfig,
    pub dataset: DatasetConfig,
    pub wknn: WknnConfig,
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl CliConfig {
    /// Parses a config whose sections may list only the fields they change.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let user: Value = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        let mut merged = serde_json::to_value(Self::default())?;
        merge(&mut merged, user);
        serde_path_to_error::deserialize(merged).map_err(|e| CliError::Invalid(format!("config `{}`: {}", e.path(), e.inner())))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
                Self::from_json(&text)
            }
        }
    }

    pub fn apply(&mut self, g: &GlobalArgs) -> Result<(), CliError> {
        if let Some(seed) = g.seed {
            self.scene.seed = seed;
        }
        if let Some(snr) = g.snr_db {
            self.dataset.snr_db = Some(snr);
            self.wknn.query_snr_db = Some(snr);
        }
        if let Some(bad) = g.gamma.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CliError::Invalid(format!("gamma must lie in [0, 1], got {bad}")));
        }
        if let [gamma] = g.gamma.as_slice() {
            self.dataset.gamma = *gamma;
        }
        if let Some(k) = g.k {
            self.wknn.k = k;
        }
        if g.snap_to_grid {
            self.dataset.snap_to_grid = true;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry.validate()?;
        self.ofdm.validate()?;
        self.scene.validate()?;
        if !(0.0..=1.0).contains(&self.dataset.gamma) {
            return Err(CliError::Invalid(format!("gamma must lie in [0, 1], got {}", self.dataset.gamma)));
        }
        if self.wknn.k == 0 {
            return Err(CliError::Invalid("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_keep_defaults() {
        let c = CliConfig::from_json(r#"{"geometry":{"m_rows":2},"dataset":{"grid":{"spacing_m":2.0}}}"#).unwrap();
        let d = CliConfig::default();
        assert_eq!(c.geometry, ArrayGeometry { m_rows: 2, ..d.geometry });
        assert_eq!(c.dataset.grid.spacing_m, 2.0);
        assert_eq!(c.dataset.grid.floors_m, d.dataset.grid.floors_m);
        assert_eq!(c.ofdm, d.ofdm);
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = CliConfig::from_json(r#"{"dataset":{"grid":{"spacing":2.0}}}"#).unwrap_err().to_string();
        assert!(err.contains("dataset.grid.spacing"), "{err}");
        let err = CliConfig::from_json(r#"{"wknn":{"k":"five"}}"#).unwrap_err().to_string();
        assert!(err.contains("wknn.k"), "{err}");
    }

    #[test]
    fn null_clears_optional_fields() {
        let c = CliConfig::from_json(r#"{"dataset":{"snr_db":10},"wknn":{"query_snr_db":null}}"#).unwrap();
        assert_eq!(c.dataset.snr_db, Some(10.0));
        assert_eq!(c.wknn.query_snr_db, None);
    }
}
