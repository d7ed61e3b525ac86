//! Resolved run configuration: one hierarchical TOML file with explicit
//! units in key names. Omitted fields take the parameter-table defaults, and
//! the fully resolved config is echoed next to every result so runs are
//! self-describing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterize::CharacterizeConfig;
use crate::net::{MotorParams, NetConfig};
use crate::vision::CameraModel;
use crate::world::{EnvKind, VelocityMode, WorldConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunMeta {
    pub seed_env: u64,
    pub budget_s: f64,
    pub velocity: VelocityMode,
    pub record_all: bool,
}

impl Default for RunMeta {
    fn default() -> Self {
        RunMeta {
            seed_env: 1,
            budget_s: 600.0,
            velocity: VelocityMode::Adaptive,
            record_all: false,
        }
    }
}

fn default_env() -> EnvKind {
    EnvKind::EmptyBox
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub network: NetConfig,
    pub camera: CameraModel,
    pub world: WorldConfig,
    pub motor: MotorParams,
    pub characterize: CharacterizeConfig,
    #[serde(default = "default_env")]
    pub environment: EnvKind,
    pub run: RunMeta,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            network: NetConfig::default(),
            camera: CameraModel::default(),
            world: WorldConfig::default(),
            motor: MotorParams::default(),
            characterize: CharacterizeConfig::default(),
            environment: default_env(),
            run: RunMeta::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, label: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: label.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Stable hash of the fully resolved config, for provenance headers.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.to_toml().as_bytes())
    }

    /// Provenance header line prepended to every output file.
    pub fn provenance(&self) -> String {
        format!(
            "# oflow v{} config=0x{:016x} seed_net={} seed_env={}",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            self.network.seed,
            self.run.seed_env,
        )
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml_str(&text, "mem").unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn partial_override_keeps_table_defaults() {
        let cfg = RunConfig::from_toml_str(
            "[network]\nn_connect = 2\n[run]\nbudget_s = 30.0\n\
             [environment]\nkind = \"clutter\"\ndensity_pct = 15.0\n",
            "mem",
        )
        .unwrap();
        assert_eq!(cfg.network.n_connect, 2);
        assert_eq!(cfg.run.budget_s, 30.0);
        assert_eq!(cfg.network.weights.sptc_tde_na, 4.0);
        assert!(matches!(cfg.environment, EnvKind::Clutter { density_pct } if density_pct == 15.0));
    }

    #[test]
    fn bad_field_reports_path() {
        let err = RunConfig::from_toml_str("[network]\nn_connect = \"many\"\n", "mem").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_connect") || msg.contains("network"), "{msg}");
    }
}
