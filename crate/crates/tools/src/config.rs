//! Run configuration: every engine threshold plus CLI defaults, stored as
//! TOML. Flags override the file; the `SCENARIUM_CONFIG` environment variable
//! names the default file.

use scenarium_core::params::EngineParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_ENV_VAR: &str = "SCENARIUM_CONFIG";

/// Derivation defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeriveDefaults {
    /// Window length `T_s` used when the inputs leave it open, seconds.
    pub window_seconds: f64,
}

impl Default for DeriveDefaults {
    fn default() -> Self {
        DeriveDefaults { window_seconds: 6.0 }
    }
}

/// Prediction defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictDefaults {
    /// Horizon `T_e`, seconds.
    pub horizon: f64,
    /// Integration and event step, seconds.
    pub dt: f64,
}

impl Default for PredictDefaults {
    fn default() -> Self {
        PredictDefaults {
            horizon: 5.0,
            dt: 0.5,
        }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub engine: EngineParams,
    pub derive: DeriveDefaults,
    pub predict: PredictDefaults,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        RunConfig::from_toml(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }

    /// FNV-1a hash of the canonical TOML form; embedded in reports so a score
    /// can always be traced to the thresholds that produced it.
    pub fn hash(&self) -> String {
        format!("{:016x}", fnv1a(self.to_toml().as_bytes()))
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = RunConfig::default();
        let text = config.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
        // Key documented defaults.
        assert_eq!(config.engine.geometry.touch_gap, 0.05);
        assert_eq!(config.engine.geometry.near_radius, 10.0);
        assert_eq!(config.engine.temporal.still_speed, 0.1);
        assert_eq!(config.engine.temporal.park_after, 5.0);
        assert_eq!(config.engine.physics.rss.rho, 1.0);
        assert_eq!(config.engine.scoring.distance_tol, 0.5);
    }

    #[test]
    fn partial_files_fill_with_defaults() {
        let config = RunConfig::from_toml("[engine.temporal]\nstill_speed = 0.2\n").unwrap();
        assert_eq!(config.engine.temporal.still_speed, 0.2);
        assert_eq!(config.engine.temporal.park_after, 5.0);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), a.hash());
        b.engine.geometry.near_radius = 12.0;
        assert_ne!(a.hash(), b.hash());
    }
}
