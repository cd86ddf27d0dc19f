//! Static descriptions of tiny AI accelerators.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DexError, Result};

const KIB: u64 = 1024;
const MIB: u64 = 1024 * 1024;

/// Environment variable naming a directory of `<name>.json` device profiles.
pub const PROFILE_DIR_ENV: &str = "DEXKIT_PROFILE_DIR";

/// Memory and processor layout of an accelerator's CNN engine.
///
/// Each processor owns exactly one data-memory instance; the hardware's
/// grouping of four instances per four processors is not modelled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub num_processors: usize,
    pub per_instance_bytes: u64,
    pub total_data_bytes: u64,
    pub total_weight_bytes: u64,
    /// Fields whose values were derived rather than taken from a datasheet.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derived_fields: Vec<String>,
}

impl DeviceProfile {
    pub fn new(
        name: impl Into<String>,
        num_processors: usize,
        per_instance_bytes: u64,
        total_data_bytes: u64,
        total_weight_bytes: u64,
    ) -> Result<Self> {
        let profile = DeviceProfile {
            name: name.into(),
            num_processors,
            per_instance_bytes,
            total_data_bytes,
            total_weight_bytes,
            derived_fields: Vec::new(),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_processors == 0 || self.per_instance_bytes == 0 {
            return Err(DexError::Config(format!(
                "profile {:?}: num_processors and per_instance_bytes must be positive",
                self.name
            )));
        }
        let instances = (self.num_processors as u64).checked_mul(self.per_instance_bytes);
        match instances {
            Some(bytes) if bytes <= self.total_data_bytes => Ok(()),
            _ => Err(DexError::Config(format!(
                "profile {:?}: {} instances of {} B exceed {} B of data memory",
                self.name, self.num_processors, self.per_instance_bytes, self.total_data_bytes
            ))),
        }
    }

    /// MAX78000: 64 processors, 8 KB per instance, 512 KB data, 432 KB weights.
    pub fn max78000() -> Self {
        DeviceProfile {
            name: "max78000".into(),
            num_processors: 64,
            per_instance_bytes: 8 * KIB,
            total_data_bytes: 512 * KIB,
            total_weight_bytes: 432 * KIB,
            derived_fields: Vec::new(),
        }
    }

    /// MAX78002: 64 processors, 1.3 MB data, 2 MB weights.
    ///
    /// Only the total data memory is published; the per-instance size is
    /// `floor(1.3 MB / 64)` and is flagged in `derived_fields`.
    pub fn max78002() -> Self {
        let total_data = (13 * MIB) / 10;
        DeviceProfile {
            name: "max78002".into(),
            num_processors: 64,
            per_instance_bytes: total_data / 64,
            total_data_bytes: total_data,
            total_weight_bytes: 2 * MIB,
            derived_fields: vec!["per_instance_bytes".into()],
        }
    }

    pub fn builtins() -> Vec<DeviceProfile> {
        vec![Self::max78000(), Self::max78002()]
    }

    pub fn builtin(name: &str) -> Option<DeviceProfile> {
        Self::builtins()
            .into_iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let profile: DeviceProfile =
            serde_json::from_str(json).map_err(|e| DexError::Config(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Resolves a profile by built-in name, JSON file path, or
    /// `$DEXKIT_PROFILE_DIR/<name>.json`, in that order.
    pub fn resolve(name: &str) -> Result<Self> {
        if let Some(p) = Self::builtin(name) {
            return Ok(p);
        }
        let as_path = Path::new(name);
        if as_path.extension().is_some_and(|e| e == "json") && as_path.is_file() {
            return Self::from_json_file(as_path);
        }
        if let Some(dir) = std::env::var_os(PROFILE_DIR_ENV) {
            let candidate = PathBuf::from(dir).join(format!("{name}.json"));
            if candidate.is_file() {
                return Self::from_json_file(&candidate);
            }
        }
        Err(DexError::UnknownProfile(name.to_string()))
    }
}
