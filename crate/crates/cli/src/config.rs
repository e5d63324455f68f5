//! JSON run configuration: `protocol`, `channel`, `attack`, and `seed`
//! sections mirroring the library types. Unknown fields are rejected so
//! typos surface as errors naming the field.

use anyhow::{Context, Result};
use qnd_core::adversary::AttackConfig;
use qnd_core::channel::ChannelConfig;
use qnd_core::protocol::{CheckTolerances, ProtocolConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub group_size: u64,
    pub num_groups: u32,
    pub digits_per_value: usize,
    pub digits_sacrificed_per_group: usize,
    pub tolerances: CheckTolerances,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let base = ProtocolConfig::default();
        ProtocolSection {
            group_size: base.group_size,
            num_groups: base.num_groups,
            digits_per_value: base.digits_per_value,
            digits_sacrificed_per_group: base.digits_sacrificed_per_group,
            tolerances: base.tolerances,
        }
    }
}

/// On-disk run configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub protocol: ProtocolSection,
    pub channel: ChannelConfig,
    pub attack: AttackConfig,
    pub seed: u64,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: FileConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.to_protocol_config()
            .validate()
            .with_context(|| format!("validating config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_protocol_config(self) -> ProtocolConfig {
        ProtocolConfig {
            group_size: self.protocol.group_size,
            num_groups: self.protocol.num_groups,
            digits_per_value: self.protocol.digits_per_value,
            digits_sacrificed_per_group: self.protocol.digits_sacrificed_per_group,
            tolerances: self.protocol.tolerances,
            channel: self.channel,
            attack: self.attack,
            master_seed: self.seed,
        }
    }
}
