use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::TtnetModel;
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model on disk, tagged with the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub fold: Option<usize>,
    pub config: TrainConfig,
    pub model: TtnetModel,
}

impl Checkpoint {
    pub fn new(config: TrainConfig, config_hash: String, fold: Option<usize>, model: TtnetModel) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_hash,
            seed: config.seed,
            fold,
            config,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Schema(format!("unsupported checkpoint version {}", ck.version)));
        }
        ck.model.validate()?;
        Ok(ck)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
