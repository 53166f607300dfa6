use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ruleset::RuleSet;
use crate::error::{Error, Result};
use crate::logic::TruthTable;

pub const RULESET_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDigest {
    pub filter: usize,
    pub n: usize,
    /// Output column, hex, row 0 in the most significant bit.
    pub outputs: String,
}

impl From<&TruthTable> for TableDigest {
    fn from(t: &TruthTable) -> Self {
        TableDigest {
            filter: t.filter_id,
            n: t.n,
            outputs: t.to_hex(),
        }
    }
}

/// A rule set on disk with the run that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSetFile {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default)]
    pub fold: Option<usize>,
    /// What the truth-table correlation was computed on.
    pub ttc_operand: String,
    pub tables: Vec<TableDigest>,
    pub ruleset: RuleSet,
}

impl RuleSetFile {
    pub fn new(ruleset: RuleSet, tables: &[TruthTable], config_hash: String, seed: u64, fold: Option<usize>) -> Self {
        RuleSetFile {
            version: RULESET_VERSION,
            config_hash,
            seed,
            fold,
            ttc_operand: "truth_table_outputs".into(),
            tables: tables.iter().map(TableDigest::from).collect(),
            ruleset,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RuleSetFile = serde_json::from_str(text)?;
        if f.version != RULESET_VERSION {
            return Err(Error::Schema(format!("unsupported rule-set version {}", f.version)));
        }
        f.ruleset.validate()?;
        Ok(f)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
