use std::collections::BTreeSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Which flags of one utility consume a value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    #[serde(default)]
    pub valued_flags: BTreeSet<String>,
    /// Flags like find's `-name`: a single dash never bundles letters.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub single_dash_long: bool,
    /// Flags that swallow words up to a `;` or `+` word (`find -exec`).
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub terminated_flags: BTreeSet<String>,
    /// Option parsing stops at the first positional (wrappers such as
    /// `xargs`, `sudo`, `ssh` whose positionals form another command).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub posix_order: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArityTable {
    pub utilities: IndexMap<String, UtilitySpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum ArityError {
    #[error("cannot read arity table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("arity table is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("utility `{utility}`: flag `{flag}` does not start with `-`")]
    BadFlag { utility: String, flag: String },
}

const BUILTIN_TABLE: &str = include_str!("../../data/bash_arity.json");

impl ArityTable {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TABLE).expect("shipped arity table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ArityError> {
        let table: ArityTable = serde_json::from_str(text)?;
        for (utility, spec) in &table.utilities {
            if let Some(flag) = spec
                .valued_flags
                .iter()
                .chain(&spec.terminated_flags)
                .find(|f| !f.starts_with('-') && !f.starts_with('+'))
            {
                return Err(ArityError::BadFlag {
                    utility: utility.clone(),
                    flag: flag.clone(),
                });
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, ArityError> {
        let text = std::fs::read_to_string(path).map_err(|source| ArityError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Spec for a program, looked up by basename (`/usr/bin/find` -> `find`).
    pub fn get(&self, program: &str) -> Option<&UtilitySpec> {
        let base = program.rsplit('/').next().unwrap_or(program);
        self.utilities.get(base)
    }
}
