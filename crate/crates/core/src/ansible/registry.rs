use std::collections::BTreeSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::value::Value;
use super::jinja;

/// Scalar type tag for a module argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgType {
    String,
    Int,
    Bool,
    Path,
    List,
    Any,
}

impl ArgType {
    /// Whether `value` is acceptable for this type. Templated strings are
    /// always accepted since their type is only known at run time.
    pub fn accepts(self, value: &Value) -> bool {
        if let Value::Str(s) = value {
            if !jinja::expressions(s).is_empty() {
                return true;
            }
        }
        match self {
            ArgType::Any => true,
            ArgType::String => value.is_scalar(),
            ArgType::Path => matches!(value, Value::Str(_)),
            ArgType::Int => match value {
                Value::Int(_) => true,
                Value::Str(s) => s.trim().parse::<i64>().is_ok(),
                _ => false,
            },
            ArgType::Bool => match value {
                Value::Bool(_) => true,
                Value::Int(i) => *i == 0 || *i == 1,
                Value::Str(s) => matches!(
                    s.trim().to_ascii_lowercase().as_str(),
                    "yes" | "no" | "true" | "false" | "on" | "off" | "1" | "0" | "y" | "n"
                ),
                _ => false,
            },
            ArgType::List => matches!(value, Value::List(_) | Value::Str(_) | Value::Int(_)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArgType::String => "string",
            ArgType::Int => "int",
            ArgType::Bool => "bool",
            ArgType::Path => "path",
            ArgType::List => "list",
            ArgType::Any => "any",
        }
    }
}

/// Argument contract for one module.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    #[serde(default)]
    pub required: BTreeSet<String>,
    #[serde(default)]
    pub mutually_exclusive: Vec<Vec<String>>,
    #[serde(default)]
    pub arg_types: IndexMap<String, ArgType>,
    /// alias -> canonical argument name
    #[serde(default)]
    pub aliases: IndexMap<String, String>,
    /// Accepts free-form text (`_raw_params`).
    #[serde(default)]
    pub free_form: bool,
    /// Accepts arbitrary argument names (`set_fact`, `add_host`).
    #[serde(default)]
    pub free_args: bool,
}

impl ModuleSpec {
    pub fn canonical<'a>(&'a self, arg: &'a str) -> &'a str {
        self.aliases.get(arg).map_or(arg, String::as_str)
    }

    pub fn knows(&self, canonical: &str) -> bool {
        self.arg_types.contains_key(canonical) || (self.free_form && canonical == "_raw_params")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("registry is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("module `{module}`: {problem}")]
    Invalid { module: String, problem: String },
}

/// Module key -> argument contract, loaded from versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpecRegistry {
    pub version: String,
    pub modules: IndexMap<String, ModuleSpec>,
}

const BUILTIN_REGISTRY: &str = include_str!("../../data/ansible_modules.json");

impl ModuleSpecRegistry {
    /// The registry shipped with the crate (common `ansible.builtin` modules).
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_REGISTRY).expect("shipped registry is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let reg: ModuleSpecRegistry = serde_json::from_str(text)?;
        reg.check()?;
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, module: &str) -> Option<&ModuleSpec> {
        self.modules.get(module)
    }

    fn check(&self) -> Result<(), RegistryError> {
        for (module, spec) in &self.modules {
            let invalid = |problem: String| RegistryError::Invalid {
                module: module.clone(),
                problem,
            };
            let names = spec
                .required
                .iter()
                .chain(spec.mutually_exclusive.iter().flatten());
            for name in names {
                if !spec.knows(name) {
                    return Err(invalid(format!("`{name}` has no declared type")));
                }
            }
            for (alias, target) in &spec.aliases {
                if !spec.knows(target) {
                    return Err(invalid(format!("alias `{alias}` targets unknown `{target}`")));
                }
            }
        }
        Ok(())
    }
}
