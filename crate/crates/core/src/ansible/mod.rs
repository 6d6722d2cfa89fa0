//! Ansible playbooks: parsing, static validation against a module-spec
//! registry, task-dictionary similarity scoring, and role/variable infilling.

mod infill;
mod jinja;
mod parse;
mod registry;
mod score;
mod validate;
mod value;

use indexmap::IndexMap;
use serde::Serialize;

use crate::types::Diagnostic;

pub use infill::{infill_playbook, InfillError, Infilled, RoleContext, VarLayer};
pub use jinja::{expressions as template_expressions, root_names as template_root_names};
pub use parse::{parse_playbook, parse_task_list, MODULE_PREFIX};
pub use registry::{ArgType, ModuleSpec, ModuleSpecRegistry, RegistryError};
pub use score::{playbook_score, playbook_score_with, task_score, task_score_with, ScoreOptions};
pub use validate::{validate_playbook, validate_playbook_text, SHELL_MODULES};
pub use value::Value;

/// One module invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsibleTask {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Fully-qualified module key, e.g. `ansible.builtin.copy`.
    pub module: String,
    pub args: IndexMap<String, Value>,
    /// Task keywords such as `when`, `loop`, `register`, `become`.
    pub directives: IndexMap<String, Value>,
}

impl AnsibleTask {
    pub fn new(module: impl Into<String>) -> Self {
        AnsibleTask {
            name: None,
            module: module.into(),
            args: IndexMap::new(),
            directives: IndexMap::new(),
        }
    }

    pub fn arg(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.args.insert(key.to_string(), value.into());
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// Variable names bound by this task's loop, if it loops.
    pub fn loop_var(&self) -> Option<String> {
        let loops = self
            .directives
            .keys()
            .any(|k| k == "loop" || k.starts_with("with_"));
        if !loops {
            return None;
        }
        let custom = self
            .directives
            .get("loop_control")
            .and_then(Value::as_map)
            .and_then(|m| m.get("loop_var"))
            .and_then(Value::as_str);
        Some(custom.unwrap_or("item").to_string())
    }

    pub fn register(&self) -> Option<&str> {
        self.directives.get("register").and_then(Value::as_str)
    }

    fn to_yaml(&self) -> serde_yaml::Value {
        let mut m = serde_yaml::Mapping::new();
        if let Some(name) = &self.name {
            m.insert("name".into(), name.as_str().into());
        }
        let args = if self.args.is_empty() {
            serde_yaml::Value::Null
        } else {
            Value::Map(self.args.clone()).to_yaml()
        };
        m.insert(self.module.as_str().into(), args);
        for (k, v) in &self.directives {
            m.insert(k.as_str().into(), v.to_yaml());
        }
        serde_yaml::Value::Mapping(m)
    }
}

/// A play: play-level keywords plus its flattened task list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsiblePlay {
    pub tasks: Vec<AnsibleTask>,
    /// Every play key other than the task sections (`hosts`, `vars`,
    /// `roles`, `handlers`, ...).
    pub config: IndexMap<String, Value>,
}

impl AnsiblePlay {
    /// Names of roles referenced under `roles:`.
    pub fn role_names(&self) -> Vec<String> {
        match self.config.get("roles") {
            Some(Value::List(items)) => items.iter().filter_map(infill::role_entry_name).collect(),
            _ => Vec::new(),
        }
    }

    /// Play `vars` flattened to one map (a list of maps is merged in order).
    pub fn vars(&self) -> IndexMap<String, Value> {
        let mut out = IndexMap::new();
        match self.config.get("vars") {
            Some(Value::Map(m)) => out.extend(m.clone()),
            Some(Value::List(items)) => {
                for item in items {
                    if let Value::Map(m) = item {
                        out.extend(m.clone());
                    }
                }
            }
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsiblePlaybook {
    pub plays: Vec<AnsiblePlay>,
}

impl AnsiblePlaybook {
    /// Structured YAML form; `parse_playbook` of its text yields `self`.
    pub fn to_yaml_value(&self) -> serde_yaml::Value {
        let plays = self
            .plays
            .iter()
            .map(|play| {
                let mut m = serde_yaml::Mapping::new();
                for (k, v) in &play.config {
                    m.insert(k.as_str().into(), v.to_yaml());
                }
                m.insert(
                    "tasks".into(),
                    serde_yaml::Value::Sequence(play.tasks.iter().map(AnsibleTask::to_yaml).collect()),
                );
                serde_yaml::Value::Mapping(m)
            })
            .collect();
        serde_yaml::Value::Sequence(plays)
    }

    pub fn to_yaml_string(&self) -> String {
        serde_yaml::to_string(&self.to_yaml_value()).expect("playbook values are serializable")
    }

    pub fn tasks(&self) -> impl Iterator<Item = &AnsibleTask> {
        self.plays.iter().flat_map(|p| p.tasks.iter())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnsibleError {
    #[error("{0}")]
    Parse(Diagnostic),
    #[error("play {play} has no tasks to score")]
    EmptyPlay { play: usize },
    #[error("ground-truth playbook has no plays")]
    EmptyPlaybook,
}

impl AnsibleError {
    pub fn diagnostic(&self) -> Option<&Diagnostic> {
        match self {
            AnsibleError::Parse(d) => Some(d),
            _ => None,
        }
    }
}
