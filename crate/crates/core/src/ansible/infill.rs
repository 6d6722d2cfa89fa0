//! Role and variable infilling.
//!
//! Variable layers, lowest to highest precedence:
//! role defaults < role vars < play vars < inventory vars < extra vars.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use super::jinja;
use super::parse::parse_task_list;
use super::value::Value;
use super::{AnsiblePlay, AnsiblePlaybook, AnsibleTask};
use crate::types::Diagnostic;

/// Precedence layer a variable was resolved from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarLayer {
    RoleDefaults,
    RoleVars,
    PlayVars,
    InventoryVars,
    ExtraVars,
}

/// Repository context for infilling.
#[derive(Debug, Clone, Default)]
pub struct RoleContext {
    /// Directory holding `roles/<name>/{tasks,defaults,vars,meta}/main.yml`.
    pub root: PathBuf,
    pub inventory_vars: IndexMap<String, Value>,
    pub extra_vars: IndexMap<String, Value>,
}

impl RoleContext {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RoleContext {
            root: root.into(),
            ..Default::default()
        }
    }

    /// Load a YAML or JSON mapping of variables.
    pub fn load_vars(path: &Path) -> Result<IndexMap<String, Value>, InfillError> {
        let text = std::fs::read_to_string(path).map_err(|e| InfillError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        read_var_map(&text, path)
    }

    fn role_dir(&self, name: &str) -> Option<PathBuf> {
        [self.root.join("roles").join(name), self.root.join(name)]
            .into_iter()
            .find(|p| p.is_dir())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InfillError {
    #[error("role `{role}` not found under {root}")]
    MissingRole { role: String, root: PathBuf },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("role dependency cycle through `{0}`")]
    RoleCycle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infilled {
    pub playbook: AnsiblePlaybook,
    /// `ANS_UNRESOLVED_VAR` findings for references left verbatim.
    pub diagnostics: Vec<Diagnostic>,
}

/// Inline `roles:` (and `import_role`/`include_role` tasks) and substitute
/// bare `{{ var }}` references resolvable from the layered sources.
pub fn infill_playbook(pb: &AnsiblePlaybook, ctx: &RoleContext) -> Result<Infilled, InfillError> {
    let mut diagnostics = Vec::new();
    let mut plays = Vec::with_capacity(pb.plays.len());
    for (pi, play) in pb.plays.iter().enumerate() {
        plays.push(infill_play(pi, play, ctx, &mut diagnostics)?);
    }
    Ok(Infilled {
        playbook: AnsiblePlaybook { plays },
        diagnostics,
    })
}

struct LoadedRole {
    tasks: Vec<AnsibleTask>,
    defaults: IndexMap<String, Value>,
    vars: IndexMap<String, Value>,
}

fn infill_play(
    pi: usize,
    play: &AnsiblePlay,
    ctx: &RoleContext,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<AnsiblePlay, InfillError> {
    let mut defaults = IndexMap::new();
    let mut role_vars = IndexMap::new();
    let mut tasks = Vec::new();

    if let Some(Value::List(entries)) = play.config.get("roles") {
        for entry in entries {
            let Some(name) = role_entry_name(entry) else {
                continue;
            };
            let role = load_role(ctx, &name, None, &mut Vec::new())?;
            defaults.extend(role.defaults);
            role_vars.extend(role.vars);
            let (params, inherited) = split_role_entry(entry);
            role_vars.extend(params);
            tasks.extend(role.tasks.into_iter().map(|t| inherit(t, &inherited)));
        }
    }
    for task in &play.tasks {
        if let Some((name, tasks_from)) = role_task(task) {
            let role = load_role(ctx, &name, tasks_from.as_deref(), &mut Vec::new())?;
            defaults.extend(role.defaults);
            role_vars.extend(role.vars);
            tasks.extend(role.tasks.into_iter().map(|t| inherit(t, &task.directives)));
        } else {
            tasks.push(task.clone());
        }
    }

    let mut resolver = Resolver::default();
    resolver.push(VarLayer::RoleDefaults, defaults);
    resolver.push(VarLayer::RoleVars, role_vars);
    resolver.push(VarLayer::PlayVars, play.vars());
    resolver.push(VarLayer::InventoryVars, ctx.inventory_vars.clone());
    resolver.push(VarLayer::ExtraVars, ctx.extra_vars.clone());

    let mut runtime: HashSet<String> = HashSet::new();
    for task in &tasks {
        if let Some(v) = task.loop_var() {
            runtime.insert(v);
        }
        if let Some(r) = task.register() {
            runtime.insert(r.to_string());
        }
        if task.module == "ansible.builtin.set_fact" {
            runtime.extend(task.args.keys().cloned());
        }
    }

    let at = format!("play {}", pi + 1);
    let mut sub = Substituter {
        resolver: &resolver,
        runtime: &runtime,
        at: &at,
        diagnostics,
    };
    let mut config = IndexMap::new();
    for (k, v) in &play.config {
        match k.as_str() {
            "roles" => {}
            "vars" | "handlers" | "vars_prompt" => {
                config.insert(k.clone(), v.clone());
            }
            _ => {
                config.insert(k.clone(), sub.value(v));
            }
        }
    }
    let tasks = tasks
        .into_iter()
        .map(|t| AnsibleTask {
            name: t.name.as_deref().map(|n| sub.string_text(n)),
            module: t.module,
            args: t.args.iter().map(|(k, v)| (k.clone(), sub.value(v))).collect(),
            directives: t
                .directives
                .iter()
                .map(|(k, v)| (k.clone(), sub.value(v)))
                .collect(),
        })
        .collect();
    Ok(AnsiblePlay { tasks, config })
}

pub(crate) fn role_entry_name(entry: &Value) -> Option<String> {
    match entry {
        Value::Str(s) => Some(s.trim().to_string()),
        Value::Map(m) => m
            .get("role")
            .or_else(|| m.get("name"))
            .and_then(Value::as_str)
            .map(|s| s.trim().to_string()),
        _ => None,
    }
}

const ROLE_ENTRY_KEYWORDS: &[&str] = &[
    "when",
    "tags",
    "become",
    "become_user",
    "become_method",
    "delegate_to",
    "ignore_errors",
    "environment",
    "no_log",
];

/// Role parameters (variables) and keywords inherited by the role's tasks.
fn split_role_entry(entry: &Value) -> (IndexMap<String, Value>, IndexMap<String, Value>) {
    let mut params = IndexMap::new();
    let mut inherited = IndexMap::new();
    if let Value::Map(m) = entry {
        for (k, v) in m {
            match k.as_str() {
                "role" | "name" => {}
                "vars" => {
                    if let Value::Map(vars) = v {
                        params.extend(vars.clone());
                    }
                }
                k if ROLE_ENTRY_KEYWORDS.contains(&k) => {
                    inherited.insert(k.to_string(), v.clone());
                }
                _ => {
                    params.insert(k.clone(), v.clone());
                }
            }
        }
    }
    (params, inherited)
}

fn inherit(mut task: AnsibleTask, directives: &IndexMap<String, Value>) -> AnsibleTask {
    for (k, v) in directives {
        if !task.directives.contains_key(k) {
            task.directives.insert(k.clone(), v.clone());
        }
    }
    task
}

fn role_task(task: &AnsibleTask) -> Option<(String, Option<String>)> {
    if task.module != "ansible.builtin.import_role" && task.module != "ansible.builtin.include_role" {
        return None;
    }
    let name = task.args.get("name")?.as_str()?.to_string();
    let from = task
        .args
        .get("tasks_from")
        .and_then(Value::as_str)
        .map(str::to_string);
    Some((name, from))
}

fn read_yaml_file(path: &Path) -> Result<Option<String>, InfillError> {
    for candidate in [path.with_extension("yml"), path.with_extension("yaml")] {
        if candidate.is_file() {
            return std::fs::read_to_string(&candidate)
                .map(Some)
                .map_err(|e| InfillError::Io {
                    path: candidate,
                    message: e.to_string(),
                });
        }
    }
    Ok(None)
}

fn read_var_map(text: &str, path: &Path) -> Result<IndexMap<String, Value>, InfillError> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| InfillError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    match Value::from(&doc) {
        Value::Map(m) => Ok(m),
        Value::Null => Ok(IndexMap::new()),
        other => Err(InfillError::Malformed {
            path: path.to_path_buf(),
            message: format!("expected a mapping of variables, found {other}"),
        }),
    }
}

fn load_role(
    ctx: &RoleContext,
    name: &str,
    tasks_from: Option<&str>,
    stack: &mut Vec<String>,
) -> Result<LoadedRole, InfillError> {
    if stack.iter().any(|s| s == name) {
        return Err(InfillError::RoleCycle(name.to_string()));
    }
    let dir = ctx.role_dir(name).ok_or_else(|| InfillError::MissingRole {
        role: name.to_string(),
        root: ctx.root.clone(),
    })?;
    stack.push(name.to_string());

    let mut loaded = LoadedRole {
        tasks: Vec::new(),
        defaults: IndexMap::new(),
        vars: IndexMap::new(),
    };
    // Dependencies run first and contribute their variables.
    if let Some(text) = read_yaml_file(&dir.join("meta").join("main"))? {
        let meta = read_var_map(&text, &dir.join("meta/main.yml"))?;
        if let Some(Value::List(deps)) = meta.get("dependencies") {
            for dep in deps {
                if let Some(dep_name) = role_entry_name(dep) {
                    let d = load_role(ctx, &dep_name, None, stack)?;
                    loaded.defaults.extend(d.defaults);
                    loaded.vars.extend(d.vars);
                    let (params, inherited) = split_role_entry(dep);
                    loaded.vars.extend(params);
                    loaded.tasks.extend(d.tasks.into_iter().map(|t| inherit(t, &inherited)));
                }
            }
        }
    }
    if let Some(text) = read_yaml_file(&dir.join("defaults").join("main"))? {
        loaded.defaults.extend(read_var_map(&text, &dir.join("defaults/main.yml"))?);
    }
    if let Some(text) = read_yaml_file(&dir.join("vars").join("main"))? {
        loaded.vars.extend(read_var_map(&text, &dir.join("vars/main.yml"))?);
    }
    let task_file = dir.join("tasks").join(tasks_from.unwrap_or("main"));
    if let Some(text) = read_yaml_file(&task_file)? {
        let tasks = parse_task_list(&text).map_err(|e| InfillError::Malformed {
            path: task_file.clone(),
            message: e.to_string(),
        })?;
        loaded.tasks.extend(tasks);
    }
    stack.pop();
    Ok(loaded)
}

#[derive(Default)]
struct Resolver {
    merged: IndexMap<String, (VarLayer, Value)>,
}

impl Resolver {
    fn push(&mut self, layer: VarLayer, vars: IndexMap<String, Value>) {
        for (k, v) in vars {
            self.merged.insert(k, (layer, v));
        }
    }

    /// Fully substituted value of `name`; `None` if undefined or if its
    /// definition refers back to itself.
    fn resolve(&self, name: &str, depth: usize) -> Option<Value> {
        if depth > 16 {
            return None;
        }
        let (_, raw) = self.merged.get(name)?;
        self.expand(raw, depth + 1)
    }

    fn expand(&self, value: &Value, depth: usize) -> Option<Value> {
        Some(match value {
            Value::Str(s) => {
                let exprs = jinja::expressions(s);
                if exprs.is_empty() {
                    return Some(value.clone());
                }
                if exprs.len() == 1 && exprs[0].start == 0 && exprs[0].end == s.len() {
                    if let Some(name) = exprs[0].bare_name() {
                        return self.resolve(name, depth);
                    }
                }
                let mut out = String::new();
                let mut pos = 0;
                for e in exprs {
                    out.push_str(&s[pos..e.start]);
                    match e.bare_name().and_then(|n| self.resolve(n, depth)) {
                        Some(v) => out.push_str(&v.scalar_text()?),
                        None => out.push_str(&s[e.start..e.end]),
                    }
                    pos = e.end;
                }
                out.push_str(&s[pos..]);
                Value::Str(out)
            }
            Value::List(items) => Value::List(
                items
                    .iter()
                    .map(|v| self.expand(v, depth))
                    .collect::<Option<_>>()?,
            ),
            Value::Map(m) => Value::Map(
                m.iter()
                    .map(|(k, v)| Some((k.clone(), self.expand(v, depth)?)))
                    .collect::<Option<_>>()?,
            ),
            other => other.clone(),
        })
    }
}

struct Substituter<'a> {
    resolver: &'a Resolver,
    runtime: &'a HashSet<String>,
    at: &'a str,
    diagnostics: &'a mut Vec<Diagnostic>,
}

impl Substituter<'_> {
    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Str(s) => self.string(s),
            Value::List(items) => Value::List(items.iter().map(|i| self.value(i)).collect()),
            Value::Map(m) => Value::Map(m.iter().map(|(k, v)| (k.clone(), self.value(v))).collect()),
            other => other.clone(),
        }
    }

    fn string_text(&mut self, s: &str) -> String {
        match self.string(s) {
            Value::Str(t) => t,
            other => other.to_string(),
        }
    }

    fn string(&mut self, s: &str) -> Value {
        let exprs = jinja::expressions(s);
        if exprs.is_empty() {
            return Value::Str(s.to_string());
        }
        let whole = exprs.len() == 1 && exprs[0].start == 0 && exprs[0].end == s.len();
        let mut out = String::new();
        let mut pos = 0;
        for e in &exprs {
            out.push_str(&s[pos..e.start]);
            pos = e.end;
            let verbatim = &s[e.start..e.end];
            let Some(name) = e.bare_name() else {
                out.push_str(verbatim);
                continue;
            };
            match self.resolver.resolve(name, 0) {
                Some(v) if v.is_scalar() => out.push_str(&v.scalar_text().unwrap_or_default()),
                Some(v) if whole => return v,
                Some(_) => {
                    self.report(name, "is not a scalar and is embedded in text");
                    out.push_str(verbatim);
                }
                None => {
                    if !self.runtime.contains(name) && !is_runtime_name(name) {
                        self.report(name, "has no definition in any variable source");
                    }
                    out.push_str(verbatim);
                }
            }
        }
        out.push_str(&s[pos..]);
        Value::Str(out)
    }

    fn report(&mut self, name: &str, why: &str) {
        let message = format!("{}: variable `{name}` {why}", self.at);
        if !self.diagnostics.iter().any(|d| d.message == message) {
            self.diagnostics.push(Diagnostic::new("ANS_UNRESOLVED_VAR", message));
        }
    }
}

fn is_runtime_name(name: &str) -> bool {
    name == "item"
        || name.starts_with("ansible_")
        || matches!(
            name,
            "hostvars" | "groups" | "group_names" | "inventory_hostname" | "inventory_hostname_short" | "omit"
                | "play_hosts" | "playbook_dir" | "role_path" | "role_name"
        )
}
