use std::collections::HashSet;

use super::jinja;
use super::registry::ModuleSpecRegistry;
use super::value::Value;
use super::{parse_playbook, AnsiblePlay, AnsiblePlaybook, AnsibleTask};
use crate::types::{Diagnostic, ValidationReport};

/// Modules flagged with a warning: generation prompts forbid them.
pub const SHELL_MODULES: &[&str] = &[
    "ansible.builtin.shell",
    "ansible.builtin.command",
    "ansible.builtin.raw",
    "ansible.builtin.script",
];

/// Variables Ansible always provides.
const MAGIC_VARS: &[&str] = &[
    "hostvars",
    "groups",
    "group_names",
    "inventory_hostname",
    "inventory_hostname_short",
    "inventory_dir",
    "inventory_file",
    "play_hosts",
    "playbook_dir",
    "role_name",
    "role_path",
    "omit",
    "vars",
];

/// Keys whose string values are bare Jinja expressions, not templates.
const RAW_EXPRESSION_KEYS: &[&str] = &["when", "changed_when", "failed_when", "until"];

fn is_magic(name: &str) -> bool {
    MAGIC_VARS.contains(&name) || name.starts_with("ansible_")
}

/// Parse then validate; parse failures become the report's diagnostics.
pub fn validate_playbook_text(text: &str, registry: &ModuleSpecRegistry) -> ValidationReport {
    match parse_playbook(text) {
        Ok(pb) => validate_playbook(&pb, registry),
        Err(e) => ValidationReport::from_diagnostics(e.diagnostic().into_iter().cloned().collect()),
    }
}

/// Static checks: known modules, required and mutually exclusive
/// arguments, argument types and defined template variables.
pub fn validate_playbook(pb: &AnsiblePlaybook, registry: &ModuleSpecRegistry) -> ValidationReport {
    let mut diags = Vec::new();
    for (pi, play) in pb.plays.iter().enumerate() {
        let check_vars = !has_opaque_var_sources(play);
        let mut scope: HashSet<String> = play.vars().keys().cloned().collect();
        scope.extend(prompt_names(play));

        if check_vars {
            for (key, value) in &play.config {
                if key != "vars" && key != "roles" && key != "handlers" {
                    check_templates(value, &scope, &format!("play {}", pi + 1), &mut diags);
                }
            }
        }

        for (ti, task) in play.tasks.iter().enumerate() {
            let at = task_location(pi, ti, task);
            check_module(task, registry, &at, &mut diags);
            if check_vars {
                let mut task_scope = scope.clone();
                if let Some(Value::Map(m)) = task.directives.get("vars") {
                    task_scope.extend(m.keys().cloned());
                }
                if let Some(var) = task.loop_var() {
                    task_scope.insert(var);
                }
                check_task_templates(task, &task_scope, &at, &mut diags);
            }
            if let Some(reg) = task.register() {
                scope.insert(reg.to_string());
            }
            if task.module == "ansible.builtin.set_fact" {
                scope.extend(task.args.keys().filter(|k| *k != "cacheable").cloned());
            }
        }
    }
    ValidationReport::from_diagnostics(diags)
}

fn task_location(pi: usize, ti: usize, task: &AnsibleTask) -> String {
    match &task.name {
        Some(name) => format!("play {} task {} ({name})", pi + 1, ti + 1),
        None => format!("play {} task {}", pi + 1, ti + 1),
    }
}

/// Plays whose variables come from files or roles we do not read.
fn has_opaque_var_sources(play: &AnsiblePlay) -> bool {
    play.config.contains_key("vars_files")
        || play.config.contains_key("roles")
        || play.tasks.iter().any(|t| {
            matches!(
                t.module.as_str(),
                "ansible.builtin.include_vars"
                    | "ansible.builtin.include_role"
                    | "ansible.builtin.import_role"
                    | "ansible.builtin.include_tasks"
                    | "ansible.builtin.import_tasks"
            )
        })
}

fn prompt_names(play: &AnsiblePlay) -> Vec<String> {
    match play.config.get("vars_prompt") {
        Some(Value::List(items)) => items
            .iter()
            .filter_map(|i| i.as_map()?.get("name")?.as_str().map(str::to_string))
            .collect(),
        _ => Vec::new(),
    }
}

fn check_module(task: &AnsibleTask, registry: &ModuleSpecRegistry, at: &str, diags: &mut Vec<Diagnostic>) {
    if SHELL_MODULES.contains(&task.module.as_str()) {
        diags.push(Diagnostic::new(
            "ANS_SHELL_MODULE",
            format!("{at}: `{}` runs shell commands", task.module),
        ));
    }
    let Some(spec) = registry.get(&task.module) else {
        diags.push(Diagnostic::new(
            "ANS_UNKNOWN_MODULE",
            format!("{at}: unknown module `{}`", task.module),
        ));
        return;
    };

    // Present arguments by canonical name; null counts as absent.
    let mut present: Vec<(&str, &str, &Value)> = Vec::new();
    for (name, value) in &task.args {
        let canonical = spec.canonical(name);
        if !spec.knows(canonical) && !spec.free_args {
            diags.push(Diagnostic::new(
                "ANS_UNKNOWN_ARG",
                format!("{at}: `{}` does not take argument `{name}`", task.module),
            ));
        }
        if *value != Value::Null {
            present.push((canonical, name, value));
        }
    }
    let has = |arg: &str| present.iter().any(|(c, _, _)| *c == arg);

    for required in &spec.required {
        if !has(required) {
            diags.push(Diagnostic::new(
                "ANS_MISSING_REQUIRED",
                format!("{at}: `{}` requires argument `{required}`", task.module),
            ));
        }
    }
    for group in &spec.mutually_exclusive {
        let set: Vec<&String> = group.iter().filter(|a| has(a)).collect();
        if set.len() > 1 {
            let names: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
            diags.push(Diagnostic::new(
                "ANS_MUTUALLY_EXCLUSIVE",
                format!("{at}: arguments {} are mutually exclusive", names.join(", ")),
            ));
        }
    }
    for (canonical, name, value) in &present {
        if let Some(ty) = spec.arg_types.get(*canonical) {
            if !ty.accepts(value) {
                diags.push(Diagnostic::new(
                    "ANS_ARG_TYPE",
                    format!("{at}: argument `{name}` expects {}, got {value}", ty.name()),
                ));
            }
        }
    }
}

fn check_task_templates(task: &AnsibleTask, scope: &HashSet<String>, at: &str, diags: &mut Vec<Diagnostic>) {
    if let Some(name) = &task.name {
        check_str(name, scope, at, diags);
    }
    for value in task.args.values() {
        check_templates(value, scope, at, diags);
    }
    // `changed_when`, `failed_when` and `until` see the task's own result.
    let mut raw_scope = scope.clone();
    raw_scope.extend(task.register().map(str::to_string));
    for (key, value) in &task.directives {
        if RAW_EXPRESSION_KEYS.contains(&key.as_str()) {
            value.for_each_str(&mut |s| {
                if s.contains("{{") {
                    check_str(s, &raw_scope, at, diags);
                } else {
                    check_body(s, &raw_scope, at, diags);
                }
            });
        } else {
            check_templates(value, scope, at, diags);
        }
    }
}

fn check_templates(value: &Value, scope: &HashSet<String>, at: &str, diags: &mut Vec<Diagnostic>) {
    value.for_each_str(&mut |s| check_str(s, scope, at, diags));
}

fn check_str(s: &str, scope: &HashSet<String>, at: &str, diags: &mut Vec<Diagnostic>) {
    if jinja::has_statement(s) {
        return;
    }
    for expr in jinja::expressions(s) {
        check_body(expr.body, scope, at, diags);
    }
}

fn check_body(body: &str, scope: &HashSet<String>, at: &str, diags: &mut Vec<Diagnostic>) {
    if jinja::is_guarded(body) {
        return;
    }
    for name in jinja::root_names(body) {
        if !scope.contains(name) && !is_magic(name) {
            let message = format!("{at}: variable `{name}` is not defined");
            if !diags.iter().any(|d| d.message == message) {
                diags.push(Diagnostic::new("ANS_UNDEFINED_VAR", message));
            }
        }
    }
}
