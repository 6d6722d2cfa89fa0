use indexmap::IndexMap;

use super::value::{key_text, Value};
use super::{AnsibleError, AnsiblePlay, AnsiblePlaybook, AnsibleTask};
use crate::types::{Diagnostic, Span};

pub const MODULE_PREFIX: &str = "ansible.builtin.";

const TASK_SECTIONS: &[&str] = &["pre_tasks", "tasks", "post_tasks"];
const BLOCK_SECTIONS: &[&str] = &["block", "rescue", "always"];

/// Task-level keywords. Anything else on a task (besides `name`, block
/// sections and the action forms) is a module key.
const TASK_KEYWORDS: &[&str] = &[
    "any_errors_fatal",
    "async",
    "become",
    "become_exe",
    "become_flags",
    "become_method",
    "become_user",
    "changed_when",
    "check_mode",
    "collections",
    "connection",
    "debugger",
    "delay",
    "delegate_facts",
    "delegate_to",
    "diff",
    "environment",
    "failed_when",
    "ignore_errors",
    "ignore_unreachable",
    "listen",
    "loop",
    "loop_control",
    "module_defaults",
    "no_log",
    "notify",
    "poll",
    "port",
    "register",
    "remote_user",
    "retries",
    "run_once",
    "tags",
    "throttle",
    "timeout",
    "until",
    "vars",
    "when",
];

fn is_task_keyword(key: &str) -> bool {
    TASK_KEYWORDS.contains(&key) || key.starts_with("with_")
}

fn err(code: &str, message: impl Into<String>) -> AnsibleError {
    AnsibleError::Parse(Diagnostic::new(code, message))
}

/// Canonical module key: short names get the builtin namespace.
pub(crate) fn canonical_module(key: &str) -> String {
    let key = key.trim();
    if let Some(rest) = key.strip_prefix("ansible.legacy.") {
        format!("{MODULE_PREFIX}{rest}")
    } else if key.contains('.') {
        key.to_string()
    } else {
        format!("{MODULE_PREFIX}{key}")
    }
}

/// Parse playbook YAML into plays and flattened tasks.
pub fn parse_playbook(text: &str) -> Result<AnsiblePlaybook, AnsibleError> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| {
        let mut d = Diagnostic::new("ANS_YAML", yaml_message(&e));
        if let Some(loc) = e.location() {
            d = d.with_span(Span::new(loc.line(), loc.column()));
        }
        AnsibleError::Parse(d)
    })?;
    let serde_yaml::Value::Sequence(items) = doc else {
        return Err(err(
            "ANS_NOT_A_PLAYBOOK",
            format!("document root must be a list of plays, found {}", kind_name(&doc)),
        ));
    };
    if items.is_empty() {
        return Err(err("ANS_NOT_A_PLAYBOOK", "playbook contains no plays"));
    }
    let plays = items
        .iter()
        .enumerate()
        .map(|(i, item)| parse_play(i + 1, item))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnsiblePlaybook { plays })
}

fn yaml_message(e: &serde_yaml::Error) -> String {
    // Location is carried by the span; keep the message stable.
    let msg = e.to_string();
    match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}

fn kind_name(v: &serde_yaml::Value) -> &'static str {
    match v {
        serde_yaml::Value::Null => "an empty document",
        serde_yaml::Value::Bool(_) => "a boolean",
        serde_yaml::Value::Number(_) => "a number",
        serde_yaml::Value::String(_) => "a string",
        serde_yaml::Value::Sequence(_) => "a list",
        serde_yaml::Value::Mapping(_) => "a mapping",
        serde_yaml::Value::Tagged(_) => "a tagged value",
    }
}

fn parse_play(index: usize, item: &serde_yaml::Value) -> Result<AnsiblePlay, AnsibleError> {
    let serde_yaml::Value::Mapping(map) = item else {
        return Err(err(
            "ANS_BAD_PLAY",
            format!("play {index} must be a mapping, found {}", kind_name(item)),
        ));
    };
    let mut tasks = Vec::new();
    let mut config = IndexMap::new();
    for (k, v) in map {
        let key = key_text(k);
        if TASK_SECTIONS.contains(&key.as_str()) {
            let where_ = format!("play {index} `{key}`");
            match v {
                serde_yaml::Value::Null => {}
                serde_yaml::Value::Sequence(items) => {
                    flatten_tasks(items, &IndexMap::new(), &where_, &mut tasks)?
                }
                other => {
                    return Err(err(
                        "ANS_BAD_PLAY",
                        format!("{where_} must be a list of tasks, found {}", kind_name(other)),
                    ))
                }
            }
        } else {
            config.insert(key, Value::from(v));
        }
    }
    Ok(AnsiblePlay { tasks, config })
}

/// Parse a bare task list (a role's `tasks/main.yml`).
pub fn parse_task_list(text: &str) -> Result<Vec<AnsibleTask>, AnsibleError> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text)
        .map_err(|e| err("ANS_YAML", yaml_message(&e)))?;
    let mut tasks = Vec::new();
    match &doc {
        serde_yaml::Value::Null => {}
        serde_yaml::Value::Sequence(items) => {
            flatten_tasks(items, &IndexMap::new(), "task file", &mut tasks)?
        }
        other => {
            return Err(err(
                "ANS_BAD_TASK",
                format!("task file must be a list, found {}", kind_name(other)),
            ))
        }
    }
    Ok(tasks)
}

fn flatten_tasks(
    items: &[serde_yaml::Value],
    inherited: &IndexMap<String, Value>,
    where_: &str,
    out: &mut Vec<AnsibleTask>,
) -> Result<(), AnsibleError> {
    for (i, item) in items.iter().enumerate() {
        let here = format!("{where_} item {}", i + 1);
        let serde_yaml::Value::Mapping(map) = item else {
            return Err(err(
                "ANS_BAD_TASK",
                format!("{here} must be a mapping, found {}", kind_name(item)),
            ));
        };
        let is_block = map
            .keys()
            .any(|k| BLOCK_SECTIONS.contains(&key_text(k).as_str()));
        if is_block {
            let mut directives = inherited.clone();
            for (k, v) in map {
                let key = key_text(k);
                if key != "name" && !BLOCK_SECTIONS.contains(&key.as_str()) {
                    directives.insert(key, Value::from(v));
                }
            }
            for section in BLOCK_SECTIONS {
                match map.get(*section) {
                    None | Some(serde_yaml::Value::Null) => {}
                    Some(serde_yaml::Value::Sequence(inner)) => {
                        flatten_tasks(inner, &directives, &format!("{here} {section}"), out)?
                    }
                    Some(other) => {
                        return Err(err(
                            "ANS_BAD_TASK",
                            format!("{here} `{section}` must be a list, found {}", kind_name(other)),
                        ))
                    }
                }
            }
        } else {
            let mut task = parse_task(map, &here)?;
            for (k, v) in inherited {
                if !task.directives.contains_key(k) {
                    task.directives.insert(k.clone(), v.clone());
                }
            }
            out.push(task);
        }
    }
    Ok(())
}

fn parse_task(map: &serde_yaml::Mapping, here: &str) -> Result<AnsibleTask, AnsibleError> {
    let mut name = None;
    let mut directives = IndexMap::new();
    let mut extra_args: Option<IndexMap<String, Value>> = None;
    let mut modules: Vec<(String, &serde_yaml::Value)> = Vec::new();
    let mut action: Option<(String, IndexMap<String, Value>)> = None;

    for (k, v) in map {
        let key = key_text(k);
        match key.as_str() {
            "name" => {
                name = Some(match Value::from(v) {
                    Value::Str(s) => s,
                    other => other.to_string(),
                })
            }
            "args" => match Value::from(v) {
                Value::Map(m) => extra_args = Some(m),
                Value::Null => {}
                other => {
                    return Err(err(
                        "ANS_BAD_ARGS",
                        format!("{here}: `args` must be a mapping, found {other}"),
                    ))
                }
            },
            "action" | "local_action" => {
                if key == "local_action" {
                    directives.insert("delegate_to".to_string(), Value::from("localhost"));
                }
                action = Some(parse_action(v, here)?);
            }
            k if is_task_keyword(k) => {
                directives.insert(key, Value::from(v));
            }
            _ => modules.push((key, v)),
        }
    }

    let (module, mut args) = match (action, modules.len()) {
        (Some(a), 0) => a,
        (None, 1) => {
            let (key, v) = &modules[0];
            (canonical_module(key), module_args(v, here)?)
        }
        (None, 0) => {
            return Err(err("ANS_NO_MODULE", format!("{here}: task does not invoke a module")))
        }
        (action, _) => {
            let mut keys: Vec<String> = modules.iter().map(|(k, _)| k.clone()).collect();
            if let Some((m, _)) = action {
                keys.insert(0, m);
            }
            return Err(err(
                "ANS_AMBIGUOUS_MODULE",
                format!("{here}: task has several module keys: {}", keys.join(", ")),
            ));
        }
    };
    if let Some(extra) = extra_args {
        for (k, v) in extra {
            args.entry(k).or_insert(v);
        }
    }
    Ok(AnsibleTask {
        name,
        module,
        args,
        directives,
    })
}

fn parse_action(
    v: &serde_yaml::Value,
    here: &str,
) -> Result<(String, IndexMap<String, Value>), AnsibleError> {
    match Value::from(v) {
        Value::Str(s) => {
            let s = s.trim();
            let (module, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
            if module.is_empty() {
                return Err(err("ANS_NO_MODULE", format!("{here}: empty `action`")));
            }
            Ok((canonical_module(module), parse_short_form(rest)))
        }
        Value::Map(mut m) => match m.shift_remove("module") {
            Some(Value::Str(module)) => Ok((canonical_module(&module), m)),
            _ => Err(err("ANS_NO_MODULE", format!("{here}: `action` mapping lacks `module`"))),
        },
        other => Err(err(
            "ANS_BAD_ARGS",
            format!("{here}: `action` must be a string or mapping, found {other}"),
        )),
    }
}

fn module_args(v: &serde_yaml::Value, here: &str) -> Result<IndexMap<String, Value>, AnsibleError> {
    match Value::from(v) {
        Value::Null => Ok(IndexMap::new()),
        Value::Map(m) => Ok(m),
        Value::Str(s) => Ok(parse_short_form(&s)),
        other => Err(err(
            "ANS_BAD_ARGS",
            format!("{here}: module arguments must be a mapping or key=value text, found {other}"),
        )),
    }
}

/// Split `k=v k2="quoted value" free text` into an argument map. Tokens
/// that are not `key=value` are joined into `_raw_params`.
pub(crate) fn parse_short_form(text: &str) -> IndexMap<String, Value> {
    let mut args = IndexMap::new();
    let mut raw: Vec<&str> = Vec::new();
    for (start, end) in split_tokens(text) {
        let token = &text[start..end];
        match token.split_once('=') {
            Some((k, v)) if super::jinja::is_identifier(k) => {
                args.insert(k.to_string(), Value::Str(unquote(v)));
            }
            _ => raw.push(token),
        }
    }
    if !raw.is_empty() {
        args.insert("_raw_params".to_string(), Value::Str(raw.join(" ")));
    }
    args
}

/// Whitespace-separated token ranges, keeping quoted runs and `{{ }}`
/// expressions intact.
fn split_tokens(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        let start = i;
        let mut quote: Option<u8> = None;
        let mut depth = 0usize;
        while i < bytes.len() {
            let c = bytes[i];
            match quote {
                Some(q) => {
                    if c == b'\\' {
                        i += 1;
                    } else if c == q {
                        quote = None;
                    }
                }
                None => {
                    if c.is_ascii_whitespace() && depth == 0 {
                        break;
                    }
                    if c == b'\'' || c == b'"' {
                        quote = Some(c);
                    } else if text[i..].starts_with("{{") {
                        depth += 1;
                        i += 1;
                    } else if text[i..].starts_with("}}") && depth > 0 {
                        depth -= 1;
                        i += 1;
                    }
                }
            }
            i += 1;
        }
        out.push((start, i.min(bytes.len())));
    }
    out
}

fn unquote(v: &str) -> String {
    let b = v.as_bytes();
    if b.len() >= 2 && (b[0] == b'"' || b[0] == b'\'') && b[b.len() - 1] == b[0] {
        let inner = &v[1..v.len() - 1];
        let q = b[0] as char;
        inner.replace(&format!("\\{q}"), &q.to_string())
    } else {
        v.to_string()
    }
}
