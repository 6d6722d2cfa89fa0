//! Generation, repair and in-context-learning prompt templates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptRole {
    Generate,
    Repair,
    Icl,
}

impl PromptRole {
    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            PromptRole::Generate => &["task"],
            PromptRole::Repair => &["query", "output", "feedback"],
            PromptRole::Icl => &["examples", "task"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub role: PromptRole,
    pub language: Language,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no value supplied for placeholder {{{0}}}")]
    MissingPlaceholder(String),
}

const ANSIBLE_INTRO: &str = "You are an expert in Ansible. The user will give you a task description and ask you to generate an Ansible playbook to complete the given task. You only need to output the content of the playbook. DO NOT use any shell commands (ansible.builtin.shell, ansible.builtin.command, etc.) in the playbook.";

fn command_intro(lang: &str, what: &str) -> String {
    format!(
        "You are an expert in {lang}. The user will give you a task description and ask you to generate a {what} command to complete the given task. You only need to output the content of the command."
    )
}

fn intro(language: Language) -> String {
    match language {
        Language::Ansible => ANSIBLE_INTRO.to_string(),
        Language::Bash => command_intro("Bash", "bash"),
        Language::Sql => command_intro("SQL", "SQL"),
    }
}

/// (noun, the artifact named with its language)
fn nouns(language: Language) -> (&'static str, &'static str) {
    match language {
        Language::Ansible => ("playbook", "Ansible playbook"),
        Language::Bash => ("command", "Bash command"),
        Language::Sql => ("command", "SQL command"),
    }
}

fn repair_body(language: Language) -> String {
    let (noun, object) = nouns(language);
    format!(
        "You are an expert in {name}. You are asked to fix a possibly incorrect {object}. You will be provided with the {noun} to fix, the user input, and feedback from an interpreter that lists all syntactic errors in the {noun}. Your goal is to fix the syntactic errors in the {noun} (if any) while following the user's instruction. You only need to output the content of the modified {noun}.\n\
         \n\
         User query: {{query}}\n\
         \n\
         Original {noun}:\n\
         {{output}}\n\
         \n\
         Interpreter feedback:\n\
         {{feedback}}\n\
         \n\
         Answer: ```{tag}",
        name = language.display_name(),
        tag = language.fence_tag(),
    )
}

pub fn template(role: PromptRole, language: Language) -> PromptTemplate {
    let tag = language.fence_tag();
    let body = match role {
        PromptRole::Generate => format!("{}\n\nTask: {{task}}\n\nAnswer: ```{tag}", intro(language)),
        PromptRole::Repair => repair_body(language),
        PromptRole::Icl => format!(
            "{}\nThe following are some example input queries and corresponding {}s for your reference:\n{{examples}}\nTask: {{task}}\nAnswer: ```{tag}",
            intro(language),
            nouns(language).1,
        ),
    };
    PromptTemplate { role, language, body }
}

/// Single left-to-right pass: each `{name}` of the role's placeholder set is
/// replaced by its fill verbatim; substituted text is never rescanned.
pub fn render_prompt(t: &PromptTemplate, fills: &HashMap<&str, &str>) -> Result<String, PromptError> {
    let names = t.role.placeholders();
    if let Some(missing) = names.iter().find(|n| !fills.contains_key(*n)) {
        return Err(PromptError::MissingPlaceholder(missing.to_string()));
    }
    let mut out = String::with_capacity(t.body.len() + fills.values().map(|v| v.len()).sum::<usize>());
    let mut rest = t.body.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').map(|close| &after[..close]) {
            Some(name) if names.contains(&name) => {
                out.push_str(fills[name]);
                rest = &after[name.len() + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Few-shot block for `{examples}`: `Task: ..\nAnswer: ..` pairs separated by
/// blank lines.
pub fn format_examples<'a>(examples: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    examples
        .into_iter()
        .map(|(task, answer)| format!("Task: {task}\nAnswer: {answer}"))
        .collect::<Vec<_>>()
        .join("\n\n")
}
