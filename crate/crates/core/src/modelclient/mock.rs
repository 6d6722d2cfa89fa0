//! Scripted offline endpoint.
//!
//! ```json
//! {"rules": [
//!    {"contains": "Task: list files", "replies": ["ls\n```"]},
//!    {"exact": "...", "replies": ["a", "b"], "fail": false}
//!  ],
//!  "default": ["echo hi\n```"]}
//! ```
//!
//! The first matching rule answers; sample `k` gets `replies[k % len]`. A
//! rule with `"fail": true` answers with a transport error instead.

use std::path::Path;

use serde::Deserialize;

use super::{ClientError, Completer};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(default)]
    pub contains: Option<String>,
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub replies: Vec<String>,
    #[serde(default)]
    pub fail: bool,
}

impl MockRule {
    fn matches(&self, prompt: &str) -> bool {
        self.exact.as_deref().is_none_or(|e| e == prompt) && self.contains.as_deref().is_none_or(|c| prompt.contains(c))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockCompleter {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub default: Vec<String>,
}

impl MockCompleter {
    pub fn from_json(text: &str) -> Result<Self, ClientError> {
        let mock: MockCompleter = serde_json::from_str(text).map_err(|e| ClientError::Config(format!("mock script: {e}")))?;
        if let Some(i) = mock.rules.iter().position(|r| !r.fail && r.replies.is_empty()) {
            return Err(ClientError::Config(format!("mock rule {} has no replies", i + 1)));
        }
        Ok(mock)
    }

    pub fn load(path: &Path) -> Result<Self, ClientError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClientError::Config(format!("cannot read mock script {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn pick(replies: &[String], sample: usize) -> String {
    replies[sample % replies.len()].clone()
}

impl Completer for MockCompleter {
    fn complete(&self, prompt: &str, sample: usize) -> Result<String, ClientError> {
        match self.rules.iter().find(|r| r.matches(prompt)) {
            Some(r) if r.fail => Err(ClientError::Transport {
                attempts: 1,
                message: "scripted failure".into(),
            }),
            Some(r) => Ok(pick(&r.replies, sample)),
            None if !self.default.is_empty() => Ok(pick(&self.default, sample)),
            None => Err(ClientError::Transport {
                attempts: 1,
                message: "no mock rule matches the prompt".into(),
            }),
        }
    }
}
