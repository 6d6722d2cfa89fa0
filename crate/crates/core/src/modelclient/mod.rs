//! Text-generation endpoints (HTTP or scripted mock), request budgeting and
//! logging, prompt templates and code extraction from replies.

mod http;
mod mock;
mod prompts;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::Language;

pub use http::HttpCompleter;
pub use mock::{MockCompleter, MockRule};
pub use prompts::{format_examples, render_prompt, template, PromptError, PromptRole, PromptTemplate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    /// Label used in logs and synthesis records; defaults to the model name.
    pub name: Option<String>,
    /// `http(s)://...` for an OpenAI-compatible server, or `mock:<script.json>`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: Option<String>,
    /// Literal key, normally `${VAR}` in config files.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// Use `/chat/completions` instead of `/completions`.
    pub chat: bool,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            name: None,
            base_url: String::new(),
            model: String::new(),
            api_key_env: None,
            api_key: None,
            temperature: 0.0,
            max_tokens: 512,
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_ms: 500,
            chat: false,
        }
    }
}

impl EndpointConfig {
    pub fn mock(script: &Path) -> Self {
        EndpointConfig {
            base_url: format!("mock:{}", script.display()),
            model: "mock".into(),
            ..EndpointConfig::default()
        }
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.model)
    }

    pub fn check(&self) -> Result<(), ClientError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ClientError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(ClientError::Config(format!("timeout must be > 0, got {}", self.timeout_secs)));
        }
        if self.base_url.is_empty() {
            return Err(ClientError::Config("base_url is empty".into()));
        }
        Ok(())
    }

    pub(crate) fn resolve_api_key(&self) -> Result<Option<String>, ClientError> {
        if let Some(k) = &self.api_key {
            return Ok(Some(k.clone()));
        }
        match &self.api_key_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| ClientError::Config(format!("environment variable {var} is not set"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint rejected credentials (HTTP {0})")]
    Auth(u16),
    #[error("request budget of {limit} exhausted")]
    Budget { limit: usize },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("{0}")]
    Config(String),
}

/// One completion backend. `sample` distinguishes repeated draws for the
/// same prompt.
pub trait Completer {
    fn complete(&self, prompt: &str, sample: usize) -> Result<String, ClientError>;
}

/// Run-wide request cap shared by every client.
#[derive(Debug)]
pub struct Budget {
    limit: usize,
    used: AtomicUsize,
}

pub const DEFAULT_BUDGET: usize = 500;

impl Budget {
    pub fn new(limit: usize) -> Arc<Self> {
        Arc::new(Budget {
            limit,
            used: AtomicUsize::new(0),
        })
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst).min(self.limit)
    }

    fn take(&self) -> Result<(), ClientError> {
        if self.used.fetch_add(1, Ordering::SeqCst) < self.limit {
            Ok(())
        } else {
            Err(ClientError::Budget { limit: self.limit })
        }
    }
}

#[derive(Serialize)]
struct LogLine<'a> {
    endpoint: &'a str,
    sample: usize,
    latency_ms: u128,
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reply: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// JSONL request/response log.
pub struct RequestLog {
    out: Mutex<BufWriter<File>>,
}

impl RequestLog {
    pub fn create(path: &Path) -> std::io::Result<Arc<Self>> {
        Ok(Arc::new(RequestLog {
            out: Mutex::new(BufWriter::new(File::create(path)?)),
        }))
    }

    fn write(&self, line: &LogLine<'_>) {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        let res = serde_json::to_writer(&mut *out, line)
            .map_err(std::io::Error::from)
            .and_then(|_| out.write_all(b"\n"))
            .and_then(|_| out.flush());
        if let Err(e) = res {
            log::warn!("request log write failed: {e}");
        }
    }
}

pub struct Client {
    name: String,
    completer: Box<dyn Completer + Send + Sync>,
    budget: Arc<Budget>,
    log: Option<Arc<RequestLog>>,
}

impl Client {
    pub fn new(name: impl Into<String>, completer: impl Completer + Send + Sync + 'static, budget: Arc<Budget>) -> Self {
        Client {
            name: name.into(),
            completer: Box::new(completer),
            budget,
            log: None,
        }
    }

    /// Mock for `mock:<path>` URLs, HTTP otherwise.
    pub fn from_config(config: &EndpointConfig, budget: Arc<Budget>) -> Result<Self, ClientError> {
        config.check()?;
        let name = config.label().to_string();
        Ok(match config.base_url.strip_prefix("mock:") {
            Some(path) => Client::new(name, MockCompleter::load(Path::new(path))?, budget),
            None => Client::new(name, HttpCompleter::new(config.clone())?, budget),
        })
    }

    pub fn with_log(mut self, log: Arc<RequestLog>) -> Self {
        self.log = Some(log);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn complete(&self, prompt: &str, sample: usize) -> Result<String, ClientError> {
        self.budget.take()?;
        let start = Instant::now();
        let result = self.completer.complete(prompt, sample);
        if let Some(log) = &self.log {
            log.write(&LogLine {
                endpoint: &self.name,
                sample,
                latency_ms: start.elapsed().as_millis(),
                prompt,
                reply: result.as_deref().ok(),
                error: result.as_ref().err().map(ToString::to_string),
            });
        }
        result
    }
}

const FENCE: &str = "```";

/// Program text from a reply to a prompt that ends in an opened fence.
///
/// A reply that opens its own fence (```` ```bash ```` ...) yields that
/// block; otherwise everything before the first fence. Without any fence
/// the whole reply is used. A first line that is just the language tag is
/// dropped.
pub fn extract_code(reply: &str, language: Language) -> String {
    let body = reply.trim_start_matches(['\n', '\r']);
    let code = match body.find(FENCE) {
        None => return strip_tag(reply.trim(), language).to_string(),
        Some(i) => {
            let after = &body[i + FENCE.len()..];
            let (opener, rest) = after.split_once('\n').unwrap_or((after, ""));
            let opens_block = body[..i].trim().is_empty() || (is_tag(opener) && rest.contains(FENCE));
            if opens_block {
                rest.find(FENCE).map_or(rest, |j| &rest[..j])
            } else {
                &body[..i]
            }
        }
    };
    strip_tag(code.trim_start_matches(['\n', '\r']).trim_end(), language).to_string()
}

fn is_tag(s: &str) -> bool {
    let s = s.trim();
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '+')
}

fn strip_tag(code: &str, language: Language) -> &str {
    let tags: &[&str] = match language {
        Language::Ansible => &["yaml", "yml", "ansible"],
        Language::Bash => &["bash", "sh", "shell"],
        Language::Sql => &["sql"],
    };
    match code.split_once('\n') {
        Some((first, rest)) if tags.contains(&first.trim().to_ascii_lowercase().as_str()) => rest,
        None if tags.contains(&code.trim().to_ascii_lowercase().as_str()) => "",
        _ => code,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn extraction_rules() {
        assert_eq!(extract_code("a: 1\n```", Language::Ansible), "a: 1");
        assert_eq!(extract_code("  ls -l  \n", Language::Bash), "ls -l");
        assert_eq!(extract_code("```bash\nls\n```\nthen\n```bash\npwd\n```", Language::Bash), "ls");
        assert_eq!(extract_code("Here you go:\n```sql\nSELECT 1\n```", Language::Sql), "SELECT 1");
        assert_eq!(extract_code("SELECT 1\n```\n\nExplanation: ```x```", Language::Sql), "SELECT 1");
        assert_eq!(extract_code("sql\nSELECT 1\n```", Language::Sql), "SELECT 1");
        assert_eq!(extract_code("- hosts: all\n  tasks: []\n```", Language::Ansible), "- hosts: all\n  tasks: []");
    }

    #[test]
    fn reply_returned_verbatim() {
        let mock = MockCompleter::from_json(r#"{"default": ["```bash\nls\n```"]}"#).unwrap();
        let c = Client::new("m", mock, Budget::new(5));
        assert_eq!(c.complete("p", 0).unwrap(), "```bash\nls\n```");
    }

    #[test]
    fn budget_is_enforced() {
        let budget = Budget::new(2);
        let c = Client::new("m", MockCompleter::from_json(r#"{"default": ["x"]}"#).unwrap(), budget.clone());
        assert!(c.complete("a", 0).is_ok());
        assert!(c.complete("b", 0).is_ok());
        assert_eq!(c.complete("c", 0), Err(ClientError::Budget { limit: 2 }));
        assert_eq!(budget.used(), 2);
    }

    #[test]
    fn request_log_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("req.jsonl");
        let c = Client::new("m", MockCompleter::from_json(r#"{"default": ["ok"]}"#).unwrap(), Budget::new(5))
            .with_log(RequestLog::create(&path).unwrap());
        c.complete("hello", 1).unwrap();
        let line: serde_json::Value = serde_json::from_str(std::fs::read_to_string(&path).unwrap().trim()).unwrap();
        assert_eq!(line["prompt"], "hello");
        assert_eq!(line["reply"], "ok");
        assert_eq!(line["sample"], 1);
        assert!(line["latency_ms"].is_u64());
    }

    #[test]
    fn config_checks() {
        let mut c = EndpointConfig {
            base_url: "http://x".into(),
            ..EndpointConfig::default()
        };
        assert!(c.check().is_ok());
        c.temperature = -0.1;
        assert!(c.check().is_err());
        c.temperature = 0.0;
        c.timeout_secs = 0.0;
        assert!(c.check().is_err());
        let missing = EndpointConfig {
            base_url: "mock:/nonexistent.json".into(),
            ..EndpointConfig::default()
        };
        assert!(matches!(Client::from_config(&missing, Budget::new(1)), Err(ClientError::Config(_))));
    }

    proptest! {
        #[test]
        fn fence_wrap_roundtrip(code in "[a-z0-9 =|;:.-]{0,20}(\n[a-z0-9 =|;:.-]{1,20}){0,3}", lang in prop::sample::select(Language::ALL.to_vec())) {
            let code = code.trim().to_string();
            prop_assume!(strip_tag(&code, lang) == code);
            let wrapped = format!("{FENCE}{}\n{code}\n{FENCE}", lang.fence_tag());
            prop_assert_eq!(extract_code(&wrapped, lang), code.clone());
            let continued = format!("{code}\n{FENCE}");
            prop_assert_eq!(extract_code(&continued, lang), code);
        }
    }
}
