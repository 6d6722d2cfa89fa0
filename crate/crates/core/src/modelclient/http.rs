//! OpenAI-compatible completion endpoint over HTTP.

use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::{ClientError, Completer, EndpointConfig};

pub struct HttpCompleter {
    config: EndpointConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

enum Attempt {
    Retry(String),
    Fail(ClientError),
}

impl HttpCompleter {
    pub fn new(config: EndpointConfig) -> Result<Self, ClientError> {
        let api_key = config.resolve_api_key()?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build();
        Ok(HttpCompleter { config, api_key, agent })
    }

    fn url(&self) -> String {
        let base = self.config.base_url.trim_end_matches('/');
        if self.config.chat {
            format!("{base}/chat/completions")
        } else {
            format!("{base}/completions")
        }
    }

    fn body(&self, prompt: &str) -> Value {
        let c = &self.config;
        let mut body = json!({
            "model": c.model,
            "temperature": c.temperature,
            "max_tokens": c.max_tokens,
        });
        if c.chat {
            body["messages"] = json!([{"role": "user", "content": prompt}]);
        } else {
            body["prompt"] = json!(prompt);
        }
        body
    }

    fn attempt(&self, body: &Value) -> Result<String, Attempt> {
        let mut req = self.agent.post(&self.url());
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(resp) => {
                let v: Value = resp
                    .into_json()
                    .map_err(|e| Attempt::Retry(format!("unreadable response body: {e}")))?;
                let choice = &v["choices"][0];
                let text = if self.config.chat {
                    &choice["message"]["content"]
                } else {
                    &choice["text"]
                };
                text.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Attempt::Fail(ClientError::Protocol(format!("no completion text in response: {v}"))))
            }
            Err(ureq::Error::Status(code @ (401 | 403), _)) => Err(Attempt::Fail(ClientError::Auth(code))),
            Err(ureq::Error::Status(code, _)) if code == 429 || code >= 500 => Err(Attempt::Retry(format!("HTTP {code}"))),
            Err(ureq::Error::Status(code, resp)) => {
                let detail = resp.into_string().unwrap_or_default();
                Err(Attempt::Fail(ClientError::Http { status: code, body: detail }))
            }
            Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(t.to_string())),
        }
    }
}

impl Completer for HttpCompleter {
    /// Retries transport failures, 429 and 5xx with exponential backoff.
    fn complete(&self, prompt: &str, _sample: usize) -> Result<String, ClientError> {
        let body = self.body(prompt);
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for i in 0..attempts {
            if i > 0 {
                let wait = self.config.backoff_ms.saturating_mul(1 << (i - 1).min(16));
                thread::sleep(Duration::from_millis(wait));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    log::warn!("{} attempt {}/{attempts} failed: {msg}", self.config.base_url, i + 1);
                    last = msg;
                }
            }
        }
        Err(ClientError::Transport {
            attempts,
            message: last,
        })
    }
}
