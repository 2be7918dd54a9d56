use std::fmt;
use std::time::Duration;

use log::warn;
use serde_json::{json, Value};
use ureq::Agent;

use super::{ChatRequest, LlmClient};
use crate::error::{Error, Result};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "ECG_REGEN_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Endpoint root; requests go to `<base_url>/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub timeout: Duration,
    /// First backoff delay; each further one doubles.
    pub backoff_base: Duration,
    pub max_backoffs: u32,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            timeout: Duration::from_secs(30),
            backoff_base: Duration::from_secs(1),
            max_backoffs: 3,
        }
    }
}

/// Chat-completions client. Retries HTTP 429 and 5xx with exponential
/// backoff; every other failure is returned as [`Error::Llm`].
pub struct HttpLlm {
    cfg: HttpConfig,
    api_key: String,
    agent: Agent,
}

impl fmt::Debug for HttpLlm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpLlm")
            .field("cfg", &self.cfg)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl HttpLlm {
    pub fn new(cfg: HttpConfig, api_key: impl Into<String>) -> Self {
        let agent = Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { cfg, api_key: api_key.into(), agent }
    }

    /// Reads the key from [`API_KEY_ENV`].
    pub fn from_env(cfg: HttpConfig) -> Result<Self> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.is_empty() => Ok(Self::new(cfg, key)),
            _ => Err(Error::Config(format!("{API_KEY_ENV} is not set"))),
        }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    fn body(&self, request: &ChatRequest) -> String {
        json!({
            "model": self.cfg.model,
            "messages": [
                { "role": "system", "content": request.system },
                { "role": "user", "content": request.user },
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        })
        .to_string()
    }
}

fn extract_content(body: &str) -> Result<String> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| Error::Llm(format!("response is not JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Llm("response has no choices[0].message.content".into()))
}

impl LlmClient for HttpLlm {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let url = self.url();
        let body = self.body(request);
        let mut delay = self.cfg.backoff_base;
        let mut backoffs = 0;
        loop {
            let mut resp = self
                .agent
                .post(&url)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .header("Content-Type", "application/json")
                .send(&body)
                .map_err(|e| Error::Llm(format!("request failed: {e}")))?;
            let status = resp.status().as_u16();
            let text = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| Error::Llm(format!("reading response: {e}")))?;
            let retryable = status == 429 || (500..600).contains(&status);
            if (200..300).contains(&status) {
                return extract_content(&text);
            }
            if !retryable || backoffs >= self.cfg.max_backoffs {
                return Err(Error::Llm(format!("HTTP {status} from {url}")));
            }
            warn!("HTTP {status}; retrying in {delay:?}");
            std::thread::sleep(delay);
            delay *= 2;
            backoffs += 1;
        }
    }
}
