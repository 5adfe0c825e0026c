//! Prover backends: scripted replay and an OpenAI-style HTTP endpoint.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::digest::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_output_tokens: u32,
    pub seed: Option<u64>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams { temperature: 0.8, top_p: 0.95, max_output_tokens: 2048, seed: None }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.top_p) {
            return Err(format!("top_p {} outside [0, 1]", self.top_p));
        }
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature {} is negative", self.temperature));
        }
        Ok(())
    }

    /// Parameters for one attempt: the seed is the attempt index, shifted
    /// by the configured seed when there is one.
    pub fn for_attempt(&self, attempt_index: u32) -> SamplingParams {
        SamplingParams {
            seed: Some(self.seed.unwrap_or(0) + u64::from(attempt_index)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("no scripted response for prompt digest {0}")]
    ScriptExhausted(String),
}

pub trait ProverBackend: Send + Sync {
    fn generate(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError>;

    /// Upper bound on concurrent `generate` calls, if the backend has one.
    fn max_concurrency(&self) -> Option<usize> {
        None
    }
}

pub const WILDCARD_DIGEST: &str = "*";

/// One `responses.jsonl` line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub prompt_digest: String,
    pub responses: Vec<String>,
}

/// Returns scripted completions by prompt digest, falling back to the `*`
/// entry. With a seed the response is `(seed - 1) mod n`, so attempt `k`
/// always sees response `k`; without one a per-digest counter cycles.
#[derive(Debug, Default)]
pub struct ReplayBackend {
    scripts: HashMap<String, Vec<String>>,
    cursors: Mutex<HashMap<String, usize>>,
}

impl ReplayBackend {
    pub fn new(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        let mut scripts: HashMap<String, Vec<String>> = HashMap::new();
        for e in entries {
            scripts.entry(e.prompt_digest).or_default().extend(e.responses);
        }
        ReplayBackend { scripts, cursors: Mutex::default() }
    }

    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, BackendError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| BackendError::Unavailable(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ReplayEntry = serde_json::from_str(&line)
                .map_err(|e| BackendError::MalformedResponse(format!("line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Ok(Self::new(entries))
    }
}

impl ProverBackend for ReplayBackend {
    fn generate(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        let digest = sha256_hex(prompt);
        let (key, script) = match self.scripts.get_key_value(&digest) {
            Some(hit) => hit,
            None => self
                .scripts
                .get_key_value(WILDCARD_DIGEST)
                .ok_or_else(|| BackendError::ScriptExhausted(digest.clone()))?,
        };
        if script.is_empty() {
            return Err(BackendError::ScriptExhausted(digest));
        }
        let at = match params.seed {
            Some(seed) => (seed.saturating_sub(1) % script.len() as u64) as usize,
            None => {
                let mut cursors = self.cursors.lock().unwrap_or_else(|e| e.into_inner());
                let c = cursors.entry(key.clone()).or_insert(0);
                let at = *c % script.len();
                *c += 1;
                at
            }
        };
        Ok(script[at].clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    #[serde(default = "HttpConfig::default_retry_limit")]
    pub retry_limit: u32,
    #[serde(default = "HttpConfig::default_initial_backoff_ms")]
    pub initial_backoff_ms: u64,
    #[serde(default = "HttpConfig::default_max_backoff_ms")]
    pub max_backoff_ms: u64,
    #[serde(default = "HttpConfig::default_timeout_seconds")]
    pub timeout_seconds: u64,
    #[serde(default = "HttpConfig::default_api_key_env")]
    pub api_key_env: String,
    #[serde(default)]
    pub max_concurrency: Option<usize>,
}

impl HttpConfig {
    fn default_retry_limit() -> u32 {
        3
    }
    fn default_initial_backoff_ms() -> u64 {
        500
    }
    fn default_max_backoff_ms() -> u64 {
        8000
    }
    fn default_timeout_seconds() -> u64 {
        120
    }
    fn default_api_key_env() -> String {
        "PROVER_API_KEY".into()
    }

    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            url: url.into(),
            model: model.into(),
            retry_limit: Self::default_retry_limit(),
            initial_backoff_ms: Self::default_initial_backoff_ms(),
            max_backoff_ms: Self::default_max_backoff_ms(),
            timeout_seconds: Self::default_timeout_seconds(),
            api_key_env: Self::default_api_key_env(),
            max_concurrency: None,
        }
    }
}

/// Chat-completion client. Rate limits, 5xx responses and transport
/// failures are retried up to `retry_limit` times with doubling delays.
#[derive(Debug)]
pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

enum Failure {
    Transient(String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_seconds)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend { config, agent }
    }

    pub fn request_body(&self, prompt: &str, params: &SamplingParams) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_output_tokens,
        });
        if let Some(seed) = params.seed {
            body["seed"] = json!(seed);
        }
        body
    }

    fn backoff(&self, retry: u32) -> Duration {
        let ms = self.config.initial_backoff_ms.saturating_mul(1u64 << retry.min(20));
        Duration::from_millis(ms.min(self.config.max_backoff_ms))
    }

    fn try_once(&self, body: &Value) -> Result<String, Failure> {
        let mut req = self.agent.post(&self.config.url);
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Failure::Transient(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(Failure::Fatal(BackendError::Unavailable(format!("HTTP {status}"))));
        }
        let value: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| Failure::Fatal(BackendError::MalformedResponse(e.to_string())))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                Failure::Fatal(BackendError::MalformedResponse("no choices[0].message.content".into()))
            })
    }
}

impl ProverBackend for HttpBackend {
    fn generate(&self, prompt: &str, params: &SamplingParams) -> Result<String, BackendError> {
        let body = self.request_body(prompt, params);
        let mut retry = 0;
        loop {
            match self.try_once(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient(msg)) if retry >= self.config.retry_limit => {
                    return Err(BackendError::Unavailable(format!(
                        "{msg} after {} attempts",
                        retry + 1
                    )))
                }
                Err(Failure::Transient(_)) => {
                    thread::sleep(self.backoff(retry));
                    retry += 1;
                }
            }
        }
    }

    fn max_concurrency(&self) -> Option<usize> {
        self.config.max_concurrency
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_by_seed_and_counter() {
        let b = ReplayBackend::new([ReplayEntry {
            prompt_digest: WILDCARD_DIGEST.into(),
            responses: vec!["a".into(), "b".into()],
        }]);
        let p = SamplingParams::default();
        assert_eq!(b.generate("x", &p.for_attempt(1)).unwrap(), "a");
        assert_eq!(b.generate("x", &p.for_attempt(2)).unwrap(), "b");
        assert_eq!(b.generate("x", &p.for_attempt(3)).unwrap(), "a");
        assert_eq!(b.generate("x", &p).unwrap(), "a");
        assert_eq!(b.generate("y", &p).unwrap(), "b");
    }

    #[test]
    fn replay_prefers_exact_digest() {
        let b = ReplayBackend::new([
            ReplayEntry { prompt_digest: "*".into(), responses: vec!["any".into()] },
            ReplayEntry { prompt_digest: sha256_hex("x"), responses: vec!["exact".into()] },
        ]);
        assert_eq!(b.generate("x", &SamplingParams::default()).unwrap(), "exact");
        assert_eq!(b.generate("z", &SamplingParams::default()).unwrap(), "any");
    }

    #[test]
    fn replay_without_entry() {
        let b = ReplayBackend::new([]);
        assert!(matches!(b.generate("x", &SamplingParams::default()), Err(BackendError::ScriptExhausted(_))));
    }

    #[test]
    fn sampling_validation() {
        assert!(SamplingParams::default().validate().is_ok());
        assert!(SamplingParams { top_p: 1.5, ..Default::default() }.validate().is_err());
        assert!(SamplingParams { temperature: -0.1, ..Default::default() }.validate().is_err());
        assert_eq!(SamplingParams { seed: Some(100), ..Default::default() }.for_attempt(3).seed, Some(103));
    }

    #[test]
    fn request_shape() {
        let b = HttpBackend::new(HttpConfig::new("http://127.0.0.1:1/v1", "m"));
        let body = b.request_body("hi", &SamplingParams::default().for_attempt(4));
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "hi");
        assert_eq!(body["max_tokens"], 2048);
        assert_eq!(body["seed"], 4);
        assert!(b.request_body("hi", &SamplingParams::default()).get("seed").is_none());
    }
}
