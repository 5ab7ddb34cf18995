use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LlmError, PromptBundle};
use crate::artifact::write_atomic;

/// Completion source. Mocks must be deterministic in `(prompt.hash(), nonce)`.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &PromptBundle, nonce: u64) -> Result<String, LlmError>;

    fn model_id(&self) -> String;
}

/// Nonce for attempt `attempt` of sample `sample`.
pub fn nonce(sample: usize, attempt: usize) -> u64 {
    ((sample as u64) << 16) | (attempt as u64 & 0xffff)
}

pub fn split_nonce(nonce: u64) -> (usize, usize) {
    ((nonce >> 16) as usize, (nonce & 0xffff) as usize)
}

/// OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct HttpClient {
    pub endpoint: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    pub max_attempts: u32,
}

impl HttpClient {
    pub const ENDPOINT_VAR: &'static str = "SEPCONF_LLM_ENDPOINT";
    pub const KEY_VAR: &'static str = "SEPCONF_LLM_API_KEY";
    pub const MODEL_VAR: &'static str = "SEPCONF_LLM_MODEL";

    /// Reads endpoint, key and model from the environment. Returns `None`
    /// when no API key is set.
    pub fn from_env() -> Option<Self> {
        let api_key = std::env::var(Self::KEY_VAR).ok().filter(|k| !k.is_empty())?;
        Some(HttpClient {
            endpoint: std::env::var(Self::ENDPOINT_VAR)
                .unwrap_or_else(|_| "https://api.openai.com/v1/chat/completions".into()),
            api_key,
            model: std::env::var(Self::MODEL_VAR).unwrap_or_else(|_| "gpt-4o".into()),
            timeout: Duration::from_secs(120),
            max_attempts: 4,
        })
    }

    fn request_once(&self, agent: &ureq::Agent, body: &serde_json::Value) -> Result<String, (bool, LlmError)> {
        let mut resp = agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| (true, LlmError::Transport(e.to_string())))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err((true, LlmError::Transport(format!("HTTP {status}"))));
        }
        if status >= 400 {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((false, LlmError::Transport(format!("HTTP {status}: {text}"))));
        }
        let value: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| (true, LlmError::Payload(e.to_string())))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| (false, LlmError::Payload("missing choices[0].message.content".into())))
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, prompt: &PromptBundle, nonce: u64) -> Result<String, LlmError> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(self.timeout)).http_status_as_error(false).build().into();
        let body = json!({
            "model": self.model,
            "temperature": prompt.temperature,
            "seed": nonce,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        });
        let mut delay = Duration::from_secs(1);
        let mut last = LlmError::Transport("no attempt made".into());
        for attempt in 0..self.max_attempts.max(1) {
            match self.request_once(&agent, &body) {
                Ok(text) => return Ok(text),
                Err((retry, e)) => {
                    log::warn!("completion attempt {} failed: {e}", attempt + 1);
                    last = e;
                    if !retry {
                        break;
                    }
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
        Err(last)
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub nonce: u64,
    pub text: String,
}

/// Recorded responses for one prompt hash, in recording order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub prompt_hash: String,
    pub model_id: String,
    pub responses: Vec<FixtureEntry>,
}

impl FixtureFile {
    pub fn path(dir: &Path, prompt_hash: &str) -> PathBuf {
        dir.join(format!("{prompt_hash}.json"))
    }

    pub fn load(dir: &Path, prompt_hash: &str) -> Result<Option<Self>, LlmError> {
        let path = Self::path(dir, prompt_hash);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map(Some).map_err(|e| LlmError::Payload(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), LlmError> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| LlmError::Payload(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&Self::path(dir, &self.prompt_hash), &bytes)?;
        Ok(())
    }
}

/// Serves recorded responses by exact `(prompt hash, nonce)`.
#[derive(Debug, Clone)]
pub struct ReplayClient {
    dir: PathBuf,
    model_id: String,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayClient { dir: dir.into(), model_id: "replay".into() }
    }

    pub fn with_model_id(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self
    }
}

impl LlmClient for ReplayClient {
    fn complete(&self, prompt: &PromptBundle, nonce: u64) -> Result<String, LlmError> {
        let hash = prompt.hash();
        FixtureFile::load(&self.dir, &hash)?
            .and_then(|f| f.responses.into_iter().find(|r| r.nonce == nonce))
            .map(|r| r.text)
            .ok_or(LlmError::FixtureMissing { hash, nonce })
    }

    fn model_id(&self) -> String {
        self.model_id.clone()
    }
}

type Script = dyn Fn(&PromptBundle, u64) -> Result<String, LlmError> + Send + Sync;

/// Mock driven by a function of the prompt and nonce.
pub struct ScriptedClient {
    script: Box<Script>,
}

impl ScriptedClient {
    pub fn new(script: impl Fn(&PromptBundle, u64) -> Result<String, LlmError> + Send + Sync + 'static) -> Self {
        ScriptedClient { script: Box::new(script) }
    }

    /// Returns `responses[sample % len]` whatever the prompt or attempt.
    pub fn cycling(responses: Vec<String>) -> Self {
        assert!(!responses.is_empty(), "scripted client needs at least one response");
        Self::new(move |_, nonce| Ok(responses[split_nonce(nonce).0 % responses.len()].clone()))
    }
}

impl std::fmt::Debug for ScriptedClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ScriptedClient")
    }
}

impl LlmClient for ScriptedClient {
    fn complete(&self, prompt: &PromptBundle, nonce: u64) -> Result<String, LlmError> {
        (self.script)(prompt, nonce)
    }

    fn model_id(&self) -> String {
        "scripted".into()
    }
}

/// Passes completions through and appends them to the fixture store.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
    lock: Mutex<()>,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        RecordingClient { inner, dir: dir.into(), lock: Mutex::new(()) }
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete(&self, prompt: &PromptBundle, nonce: u64) -> Result<String, LlmError> {
        let text = self.inner.complete(prompt, nonce)?;
        let hash = prompt.hash();
        let _guard = self.lock.lock().expect("fixture lock");
        let mut file = FixtureFile::load(&self.dir, &hash)?.unwrap_or_else(|| FixtureFile {
            prompt_hash: hash.clone(),
            model_id: self.inner.model_id(),
            responses: Vec::new(),
        });
        file.responses.retain(|r| r.nonce != nonce);
        file.responses.push(FixtureEntry { nonce, text: text.clone() });
        file.responses.sort_by_key(|r| r.nonce);
        file.save(&self.dir)?;
        Ok(text)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }
}
