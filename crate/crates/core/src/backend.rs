//! Text-generation backends: completion-style generation and edit-style
//! repair, over HTTP or from a replay script.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::prompting::{PromptText, RepairInstruction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model_name: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Vec<String>>,
}

impl GenerationParams {
    pub fn generation_defaults(model_name: impl Into<String>) -> Self {
        GenerationParams {
            model_name: model_name.into(),
            temperature: 0.0,
            max_tokens: Some(200),
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            stop: Some(vec!["Bot:".to_string(), "Me:".to_string()]),
        }
    }

    pub fn edit_defaults(model_name: impl Into<String>) -> Self {
        GenerationParams {
            model_name: model_name.into(),
            temperature: 0.0,
            max_tokens: None,
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            stop: None,
        }
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(BackendError::InvalidParams(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(BackendError::InvalidParams(format!(
                "top_p must lie in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.max_tokens == Some(0) {
            return Err(BackendError::InvalidParams("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl BackendResult {
    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend refused the request (HTTP {status}): {message}")]
    Refusal { status: u16, message: String },
    #[error("script exhausted: {0}")]
    ScriptExhausted(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("missing API key: environment variable `{0}` is not set")]
    MissingApiKey(String),
}

/// The two capabilities the repair loop needs.
pub trait Backend: Send + Sync {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &GenerationParams,
    ) -> Result<BackendResult, BackendError>;

    fn edit(
        &self,
        input: &str,
        instruction: &RepairInstruction,
        params: &GenerationParams,
    ) -> Result<BackendResult, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, p: &PromptText, g: &GenerationParams) -> Result<BackendResult, BackendError> {
        (**self).complete(p, g)
    }

    fn edit(
        &self,
        input: &str,
        i: &RepairInstruction,
        g: &GenerationParams,
    ) -> Result<BackendResult, BackendError> {
        (**self).edit(input, i, g)
    }
}

/// Rough token count: every maximal run of letters, digits and `_` counts
/// once, and every other non-space character counts once on its own.
///
/// Only used when a backend reports no usage.
pub fn approx_token_count(text: &str) -> u64 {
    let mut count = 0;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScriptKind {
    Generate,
    Edit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub kind: ScriptKind,
    pub response_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Serves canned responses in order. Each call consumes exactly one entry,
/// whose kind must match the call.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    script: Vec<ScriptEntry>,
    cursor: Mutex<usize>,
}

#[derive(Debug, Error)]
pub enum ScriptLoadError {
    #[error("cannot read script {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed script: {0}")]
    Json(#[from] serde_json::Error),
}

impl ScriptedBackend {
    pub fn new(script: Vec<ScriptEntry>) -> Self {
        ScriptedBackend {
            script,
            cursor: Mutex::new(0),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScriptLoadError> {
        Ok(Self::new(serde_json::from_str(text)?))
    }

    pub fn from_file(path: &Path) -> Result<Self, ScriptLoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScriptLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn consumed(&self) -> usize {
        *self.cursor.lock().unwrap()
    }

    pub fn remaining(&self) -> usize {
        self.script.len() - self.consumed()
    }

    fn next(&self, kind: ScriptKind) -> Result<BackendResult, BackendError> {
        let mut cursor = self.cursor.lock().unwrap();
        let entry = self.script.get(*cursor).ok_or_else(|| {
            BackendError::ScriptExhausted(format!(
                "no entry left for a {kind:?} call after {} entries",
                self.script.len()
            ))
        })?;
        if entry.kind != kind {
            return Err(BackendError::ScriptExhausted(format!(
                "entry {} is {:?} but a {kind:?} call was made",
                *cursor, entry.kind
            )));
        }
        *cursor += 1;
        Ok(BackendResult {
            text: entry.response_text.clone(),
            prompt_tokens: entry.prompt_tokens,
            completion_tokens: entry.completion_tokens,
        })
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, _: &PromptText, _: &GenerationParams) -> Result<BackendResult, BackendError> {
        self.next(ScriptKind::Generate)
    }

    fn edit(
        &self,
        _: &str,
        _: &RepairInstruction,
        _: &GenerationParams,
    ) -> Result<BackendResult, BackendError> {
        self.next(ScriptKind::Edit)
    }
}

/// How edit calls reach the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EditMode {
    /// `POST {base}/edits` with `input` and `instruction`.
    #[default]
    Native,
    /// `POST {base}/completions` with the input and instruction joined into
    /// one prompt, for endpoints that have no edits route.
    ViaCompletion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpBackendConfig {
    /// Base URL, e.g. `https://api.example.com/v1`.
    pub endpoint_url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub edit_mode: EditMode,
}

/// Speaks the classic completions/edits JSON wire shape. Never retries.
pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { config, client })
    }

    fn url(&self, route: &str) -> String {
        format!("{}/{}", self.config.endpoint_url.trim_end_matches('/'), route)
    }

    fn post(&self, route: &str, body: &Value, prompt_text: &str) -> Result<BackendResult, BackendError> {
        let mut request = self.client.post(self.url(route)).json(body);
        if let Some(key) = &self.config.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Refusal {
                status: status.as_u16(),
                message: error_message(&text),
            });
        }
        parse_response(&text, prompt_text)
    }
}

impl Backend for HttpBackend {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &GenerationParams,
    ) -> Result<BackendResult, BackendError> {
        params.check()?;
        self.post("completions", &completion_request_body(&prompt.content, params), &prompt.content)
    }

    fn edit(
        &self,
        input: &str,
        instruction: &RepairInstruction,
        params: &GenerationParams,
    ) -> Result<BackendResult, BackendError> {
        params.check()?;
        match self.config.edit_mode {
            EditMode::Native => {
                let body = edit_request_body(input, instruction, params);
                self.post("edits", &body, &format!("{input}\n{}", instruction.content))
            }
            EditMode::ViaCompletion => {
                let prompt = format!("{input}\n{}", instruction.content);
                self.post("completions", &completion_request_body(&prompt, params), &prompt)
            }
        }
    }
}

pub fn completion_request_body(prompt: &str, params: &GenerationParams) -> Value {
    let mut body = json!({
        "model": params.model_name,
        "prompt": prompt,
        "temperature": params.temperature,
        "top_p": params.top_p,
        "frequency_penalty": params.frequency_penalty,
        "presence_penalty": params.presence_penalty,
    });
    if let Some(max_tokens) = params.max_tokens {
        body["max_tokens"] = json!(max_tokens);
    }
    if let Some(stop) = &params.stop {
        body["stop"] = json!(stop);
    }
    body
}

pub fn edit_request_body(
    input: &str,
    instruction: &RepairInstruction,
    params: &GenerationParams,
) -> Value {
    json!({
        "model": params.model_name,
        "input": input,
        "instruction": instruction.content,
        "temperature": params.temperature,
        "top_p": params.top_p,
    })
}

/// Reads `choices[0].text` and `usage`. Missing usage falls back to
/// [`approx_token_count`] over the prompt and the returned text.
pub fn parse_response(body: &str, prompt_text: &str) -> Result<BackendResult, BackendError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    let text = value
        .pointer("/choices/0/text")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::MalformedResponse("no choices[0].text".into()))?
        .to_string();
    let usage = |field: &str| value.pointer(&format!("/usage/{field}")).and_then(Value::as_u64);
    let (prompt_tokens, completion_tokens) =
        match (usage("prompt_tokens"), usage("completion_tokens")) {
            (Some(p), Some(c)) => (p, c),
            _ => (approx_token_count(prompt_text), approx_token_count(&text)),
        };
    Ok(BackendResult {
        text,
        prompt_tokens,
        completion_tokens,
    })
}

fn error_message(body: &str) -> String {
    serde_json::from_str::<Value>(body)
        .ok()
        .and_then(|v| v.pointer("/error/message").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_else(|| body.trim().to_string())
}
