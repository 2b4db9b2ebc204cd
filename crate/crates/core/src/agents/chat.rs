use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AgentError, AgentKind, AgentProfile, Responder};

/// Prefix of the per-provider environment variables
/// (`DXDEBATE_<PROVIDER>_API_KEY`, `DXDEBATE_<PROVIDER>_URL`).
pub const API_KEY_ENV_PREFIX: &str = "DXDEBATE_";

const SYSTEM_PROMPT: &str =
    "You are an experienced diagnostician taking part in a structured diagnostic debate.";
const ANTHROPIC_VERSION: &str = "2023-06-01";
const ANTHROPIC_MAX_TOKENS: u32 = 2048;
const ERROR_BODY_LIMIT: usize = 500;

/// Wire format spoken by a provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderAdapter {
    /// `POST {model, messages, temperature}`, reply in `choices[0].message.content`.
    OpenaiCompatible,
    /// Messages API: `x-api-key` header, reply in `content[0].text`.
    Anthropic,
}

impl ProviderAdapter {
    fn for_provider(provider: &str) -> Self {
        if provider.eq_ignore_ascii_case("anthropic") || provider.eq_ignore_ascii_case("claude") {
            Self::Anthropic
        } else {
            Self::OpenaiCompatible
        }
    }

    fn default_endpoint(self, provider: &str) -> Option<&'static str> {
        match self {
            Self::Anthropic => Some("https://api.anthropic.com/v1/messages"),
            Self::OpenaiCompatible if provider.eq_ignore_ascii_case("openai") => {
                Some("https://api.openai.com/v1/chat/completions")
            }
            Self::OpenaiCompatible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Provider-neutral request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

fn env_var_name(provider: &str, suffix: &str) -> String {
    let provider: String = provider
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect();
    format!("{API_KEY_ENV_PREFIX}{provider}_{suffix}")
}

/// Chat-completion backend. Each prompt is sent as a fresh single-turn
/// exchange; debate prompts already carry the relevant history.
#[derive(Debug)]
pub struct ChatClient {
    agent_id: String,
    adapter: ProviderAdapter,
    endpoint: String,
    api_key: Option<String>,
    model: String,
    temperature: f64,
    timeout_secs: u64,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(
        agent_id: &str,
        adapter: ProviderAdapter,
        endpoint: &str,
        api_key: Option<String>,
        model: &str,
        temperature: f64,
        timeout_secs: u64,
    ) -> Result<Self, AgentError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs.max(1)))
            .build()
            .map_err(|e| AgentError::BackendHttpError {
                agent: agent_id.to_string(),
                status: None,
                message: e.to_string(),
            })?;
        Ok(Self {
            agent_id: agent_id.to_string(),
            adapter,
            endpoint: endpoint.to_string(),
            api_key,
            model: model.to_string(),
            temperature,
            timeout_secs: timeout_secs.max(1),
            http,
        })
    }

    /// Builds a client from a chat-backend profile. The endpoint comes from
    /// the profile, then `DXDEBATE_<PROVIDER>_URL`, then the provider default;
    /// the API key comes from `DXDEBATE_<PROVIDER>_API_KEY` only.
    pub fn from_profile(profile: &AgentProfile) -> Result<Self, AgentError> {
        let AgentKind::ChatBackend {
            provider,
            endpoint,
            adapter,
        } = &profile.kind
        else {
            return Err(AgentError::InvalidProfile(format!(
                "agent '{}' is not a chat backend",
                profile.id
            )));
        };
        let adapter = adapter.unwrap_or_else(|| ProviderAdapter::for_provider(provider));
        let url_var = env_var_name(provider, "URL");
        let endpoint = endpoint
            .clone()
            .or_else(|| std::env::var(&url_var).ok())
            .or_else(|| adapter.default_endpoint(provider).map(str::to_string))
            .ok_or_else(|| {
                AgentError::InvalidProfile(format!(
                    "agent '{}': no endpoint configured; set `endpoint` or {url_var}",
                    profile.id
                ))
            })?;
        let key_var = env_var_name(provider, "API_KEY");
        let api_key = std::env::var(&key_var)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(AgentError::MissingCredentials(key_var))?;
        Self::new(
            &profile.id,
            adapter,
            &endpoint,
            Some(api_key),
            &profile.model,
            profile.temperature,
            profile.request_timeout_secs,
        )
    }

    pub fn request_for(&self, prompt: &str) -> ChatRequest {
        ChatRequest {
            model: self.model.clone(),
            messages: vec![
                ChatMessage {
                    role: "system".into(),
                    content: SYSTEM_PROMPT.into(),
                },
                ChatMessage {
                    role: "user".into(),
                    content: prompt.into(),
                },
            ],
            temperature: self.temperature,
        }
    }

    fn http_error(&self, status: Option<u16>, message: impl Into<String>) -> AgentError {
        AgentError::BackendHttpError {
            agent: self.agent_id.clone(),
            status,
            message: message.into(),
        }
    }

    fn transport_error(&self, err: reqwest::Error) -> AgentError {
        if err.is_timeout() {
            AgentError::BackendTimeout {
                agent: self.agent_id.clone(),
                seconds: self.timeout_secs,
            }
        } else {
            self.http_error(err.status().map(|s| s.as_u16()), err.to_string())
        }
    }

    fn build(&self, request: &ChatRequest) -> reqwest::blocking::RequestBuilder {
        let builder = self.http.post(&self.endpoint);
        match self.adapter {
            ProviderAdapter::OpenaiCompatible => {
                let builder = match &self.api_key {
                    Some(key) => builder.bearer_auth(key),
                    None => builder,
                };
                builder.json(request)
            }
            ProviderAdapter::Anthropic => {
                let system: Vec<&str> = request
                    .messages
                    .iter()
                    .filter(|m| m.role == "system")
                    .map(|m| m.content.as_str())
                    .collect();
                let messages: Vec<&ChatMessage> = request
                    .messages
                    .iter()
                    .filter(|m| m.role != "system")
                    .collect();
                let body = serde_json::json!({
                    "model": request.model,
                    "max_tokens": ANTHROPIC_MAX_TOKENS,
                    "system": system.join("\n"),
                    "messages": messages,
                    "temperature": request.temperature,
                });
                let builder = builder.header("anthropic-version", ANTHROPIC_VERSION);
                let builder = match &self.api_key {
                    Some(key) => builder.header("x-api-key", key),
                    None => builder,
                };
                builder.json(&body)
            }
        }
    }

    fn extract_text(&self, body: &Value) -> Option<String> {
        let text = match self.adapter {
            ProviderAdapter::OpenaiCompatible => body
                .pointer("/choices/0/message/content")
                .and_then(Value::as_str),
            ProviderAdapter::Anthropic => body.pointer("/content/0/text").and_then(Value::as_str),
        };
        text.map(str::to_string)
    }
}

impl Responder for ChatClient {
    fn agent_id(&self) -> &str {
        &self.agent_id
    }

    fn complete(&mut self, prompt: &str) -> Result<String, AgentError> {
        let request = self.request_for(prompt);
        tracing::debug!(agent = %self.agent_id, endpoint = %self.endpoint, "sending chat request");
        let response = self
            .build(&request)
            .send()
            .map_err(|e| self.transport_error(e))?;
        let status = response.status();
        let text = response.text().map_err(|e| self.transport_error(e))?;
        if !status.is_success() {
            let message: String = text.chars().take(ERROR_BODY_LIMIT).collect();
            return Err(self.http_error(Some(status.as_u16()), message));
        }
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| self.http_error(Some(status.as_u16()), format!("invalid JSON: {e}")))?;
        self.extract_text(&body).ok_or_else(|| {
            self.http_error(
                Some(status.as_u16()),
                "response did not contain completion text",
            )
        })
    }
}
