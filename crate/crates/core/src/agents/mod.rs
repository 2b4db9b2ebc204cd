//! Debate participants.
//!
//! An [`AgentProfile`] is immutable configuration. Calling [`open_session`]
//! for a case yields a [`Responder`], which carries whatever per-debate state
//! the agent needs (a scripted agent's replay cursor, an HTTP client). One
//! responder must only be driven from one debate at a time.

mod chat;
mod parse;
mod prompt;
mod scripted;

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::probdist::PredictionSet;

pub use chat::{ChatClient, ChatMessage, ChatRequest, ProviderAdapter, API_KEY_ENV_PREFIX};
pub use parse::{extract_justification, parse_predictions, ParseError, PARSE_SUM_TOLERANCE};
pub use prompt::{
    contentiousness_level, render_debate_prompt, render_opening_prompt, ContentiousnessLevel,
    HistoryTurn, PromptContext, Role, CONTENTIOUSNESS_LEVELS,
};
pub use scripted::{FixtureTurn, ScriptedAgent};

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("symptom list is empty")]
    EmptySymptoms,
    #[error("invalid prompt context: {0}")]
    InvalidPrompt(String),
    #[error("invalid agent profile: {0}")]
    InvalidProfile(String),
    #[error("agent '{agent}' timed out after {seconds}s")]
    BackendTimeout { agent: String, seconds: u64 },
    #[error("agent '{agent}' backend request failed{}: {message}", status.map(|s| format!(" with HTTP {s}")).unwrap_or_default())]
    BackendHttpError {
        agent: String,
        status: Option<u16>,
        message: String,
    },
    #[error("could not parse predictions from agent '{agent}': {reason}")]
    ParseFailure {
        agent: String,
        reason: ParseError,
        raw_text: String,
    },
    #[error("scripted agent '{agent}' has no turns left (replayed {turns})")]
    FixtureExhausted { agent: String, turns: usize },
    #[error("fixture error for agent '{agent}': {message}")]
    Fixture { agent: String, message: String },
    #[error("missing credentials: set {0}")]
    MissingCredentials(String),
}

impl AgentError {
    /// Raw backend text retained by a parse failure.
    pub fn raw_text(&self) -> Option<&str> {
        match self {
            AgentError::ParseFailure { raw_text, .. } => Some(raw_text),
            _ => None,
        }
    }
}

/// How an agent produces its turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AgentKind {
    /// Replays recorded turns from `<fixtures>/<case-id>.json`.
    Scripted { fixtures: PathBuf },
    /// Talks to a chat-completion endpoint.
    ChatBackend {
        /// Provider name; selects the request adapter and the
        /// `DXDEBATE_<PROVIDER>_API_KEY` / `DXDEBATE_<PROVIDER>_URL` variables.
        provider: String,
        #[serde(default)]
        endpoint: Option<String>,
        #[serde(default)]
        adapter: Option<ProviderAdapter>,
    },
}

fn default_k() -> usize {
    5
}

fn default_timeout() -> u64 {
    120
}

fn default_temperature() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct AgentProfile {
    pub id: String,
    #[serde(flatten)]
    pub kind: AgentKind,
    #[serde(default)]
    pub model: String,
    #[serde(default = "default_k")]
    pub default_k: usize,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

impl AgentProfile {
    pub fn scripted(id: &str, fixtures: impl Into<PathBuf>) -> Self {
        Self {
            id: id.to_string(),
            kind: AgentKind::Scripted {
                fixtures: fixtures.into(),
            },
            model: String::new(),
            default_k: default_k(),
            request_timeout_secs: default_timeout(),
            temperature: default_temperature(),
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.id.trim().is_empty() {
            return Err(AgentError::InvalidProfile("agent id is empty".into()));
        }
        if !(1..=10).contains(&self.default_k) {
            return Err(AgentError::InvalidProfile(format!(
                "agent '{}': default_k {} is outside [1, 10]",
                self.id, self.default_k
            )));
        }
        if let AgentKind::ChatBackend { provider, .. } = &self.kind {
            if provider.trim().is_empty() {
                return Err(AgentError::InvalidProfile(format!(
                    "agent '{}': provider is empty",
                    self.id
                )));
            }
            if self.model.trim().is_empty() {
                return Err(AgentError::InvalidProfile(format!(
                    "agent '{}': chat backends need a model name",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// One agent turn: predictions, the reasoning behind them and the verbatim
/// backend output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentResponse {
    pub predictions: PredictionSet,
    pub justification: String,
    pub raw_text: String,
    /// Wall-clock receipt time; kept out of the serialized turn so transcripts
    /// compare byte-for-byte across runs.
    #[serde(skip)]
    pub received_at: Option<DateTime<Utc>>,
}

impl AgentResponse {
    /// Parses `raw_text` into a response.
    pub fn from_raw(agent: &str, raw_text: String) -> Result<Self, AgentError> {
        let predictions =
            parse_predictions(&raw_text).map_err(|reason| AgentError::ParseFailure {
                agent: agent.to_string(),
                reason,
                raw_text: raw_text.clone(),
            })?;
        let justification = extract_justification(&raw_text);
        Ok(Self {
            predictions,
            justification,
            raw_text,
            received_at: Some(Utc::now()),
        })
    }
}

/// A live agent bound to one debate session.
pub trait Responder: Send {
    fn agent_id(&self) -> &str;

    /// Sends `prompt` and returns the verbatim reply text.
    fn complete(&mut self, prompt: &str) -> Result<String, AgentError>;

    /// Sends `prompt` and parses the reply into predictions.
    fn respond(&mut self, prompt: &str) -> Result<AgentResponse, AgentError> {
        let raw = self.complete(prompt)?;
        AgentResponse::from_raw(self.agent_id(), raw)
    }
}

/// Queries `agent` with `prompt`, parsing its predictions.
pub fn query_agent(agent: &mut dyn Responder, prompt: &str) -> Result<AgentResponse, AgentError> {
    agent.respond(prompt)
}

/// Opens a session for `profile` on the case `case_id`.
pub fn open_session(
    profile: &AgentProfile,
    case_id: &str,
) -> Result<Box<dyn Responder>, AgentError> {
    profile.validate()?;
    match &profile.kind {
        AgentKind::Scripted { fixtures } => Ok(Box::new(ScriptedAgent::load(
            &profile.id,
            &fixtures.join(format!("{case_id}.json")),
        )?)),
        AgentKind::ChatBackend { .. } => Ok(Box::new(ChatClient::from_profile(profile)?)),
    }
}
