use std::fs;
use std::path::Path;

use chrono::Utc;
use serde::{Deserialize, Serialize};

use super::{extract_justification, parse_predictions, AgentError, AgentResponse, Responder};
use crate::probdist::PredictionSet;

/// One recorded turn in a fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureTurn {
    #[serde(alias = "raw-text")]
    pub raw_text: String,
    /// Declared predictions; must match what the parser reads from
    /// `raw_text`. Absent for judge fixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PredictionSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justification: Option<String>,
}

/// Replays fixture turns in order, ignoring the prompt.
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    id: String,
    turns: Vec<FixtureTurn>,
    cursor: usize,
}

impl ScriptedAgent {
    pub fn new(id: &str, turns: Vec<FixtureTurn>) -> Self {
        Self {
            id: id.to_string(),
            turns,
            cursor: 0,
        }
    }

    pub fn load(id: &str, path: &Path) -> Result<Self, AgentError> {
        let fixture_err = |message: String| AgentError::Fixture {
            agent: id.to_string(),
            message,
        };
        let text = fs::read_to_string(path)
            .map_err(|e| fixture_err(format!("{}: {e}", path.display())))?;
        let turns: Vec<FixtureTurn> = serde_json::from_str(&text)
            .map_err(|e| fixture_err(format!("{}: {e}", path.display())))?;
        Ok(Self::new(id, turns))
    }

    pub fn remaining(&self) -> usize {
        self.turns.len() - self.cursor
    }

    fn next_turn(&mut self) -> Result<&FixtureTurn, AgentError> {
        let turn = self
            .turns
            .get(self.cursor)
            .ok_or_else(|| AgentError::FixtureExhausted {
                agent: self.id.clone(),
                turns: self.turns.len(),
            })?;
        self.cursor += 1;
        Ok(turn)
    }
}

impl Responder for ScriptedAgent {
    fn agent_id(&self) -> &str {
        &self.id
    }

    fn complete(&mut self, _prompt: &str) -> Result<String, AgentError> {
        Ok(self.next_turn()?.raw_text.clone())
    }

    fn respond(&mut self, _prompt: &str) -> Result<AgentResponse, AgentError> {
        let id = self.id.clone();
        let index = self.cursor;
        let turn = self.next_turn()?.clone();
        let parsed =
            parse_predictions(&turn.raw_text).map_err(|reason| AgentError::ParseFailure {
                agent: id.clone(),
                reason,
                raw_text: turn.raw_text.clone(),
            })?;
        if let Some(declared) = &turn.predictions {
            let matches = declared.len() == parsed.len()
                && declared.iter().all(|(label, mass)| {
                    (parsed.mass(label) - mass).abs() <= 1e-9 && parsed.contains(label)
                });
            if !matches {
                return Err(AgentError::Fixture {
                    agent: id,
                    message: format!(
                        "turn {index}: declared predictions {declared} differ from parsed {parsed}"
                    ),
                });
            }
        }
        let justification = turn
            .justification
            .clone()
            .unwrap_or_else(|| extract_justification(&turn.raw_text));
        Ok(AgentResponse {
            predictions: parsed,
            justification,
            raw_text: turn.raw_text,
            received_at: Some(Utc::now()),
        })
    }
}
