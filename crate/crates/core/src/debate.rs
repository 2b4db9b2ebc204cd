//! Two-agent diagnostic debate.
//!
//! Both agents first answer the moderator independently. Agreeing openings
//! turn the second agent into a devil's advocate. Rebuttal rounds follow with
//! a descending contentiousness schedule until the agents agree on their top
//! three diagnoses or the round budget runs out, and a final conciliatory
//! turn collects the joint recommendation.

use std::io::Write;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::agents::{
    open_session, render_debate_prompt, render_opening_prompt, AgentError, AgentProfile,
    AgentResponse, HistoryTurn, PromptContext, Responder, Role,
};
use crate::ara::{aggregate_round, AraError, WeightedForecast};
use crate::dataset::CaseRecord;
use crate::probdist::{shannon_entropy, PredictionSet, ProbError};

/// Slack added to the consensus tolerance so boundary differences such as
/// `0.30 - 0.25` still count.
const CONSENSUS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DebateConfig {
    pub delta_schedule: Vec<f64>,
    pub max_rounds: usize,
    pub consensus_tolerance: f64,
    pub requested_k: usize,
    pub final_round_k: usize,
    /// When set, agents are told to choose among these diseases only.
    pub candidate_labels: Option<Vec<String>>,
}

impl Default for DebateConfig {
    fn default() -> Self {
        Self {
            delta_schedule: vec![0.9, 0.7, 0.5, 0.3, 0.0],
            max_rounds: 6,
            consensus_tolerance: 0.05,
            requested_k: 5,
            final_round_k: 5,
            candidate_labels: None,
        }
    }
}

impl DebateConfig {
    pub fn validate(&self) -> Result<(), DebateError> {
        let invalid = |msg: String| Err(DebateError::InvalidConfig(msg));
        let schedule = &self.delta_schedule;
        let Some(&last) = schedule.last() else {
            return invalid("contentiousness schedule is empty".into());
        };
        if schedule.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return invalid("contentiousness values must lie in [0, 1]".into());
        }
        if schedule.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("contentiousness schedule must be strictly descending".into());
        }
        if last >= 0.1 {
            return invalid(format!("last contentiousness {last} must be below 0.1"));
        }
        if self.max_rounds < schedule.len() {
            return invalid(format!(
                "max_rounds {} is shorter than the schedule ({} entries)",
                self.max_rounds,
                schedule.len()
            ));
        }
        if !(self.consensus_tolerance >= 0.0 && self.consensus_tolerance <= 1.0) {
            return invalid("consensus tolerance must lie in [0, 1]".into());
        }
        if !(1..=10).contains(&self.requested_k) || !(1..=10).contains(&self.final_round_k) {
            return invalid("requested k values must lie in [1, 10]".into());
        }
        Ok(())
    }

    /// Contentiousness of the `i`-th rebuttal round (0-based).
    pub fn delta_for_rebuttal(&self, i: usize) -> f64 {
        self.delta_schedule[i.min(self.delta_schedule.len() - 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundKind {
    Opening,
    Rebuttal,
    Finale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateRound {
    /// 1-based round number.
    pub index: usize,
    pub kind: RoundKind,
    pub delta: f64,
    pub role_a: Role,
    pub role_b: Role,
    pub prompt_a: String,
    pub prompt_b: String,
    pub turn_a: AgentResponse,
    pub turn_b: AgentResponse,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub consensus_reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateFailure {
    pub agent: String,
    pub round: usize,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnTimestamp {
    pub round: usize,
    pub agent: String,
    pub received_at: DateTime<Utc>,
}

/// Wall-clock data, kept apart from the deterministic debate content.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TranscriptMetadata {
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub turns: Vec<TurnTimestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateTranscript {
    pub case_id: String,
    pub symptoms: Vec<String>,
    pub agent_a: String,
    pub agent_b: String,
    /// Roles fixed after the openings.
    pub roles: Option<(Role, Role)>,
    pub rounds: Vec<DebateRound>,
    pub joint_recommendation: Option<String>,
    /// Equal-confidence aggregate of the finale turns.
    pub final_aggregate: Option<PredictionSet>,
    pub failure: Option<DebateFailure>,
    pub metadata: TranscriptMetadata,
}

impl DebateTranscript {
    pub fn completed(&self) -> bool {
        self.failure.is_none() && self.joint_recommendation.is_some()
    }

    pub fn finale(&self) -> Option<&DebateRound> {
        self.rounds.last().filter(|r| r.kind == RoundKind::Finale)
    }

    /// Rounds other than the finale.
    pub fn content_rounds(&self) -> impl Iterator<Item = &DebateRound> {
        self.rounds.iter().filter(|r| r.kind != RoundKind::Finale)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DebateError {
    #[error("invalid debate configuration: {0}")]
    InvalidConfig(String),
    #[error("both debaters are '{0}'; a debate needs two distinct agents")]
    SameAgent(String),
    #[error("agent '{agent}' failed in round {round}: {source}")]
    Agent {
        agent: String,
        round: usize,
        #[source]
        source: AgentError,
        transcript: Box<DebateTranscript>,
    },
    #[error("turn entropy: {0}")]
    Entropy(#[from] ProbError),
    #[error("final aggregation: {0}")]
    Aggregation(#[from] AraError),
}

impl DebateError {
    pub fn partial_transcript(&self) -> Option<&DebateTranscript> {
        match self {
            DebateError::Agent { transcript, .. } => Some(transcript),
            _ => None,
        }
    }
}

/// Equal top-1 labels make the second agent a devil's advocate.
pub fn assign_roles(opening_a: &AgentResponse, opening_b: &AgentResponse) -> (Role, Role) {
    let top_a = opening_a.predictions.top().map(|(l, _)| l);
    let top_b = opening_b.predictions.top().map(|(l, _)| l);
    if top_a.is_some() && top_a == top_b {
        (Role::Proponent, Role::DevilsAdvocate)
    } else {
        (Role::Proponent, Role::Proponent)
    }
}

/// Entropy in bits of the normalized predictions.
pub fn turn_entropy(turn: &AgentResponse) -> Result<f64, ProbError> {
    shannon_entropy(&turn.predictions.to_normalized()?)
}

/// True when both turns share the same top-3 labels and their normalized
/// masses on those labels differ by at most `tolerance`.
pub fn consensus_between(a: &AgentResponse, b: &AgentResponse, tolerance: f64) -> bool {
    let (Ok(pa), Ok(pb)) = (a.predictions.to_normalized(), b.predictions.to_normalized()) else {
        return false;
    };
    let top_a = pa.top_labels(3);
    if top_a != pb.top_labels(3) {
        return false;
    }
    top_a
        .iter()
        .all(|l| (pa.mass(l) - pb.mass(l)).abs() <= tolerance + CONSENSUS_EPS)
}

pub fn detect_consensus(round: &DebateRound, tolerance: f64) -> bool {
    consensus_between(&round.turn_a, &round.turn_b, tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub round: usize,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub delta: f64,
}

pub fn entropy_trajectory(t: &DebateTranscript) -> Vec<EntropyPoint> {
    t.rounds
        .iter()
        .map(|r| EntropyPoint {
            round: r.index,
            entropy_a: r.entropy_a,
            entropy_b: r.entropy_b,
            delta: r.delta,
        })
        .collect()
}

/// Writes the trajectory as CSV (`round,entropy_a,entropy_b,delta`).
pub fn write_entropy_csv<W: Write>(points: &[EntropyPoint], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Opens sessions for both profiles and runs the debate.
pub fn run_debate(
    case: &CaseRecord,
    agent_a: &AgentProfile,
    agent_b: &AgentProfile,
    config: &DebateConfig,
) -> Result<DebateTranscript, DebateError> {
    if agent_a.id == agent_b.id {
        return Err(DebateError::SameAgent(agent_a.id.clone()));
    }
    config.validate()?;
    let session_error = |agent: &AgentProfile, source: AgentError| DebateError::Agent {
        agent: agent.id.clone(),
        round: 0,
        transcript: Box::new(empty_transcript(case, &agent_a.id, &agent_b.id)),
        source,
    };
    let mut a = open_session(agent_a, &case.id).map_err(|e| session_error(agent_a, e))?;
    let mut b = open_session(agent_b, &case.id).map_err(|e| session_error(agent_b, e))?;
    run_debate_with(case, a.as_mut(), b.as_mut(), config)
}

fn empty_transcript(case: &CaseRecord, a: &str, b: &str) -> DebateTranscript {
    DebateTranscript {
        case_id: case.id.clone(),
        symptoms: case.symptoms.clone(),
        agent_a: a.to_string(),
        agent_b: b.to_string(),
        roles: None,
        rounds: Vec::new(),
        joint_recommendation: None,
        final_aggregate: None,
        failure: None,
        metadata: TranscriptMetadata::default(),
    }
}

struct Session<'a> {
    config: &'a DebateConfig,
    a: &'a mut dyn Responder,
    b: &'a mut dyn Responder,
    transcript: DebateTranscript,
    history: Vec<HistoryTurn>,
}

impl Session<'_> {
    fn base_context(&self, agent: &str, role: Role, delta: f64, k: usize) -> PromptContext {
        PromptContext {
            agent_id: agent.to_string(),
            symptoms: self.transcript.symptoms.clone(),
            history: self.history.clone(),
            role,
            contentiousness: delta,
            requested_k: k,
            candidate_labels: self.config.candidate_labels.clone(),
        }
    }

    fn fail(mut self, agent: String, round: usize, source: AgentError) -> DebateError {
        self.transcript.failure = Some(DebateFailure {
            agent: agent.clone(),
            round,
            error: source.to_string(),
            raw_text: source.raw_text().map(str::to_string),
        });
        self.transcript.metadata.finished_at = Some(Utc::now());
        DebateError::Agent {
            agent,
            round,
            source,
            transcript: Box::new(self.transcript),
        }
    }

    fn record(&mut self, round: usize, agent: &str, turn: &AgentResponse) {
        if let Some(at) = turn.received_at {
            self.transcript.metadata.turns.push(TurnTimestamp {
                round,
                agent: agent.to_string(),
                received_at: at,
            });
        }
        self.history.push(HistoryTurn {
            agent_id: agent.to_string(),
            round,
            response: turn.clone(),
        });
    }

    /// Runs one paired turn: agent A answers first, then B sees A's reply.
    fn paired_turn(
        mut self,
        index: usize,
        kind: RoundKind,
        delta: f64,
        roles: (Role, Role),
        k: usize,
    ) -> Result<(Self, DebateRound), DebateError> {
        let id_a = self.a.agent_id().to_string();
        let id_b = self.b.agent_id().to_string();

        let ctx_a = self.base_context(&id_a, roles.0, delta, k);
        let prompt_a = match kind {
            RoundKind::Opening => render_opening_prompt(&ctx_a),
            _ => {
                let opponent = self.latest(&id_b);
                render_debate_prompt(&ctx_a, &opponent)
            }
        };
        let prompt_a = match prompt_a {
            Ok(p) => p,
            Err(e) => return Err(self.fail(id_a, index, e)),
        };
        let turn_a = match self.a.respond(&prompt_a) {
            Ok(t) => t,
            Err(e) => return Err(self.fail(id_a, index, e)),
        };

        // openings are independent, so B must not see A's opening
        if kind != RoundKind::Opening {
            self.record(index, &id_a, &turn_a);
        }
        let ctx_b = self.base_context(&id_b, roles.1, delta, k);
        let prompt_b = match kind {
            RoundKind::Opening => render_opening_prompt(&ctx_b),
            _ => render_debate_prompt(&ctx_b, &turn_a),
        };
        let prompt_b = match prompt_b {
            Ok(p) => p,
            Err(e) => return Err(self.fail(id_b, index, e)),
        };
        let turn_b = match self.b.respond(&prompt_b) {
            Ok(t) => t,
            Err(e) => return Err(self.fail(id_b, index, e)),
        };
        if kind == RoundKind::Opening {
            self.record(index, &id_a, &turn_a);
        }
        self.record(index, &id_b, &turn_b);

        let consensus = kind == RoundKind::Rebuttal
            && consensus_between(&turn_a, &turn_b, self.config.consensus_tolerance);
        let round = DebateRound {
            index,
            kind,
            delta,
            role_a: roles.0,
            role_b: roles.1,
            prompt_a,
            prompt_b,
            entropy_a: turn_entropy(&turn_a)?,
            entropy_b: turn_entropy(&turn_b)?,
            turn_a,
            turn_b,
            consensus_reached: consensus,
        };
        Ok((self, round))
    }

    fn latest(&self, agent: &str) -> AgentResponse {
        self.history
            .iter()
            .rev()
            .find(|t| t.agent_id == agent)
            .map(|t| t.response.clone())
            .expect("opponent has answered the opening")
    }
}

fn joint_recommendation(finale: &DebateRound, a: &str, b: &str) -> String {
    let text_a = finale.turn_a.raw_text.trim();
    let text_b = finale.turn_b.raw_text.trim();
    if text_a == text_b {
        text_a.to_string()
    } else {
        format!("[{a}]\n{text_a}\n\n[{b}]\n{text_b}")
    }
}

/// Runs a debate between two live sessions.
pub fn run_debate_with(
    case: &CaseRecord,
    agent_a: &mut dyn Responder,
    agent_b: &mut dyn Responder,
    config: &DebateConfig,
) -> Result<DebateTranscript, DebateError> {
    config.validate()?;
    let id_a = agent_a.agent_id().to_string();
    let id_b = agent_b.agent_id().to_string();
    if id_a == id_b {
        return Err(DebateError::SameAgent(id_a));
    }
    let mut transcript = empty_transcript(case, &id_a, &id_b);
    transcript.metadata.started_at = Some(Utc::now());
    let mut session = Session {
        config,
        a: agent_a,
        b: agent_b,
        transcript,
        history: Vec::new(),
    };

    let opening_delta = config.delta_for_rebuttal(0);
    let (mut s, opening) = session.paired_turn(
        1,
        RoundKind::Opening,
        opening_delta,
        (Role::Proponent, Role::Proponent),
        config.requested_k,
    )?;
    let roles = assign_roles(&opening.turn_a, &opening.turn_b);
    tracing::debug!(case = %case.id, ?roles, "openings complete");
    s.transcript.roles = Some(roles);
    s.transcript.rounds.push(opening);
    session = s;

    let mut rebuttal = 0;
    while session.transcript.rounds.len() < config.max_rounds {
        let index = session.transcript.rounds.len() + 1;
        let delta = config.delta_for_rebuttal(rebuttal);
        let (s, round) =
            session.paired_turn(index, RoundKind::Rebuttal, delta, roles, config.requested_k)?;
        session = s;
        let done = round.consensus_reached;
        session.transcript.rounds.push(round);
        rebuttal += 1;
        if done {
            tracing::debug!(case = %case.id, round = index, "consensus reached");
            break;
        }
    }

    let index = session.transcript.rounds.len() + 1;
    let last_delta = *config.delta_schedule.last().expect("validated non-empty");
    let (mut s, finale) = session.paired_turn(
        index,
        RoundKind::Finale,
        last_delta,
        (Role::Conciliatory, Role::Conciliatory),
        config.final_round_k,
    )?;
    let aggregate = aggregate_round(&[
        WeightedForecast::new(&id_a, finale.turn_a.predictions.clone(), 1.0),
        WeightedForecast::new(&id_b, finale.turn_b.predictions.clone(), 1.0),
    ])?;
    s.transcript.joint_recommendation = Some(joint_recommendation(&finale, &id_a, &id_b));
    s.transcript.final_aggregate = Some(aggregate);
    s.transcript.rounds.push(finale);
    s.transcript.metadata.finished_at = Some(Utc::now());
    Ok(s.transcript)
}
