//! End-to-end case pipelines: a single agent's opening answer, or a full
//! debate whose rounds feed robust aggregation.

use serde::{Deserialize, Serialize};

use crate::agents::{open_session, render_opening_prompt, AgentError, AgentProfile, PromptContext};
use crate::ara::{
    aggregate_round, run_ara, structures_from_aggregates, AraError, AraOutcome, RewardFn,
    WeightedForecast,
};
use crate::crit::{crit, extract_document, CritError, CritReport};
use crate::dataset::CaseRecord;
use crate::debate::{run_debate, DebateConfig, DebateError, DebateRound, DebateTranscript};
use crate::probdist::PredictionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    Single,
    Debate,
}

impl PipelineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PipelineKind::Single => "single",
            PipelineKind::Debate => "debate",
        }
    }
}

/// Where per-turn confidence weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfidenceSource {
    /// Every turn weighs 1.
    #[default]
    Uniform,
    /// Judge score Γ of the turn against the opponent turn it answers.
    Crit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AraConfig {
    pub reward: RewardFn,
    pub confidence: ConfidenceSource,
    pub crit_depth: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Debate(#[from] DebateError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("judge: {0}")]
    Crit(#[from] CritError),
    #[error("aggregation: {0}")]
    Ara(#[from] AraError),
    #[error("judge scoring requires a judge profile")]
    MissingJudge,
}

impl PipelineError {
    pub fn partial_transcript(&self) -> Option<&DebateTranscript> {
        match self {
            PipelineError::Debate(e) => e.partial_transcript(),
            _ => None,
        }
    }
}

/// The opening answer of one agent.
pub fn run_single(
    case: &CaseRecord,
    agent: &AgentProfile,
    k: usize,
    candidate_labels: Option<&[String]>,
) -> Result<PredictionSet, PipelineError> {
    let mut session = open_session(agent, &case.id)?;
    let mut ctx = PromptContext::opening(&agent.id, case.symptoms.clone(), k);
    ctx.candidate_labels = candidate_labels.map(<[String]>::to_vec);
    let prompt = render_opening_prompt(&ctx)?;
    Ok(session.respond(&prompt)?.predictions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundConfidence {
    pub round: usize,
    pub confidence_a: f64,
    pub confidence_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateOutcome {
    pub transcript: DebateTranscript,
    pub confidences: Vec<RoundConfidence>,
    pub crit_reports: Vec<CritReport>,
    pub ara: AraOutcome,
}

impl DebateOutcome {
    /// The aggregate of the final round, used as the pipeline's answer.
    pub fn prediction(&self) -> &PredictionSet {
        &self.ara.final_aggregate
    }
}

fn round_forecasts(
    round: &DebateRound,
    t: &DebateTranscript,
    c: &RoundConfidence,
) -> Vec<WeightedForecast> {
    vec![
        WeightedForecast::new(&t.agent_a, round.turn_a.predictions.clone(), c.confidence_a),
        WeightedForecast::new(&t.agent_b, round.turn_b.predictions.clone(), c.confidence_b),
    ]
}

/// Judge scores for every turn. Agent A's turn is weighed against B's turn
/// of the previous round; B's turn against A's turn of the same round.
fn crit_confidences(
    transcript: &DebateTranscript,
    judge: &AgentProfile,
    depth: usize,
) -> Result<(Vec<RoundConfidence>, Vec<CritReport>), PipelineError> {
    let mut session = open_session(judge, &transcript.case_id)?;
    let mut confidences = Vec::new();
    let mut reports = Vec::new();
    let mut previous_b = None;
    for round in &transcript.rounds {
        let doc_a = extract_document(&round.turn_a, previous_b, &transcript.agent_a, round.index);
        let opponent_a = (round.index > 1).then_some(&round.turn_a);
        let doc_b = extract_document(&round.turn_b, opponent_a, &transcript.agent_b, round.index);
        let report_a = crit(session.as_mut(), &doc_a, depth)?;
        let report_b = crit(session.as_mut(), &doc_b, depth)?;
        confidences.push(RoundConfidence {
            round: round.index,
            confidence_a: report_a.gamma_total,
            confidence_b: report_b.gamma_total,
        });
        reports.push(report_a);
        reports.push(report_b);
        previous_b = Some(&round.turn_b);
    }
    Ok((confidences, reports))
}

/// Aggregates a finished transcript round by round and runs the
/// best-response loop over the distinct round aggregates.
pub fn aggregate_transcript(
    transcript: DebateTranscript,
    judge: Option<&AgentProfile>,
    config: &AraConfig,
) -> Result<DebateOutcome, PipelineError> {
    let (confidences, crit_reports) = match config.confidence {
        ConfidenceSource::Uniform => (
            transcript
                .rounds
                .iter()
                .map(|r| RoundConfidence {
                    round: r.index,
                    confidence_a: 1.0,
                    confidence_b: 1.0,
                })
                .collect(),
            Vec::new(),
        ),
        ConfidenceSource::Crit => {
            let judge = judge.ok_or(PipelineError::MissingJudge)?;
            crit_confidences(&transcript, judge, config.crit_depth)?
        }
    };
    let rounds: Vec<Vec<WeightedForecast>> = transcript
        .rounds
        .iter()
        .zip(&confidences)
        .map(|(r, c)| round_forecasts(r, &transcript, c))
        .collect();
    let aggregates = rounds
        .iter()
        .map(|f| aggregate_round(f))
        .collect::<Result<Vec<_>, _>>()?;
    let structures = structures_from_aggregates(&aggregates)?;
    let ara = run_ara(&rounds, &structures, &config.reward)?;
    Ok(DebateOutcome {
        transcript,
        confidences,
        crit_reports,
        ara,
    })
}

/// Debate between `agent_a` and `agent_b`, then aggregation of its rounds.
pub fn run_debate_pipeline(
    case: &CaseRecord,
    agent_a: &AgentProfile,
    agent_b: &AgentProfile,
    judge: Option<&AgentProfile>,
    debate: &DebateConfig,
    ara: &AraConfig,
) -> Result<DebateOutcome, PipelineError> {
    let transcript = run_debate(case, agent_a, agent_b, debate)?;
    aggregate_transcript(transcript, judge, ara)
}
