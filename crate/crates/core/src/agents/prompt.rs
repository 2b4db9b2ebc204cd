//! Prompt rendering for the moderator opening and the debate rounds.
//!
//! Debate prompts carry tone, emphasis and language directives taken from a
//! five-level contentiousness table. A continuous contentiousness value maps
//! to the nearest level; exact midpoints go to the more contentious level.

use serde::{Deserialize, Serialize};

use super::{AgentError, AgentResponse};

/// Debate role of an agent for a given turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Proponent,
    DevilsAdvocate,
    Conciliatory,
}

/// One prior turn as seen by the agent being prompted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryTurn {
    pub agent_id: String,
    pub round: usize,
    pub response: AgentResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptContext {
    /// Id of the agent being prompted.
    pub agent_id: String,
    pub symptoms: Vec<String>,
    /// Prior turns in time order.
    pub history: Vec<HistoryTurn>,
    pub role: Role,
    pub contentiousness: f64,
    pub requested_k: usize,
    /// When set, agents are told to choose only among these diseases.
    pub candidate_labels: Option<Vec<String>>,
}

impl PromptContext {
    pub fn opening(agent_id: &str, symptoms: Vec<String>, requested_k: usize) -> Self {
        Self {
            agent_id: agent_id.to_string(),
            symptoms,
            history: Vec::new(),
            role: Role::Proponent,
            contentiousness: 0.9,
            requested_k,
            candidate_labels: None,
        }
    }
}

/// Behavior directives of one contentiousness level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentiousnessLevel {
    pub level: f64,
    pub tone: &'static str,
    pub emphasis: &'static str,
    pub language: &'static str,
}

pub const CONTENTIOUSNESS_LEVELS: [ContentiousnessLevel; 5] = [
    ContentiousnessLevel {
        level: 0.9,
        tone: "Highly confrontational; focused on raising strong clinical and evidential objections to the opposing diagnosis.",
        emphasis: "Flag the risks of misdiagnosis, overlooked differentials, unsupported inferences and symptoms the opposing diagnosis fails to explain.",
        language: "Definitive and polarizing, e.g. \"this diagnosis is NOT supported\", \"unacceptable diagnostic risk\", \"the evidence points elsewhere\".",
    },
    ContentiousnessLevel {
        level: 0.7,
        tone: "Still confrontational but more open to the merits of the opposing diagnosis, albeit overshadowed by its weaknesses.",
        emphasis: "Acknowledge what the opposing reasoning gets right while cautioning against accepting it without further evidence.",
        language: "Less polarizing, e.g. \"serious concerns remain\", \"needs more scrutiny\".",
    },
    ContentiousnessLevel {
        level: 0.5,
        tone: "Balanced; neither advocating strongly for nor against the opposing diagnosis.",
        emphasis: "Give equal weight to the strengths and weaknesses of both positions, looking for a middle ground.",
        language: "Neutral, e.g. \"should be carefully considered\", \"both possibilities remain open\".",
    },
    ContentiousnessLevel {
        level: 0.3,
        tone: "More agreeable than confrontational, but maintaining reservations.",
        emphasis: "Supportive but cautious; focus on ensuring the shared diagnosis is well founded and safe for the patient.",
        language: "Positive but careful, e.g. \"a convincing explanation\", \"worth confirming with tests\".",
    },
    ContentiousnessLevel {
        level: 0.0,
        tone: "Completely agreeable and supportive.",
        emphasis: "Fully focused on consolidating the strongest joint diagnosis and the next diagnostic steps.",
        language: "Very positive, e.g. \"fully agree\", \"a well-supported joint conclusion\".",
    },
];

/// The table row nearest to `delta`; exact midpoints resolve to the higher
/// level.
pub fn contentiousness_level(delta: f64) -> &'static ContentiousnessLevel {
    const TIE_EPS: f64 = 1e-9;
    let mut best = &CONTENTIOUSNESS_LEVELS[0];
    let mut best_dist = (delta - best.level).abs();
    for row in &CONTENTIOUSNESS_LEVELS[1..] {
        let dist = (delta - row.level).abs();
        // rows are in descending order, so a tie keeps the earlier (higher) row
        if dist < best_dist - TIE_EPS {
            best = row;
            best_dist = dist;
        }
    }
    best
}

fn number_word(k: usize) -> String {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    WORDS
        .get(k)
        .map_or_else(|| k.to_string(), |w| (*w).to_string())
}

fn format_instructions(k: usize) -> String {
    format!(
        "List exactly your top-{k} predictions, one per line, in the form \"Disease: NN%\", \
         each followed by its justification."
    )
}

fn candidate_clause(ctx: &PromptContext) -> String {
    match &ctx.candidate_labels {
        Some(labels) if !labels.is_empty() => format!(
            "\nChoose only among the following diseases: {}.",
            labels.join(", ")
        ),
        _ => String::new(),
    }
}

/// The moderator's opening question.
pub fn render_opening_prompt(ctx: &PromptContext) -> Result<String, AgentError> {
    if ctx.symptoms.is_empty() {
        return Err(AgentError::EmptySymptoms);
    }
    if ctx.requested_k == 0 {
        return Err(AgentError::InvalidPrompt(
            "requested k must be at least 1".into(),
        ));
    }
    if !ctx.history.is_empty() {
        return Err(AgentError::InvalidPrompt(
            "the opening prompt is issued before any debate history".into(),
        ));
    }
    let k = ctx.requested_k;
    Ok(format!(
        "What potential disease could be associated with the following symptoms: {symptoms}?\n\
         Please offer top-{word} predictions with probabilities normalized to one, supported by \
         justifications. {format}{candidates}\n\
         Additionally, at the end of the debate, include a list of supplementary symptom inquiries \
         and recommend relevant lab tests to strengthen the confidence in your prediction.",
        symptoms = ctx.symptoms.join(", "),
        word = number_word(k),
        format = format_instructions(k),
        candidates = candidate_clause(ctx),
    ))
}

fn render_turn(response: &AgentResponse) -> String {
    let predictions: Vec<String> = response
        .predictions
        .ranked()
        .into_iter()
        .map(|(label, mass)| format!("- {label}: {:.0}%", mass * 100.0))
        .collect();
    format!(
        "Predictions:\n{}\nJustification:\n{}",
        predictions.join("\n"),
        response.justification.trim()
    )
}

/// A rebuttal or conciliatory prompt answering `opponent_turn`.
pub fn render_debate_prompt(
    ctx: &PromptContext,
    opponent_turn: &AgentResponse,
) -> Result<String, AgentError> {
    if ctx.history.is_empty() {
        return Err(AgentError::InvalidPrompt(
            "debate prompts require at least the opening turns in history".into(),
        ));
    }
    if !(0.0..=1.0).contains(&ctx.contentiousness) {
        return Err(AgentError::InvalidPrompt(format!(
            "contentiousness {} is outside [0, 1]",
            ctx.contentiousness
        )));
    }
    if ctx.symptoms.is_empty() {
        return Err(AgentError::EmptySymptoms);
    }
    let level = contentiousness_level(ctx.contentiousness);
    let k = ctx.requested_k;

    let role_instruction = match ctx.role {
        Role::Proponent => "Defend your diagnosis against your opponent's position below. Revise \
             your probabilities only where the opponent's arguments genuinely warrant it."
            .to_string(),
        Role::DevilsAdvocate => "You are playing devil's advocate. Even where you agree with your \
             opponent, challenge their leading diagnosis: argue for the strongest alternatives and \
             expose every symptom it fails to explain."
            .to_string(),
        Role::Conciliatory => "The debate is ending. Summarize the findings of both sides and \
             recommend a joint diagnosis with justifications. Then include a list of supplementary \
             symptom inquiries and recommend relevant lab tests to confirm the diagnosis."
            .to_string(),
    };

    let own_last = ctx
        .history
        .iter()
        .rev()
        .find(|t| t.agent_id == ctx.agent_id)
        .map(|t| {
            format!(
                "\nYour previous position (round {}):\n{}\n",
                t.round,
                render_turn(&t.response)
            )
        })
        .unwrap_or_default();

    Ok(format!(
        "Symptoms under discussion: {symptoms}.\n\
         Contentiousness level: {level:.1} (requested {delta:.2}).\n\
         Tone: {tone}\n\
         Emphasis: {emphasis}\n\
         Language: {language}\n\n\
         {role_instruction}\n{own_last}\n\
         Your opponent's latest position:\n{opponent}\n\n\
         Please offer top-{word} predictions with probabilities normalized to one, supported by \
         justifications. {format}{candidates}",
        symptoms = ctx.symptoms.join(", "),
        level = level.level,
        delta = ctx.contentiousness,
        tone = level.tone,
        emphasis = level.emphasis,
        language = level.language,
        opponent = render_turn(opponent_turn),
        word = number_word(k),
        format = format_instructions(k),
        candidates = candidate_clause(ctx),
    ))
}
