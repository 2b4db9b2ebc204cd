//! Argument-quality scoring of debate turns by an independent judge.
//!
//! A turn is turned into an [`ArgumentDocument`]: the claim is its rendered
//! prediction list, the reasons are its justification points and the rivals
//! are the opponent's points. The judge rates every reason and rival for
//! validity (γ) and credibility (θ) on 0–10 scales, and the document score is
//!
//! ```text
//! Γ = Σ_R γθ / (Σ_R γθ + Σ_R' γθ)
//! ```
//!
//! with Γ = 0.5 when both sums vanish.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentError, AgentResponse, Responder};

/// Identifier of the judge prompt below; bump when its wording changes.
pub const JUDGE_PROMPT_VERSION: &str = "judge-v1";

const JUDGE_PROMPT_TEMPLATE: &str =
    "You are an impartial judge assessing one argument in a diagnostic debate.\n\
Claim: {claim}\n\
Reason offered: {reason}\n\n\
Rate how validly the reason supports the claim, and how credible its sources and evidence are.\n\
Answer with two integers from 0 to 10 in the form:\n\
Validity: <0-10>\n\
Credibility: <0-10>\n\
Then give a one-sentence rationale.";

const MAX_SCORE: u32 = 10;

#[derive(Debug, thiserror::Error)]
pub enum CritError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("could not read two scores in 0..=10 from judge reply")]
    ParseFailure { raw_text: String },
    #[error("argument document has no claim")]
    EmptyClaim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentDocument {
    pub claim: String,
    pub reasons: Vec<String>,
    pub rivals: Vec<String>,
    pub source_agent: String,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonScore {
    pub gamma: f64,
    pub theta: f64,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritReport {
    pub document: ArgumentDocument,
    pub reason_scores: Vec<ReasonScore>,
    pub rival_scores: Vec<ReasonScore>,
    pub gamma_total: f64,
    pub depth_used: usize,
}

/// Renders the predictions as a single claim sentence.
pub fn render_claim(turn: &AgentResponse) -> String {
    let items: Vec<String> = turn
        .predictions
        .ranked()
        .into_iter()
        .map(|(label, mass)| format!("{label} ({:.0}%)", mass * 100.0))
        .collect();
    format!("The most likely diagnoses are {}.", items.join(", "))
}

fn bullet_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*(?:[-*•+]|\d{1,2}[.)]|\(\d{1,2}\))\s+").expect("valid regex")
    })
}

fn ordinal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:^|[.!?]\s+)((?:First|Second|Third|Fourth|Fifth|Finally|Lastly)(?:ly)?,)")
            .expect("valid regex")
    })
}

fn tidy(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits justification text into individual points. List items win; then
/// ordinal sentences ("First, ... Second, ..."); then blank-line paragraphs.
/// Text ahead of the first list item or ordinal is dropped as preamble.
pub fn split_points(text: &str) -> Vec<String> {
    let mut items: Vec<String> = Vec::new();
    let mut saw_bullet = false;
    for line in text.lines() {
        if let Some(m) = bullet_re().find(line) {
            saw_bullet = true;
            items.push(line[m.end()..].to_string());
        } else if saw_bullet && !line.trim().is_empty() {
            let last = items.last_mut().expect("bullet seen");
            last.push(' ');
            last.push_str(line.trim());
        }
    }
    if saw_bullet {
        return items
            .iter()
            .map(|s| tidy(s))
            .filter(|s| !s.is_empty())
            .collect();
    }

    let starts: Vec<usize> = ordinal_re()
        .captures_iter(text)
        .map(|c| c.get(1).expect("group").start())
        .collect();
    if starts.len() >= 2 {
        return starts
            .iter()
            .enumerate()
            .map(|(i, &s)| tidy(&text[s..starts.get(i + 1).copied().unwrap_or(text.len())]))
            .filter(|s| !s.is_empty())
            .collect();
    }

    text.split("\n\n")
        .map(tidy)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Sentences of `text`, split after `.`, `!` or `?` followed by whitespace.
fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for w in chars.windows(2) {
        let (i, c) = w[0];
        let (_, next) = w[1];
        if matches!(c, '.' | '!' | '?') && next.is_whitespace() {
            out.push(tidy(&text[start..=i]));
            start = i + 1;
        }
    }
    out.push(tidy(&text[start..]));
    out.retain(|s| !s.is_empty());
    out
}

/// Builds the argument document of `turn`, with the opponent's points as
/// rivals.
pub fn extract_document(
    turn: &AgentResponse,
    opponent_turn: Option<&AgentResponse>,
    source_agent: &str,
    round: usize,
) -> ArgumentDocument {
    let mut reasons = split_points(&turn.justification);
    if reasons.is_empty() {
        reasons = vec![tidy(&turn.raw_text)];
    }
    let rivals = opponent_turn
        .map(|o| split_points(&o.justification))
        .unwrap_or_default();
    ArgumentDocument {
        claim: render_claim(turn),
        reasons,
        rivals,
        source_agent: source_agent.to_string(),
        round,
    }
}

pub fn render_judge_prompt(reason: &str, claim: &str) -> String {
    JUDGE_PROMPT_TEMPLATE
        .replace("{claim}", claim)
        .replace("{reason}", reason)
}

fn score_in_range(raw: &str) -> Option<u32> {
    raw.parse::<u32>().ok().filter(|&v| v <= MAX_SCORE)
}

/// Reads (validity, credibility) from a judge reply, on 0–10 scales.
pub fn parse_judge_scores(text: &str) -> Result<(u32, u32), CritError> {
    static KEYED: OnceLock<(Regex, Regex)> = OnceLock::new();
    let (validity, credibility) = KEYED.get_or_init(|| {
        (
            Regex::new(r"(?i)validity\D{0,20}?(\d+)").expect("valid regex"),
            Regex::new(r"(?i)credibility\D{0,20}?(\d+)").expect("valid regex"),
        )
    });
    let failure = || CritError::ParseFailure {
        raw_text: text.to_string(),
    };
    if let (Some(v), Some(c)) = (validity.captures(text), credibility.captures(text)) {
        let v = score_in_range(&v[1]).ok_or_else(failure)?;
        let c = score_in_range(&c[1]).ok_or_else(failure)?;
        return Ok((v, c));
    }
    static INTS: OnceLock<Regex> = OnceLock::new();
    let ints = INTS.get_or_init(|| Regex::new(r"\d+").expect("valid regex"));
    let stripped = text.replace("/10", "");
    let found: Vec<&str> = ints
        .find_iter(&stripped)
        .take(2)
        .map(|m| m.as_str())
        .collect();
    match found.as_slice() {
        [v, c] => Ok((
            score_in_range(v).ok_or_else(failure)?,
            score_in_range(c).ok_or_else(failure)?,
        )),
        _ => Err(failure()),
    }
}

/// Asks `judge` to rate `reason ⇒ claim`.
pub fn score_reason(
    judge: &mut dyn Responder,
    reason: &str,
    claim: &str,
) -> Result<ReasonScore, CritError> {
    let reply = judge.complete(&render_judge_prompt(reason, claim))?;
    let (v, c) = parse_judge_scores(&reply)?;
    Ok(ReasonScore {
        gamma: f64::from(v) / f64::from(MAX_SCORE),
        theta: f64::from(c) / f64::from(MAX_SCORE),
        rationale: reply.trim().to_string(),
    })
}

/// Document score from the reason and rival scores.
pub fn gamma_total(reasons: &[ReasonScore], rivals: &[ReasonScore]) -> f64 {
    let support: f64 = reasons.iter().map(|s| s.gamma * s.theta).sum();
    let against: f64 = rivals.iter().map(|s| s.gamma * s.theta).sum();
    if support + against <= 0.0 {
        return 0.5;
    }
    (support / (support + against)).clamp(0.0, 1.0)
}

/// Scores `doc` with `judge`. With `depth_limit > 0` a multi-sentence reason
/// is scored as a sub-document (its first sentence as claim, the rest as
/// reasons) and contributes that sub-document's Γ as γ and its mean θ.
pub fn crit(
    judge: &mut dyn Responder,
    doc: &ArgumentDocument,
    depth_limit: usize,
) -> Result<CritReport, CritError> {
    if doc.claim.trim().is_empty() {
        return Err(CritError::EmptyClaim);
    }
    let mut depth_used = 0;
    let mut reason_scores = Vec::with_capacity(doc.reasons.len());
    for reason in &doc.reasons {
        let parts = sentences(reason);
        if depth_limit > 0 && parts.len() >= 2 {
            let sub = ArgumentDocument {
                claim: parts[0].clone(),
                reasons: parts[1..].to_vec(),
                rivals: Vec::new(),
                source_agent: doc.source_agent.clone(),
                round: doc.round,
            };
            let report = crit(judge, &sub, depth_limit - 1)?;
            depth_used = depth_used.max(report.depth_used + 1);
            let theta = report.reason_scores.iter().map(|s| s.theta).sum::<f64>()
                / report.reason_scores.len() as f64;
            reason_scores.push(ReasonScore {
                gamma: report.gamma_total,
                theta,
                rationale: format!("scored as a {}-reason sub-argument", sub.reasons.len()),
            });
        } else {
            reason_scores.push(score_reason(judge, reason, &doc.claim)?);
        }
    }
    let rival_scores = doc
        .rivals
        .iter()
        .map(|rival| score_reason(judge, rival, &doc.claim))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CritReport {
        gamma_total: gamma_total(&reason_scores, &rival_scores),
        document: doc.clone(),
        reason_scores,
        rival_scores,
        depth_used,
    })
}
