//! Confidence-weighted robust aggregation with regret tracking.
//!
//! Each round the agents' forecasts are averaged by confidence into an
//! aggregate `w_t`. Every candidate information structure θ in a finite set
//! is rewarded by how well it matches `w_t`, and the aggregator plays the best
//! response for that round. The aggregator's overall strategy is the
//! empirical mixture of its best responses; regret compares it against the
//! single structure that would have scored best in hindsight.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::probdist::{
    discretize, total_variation, DiscreteDist, Label, PredictionSet, ProbError,
    NORMALIZED_TOLERANCE,
};

/// Upper bound on the number of candidate information structures.
pub const MAX_STRUCTURES: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AraError {
    #[error("no forecasts to aggregate")]
    NoForecasts,
    #[error("confidence {value} of '{source_id}' is outside [0, 1]")]
    InvalidConfidence { source_id: String, value: f64 },
    #[error("total confidence is zero")]
    ZeroTotalConfidence,
    #[error("reward history is empty")]
    EmptyHistory,
    #[error("no candidate information structures")]
    EmptyStructureSet,
    #[error("{0} information structures exceed the limit of {MAX_STRUCTURES}")]
    TooManyStructures(usize),
    #[error("duplicate information structure id {0}")]
    DuplicateStructureId(u32),
    #[error("round {round} has {got} rewards, expected {expected}")]
    RewardLengthMismatch {
        round: usize,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// A candidate distribution nature may play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationStructure {
    pub id: u32,
    pub dist: DiscreteDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedForecast {
    pub source: String,
    pub predictions: PredictionSet,
    pub confidence: f64,
}

impl WeightedForecast {
    pub fn new(source: &str, predictions: PredictionSet, confidence: f64) -> Self {
        Self {
            source: source.to_string(),
            predictions,
            confidence,
        }
    }
}

/// How a structure is scored against a round aggregate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "label")]
pub enum RewardFn {
    /// `1 - TVD(θ, normalized w_t)`.
    #[default]
    TotalVariation,
    /// Mass θ assigns to a known ground-truth label.
    TruthMass(Label),
}

/// Confidence-weighted average `Σ c_i p_i / Σ c_i` over the union of labels.
/// The result is not renormalized; it is flagged normalized only when the
/// masses already sum to one.
pub fn aggregate_round(forecasts: &[WeightedForecast]) -> Result<PredictionSet, AraError> {
    if forecasts.is_empty() {
        return Err(AraError::NoForecasts);
    }
    for f in forecasts {
        if !f.confidence.is_finite() || !(0.0..=1.0).contains(&f.confidence) {
            return Err(AraError::InvalidConfidence {
                source_id: f.source.clone(),
                value: f.confidence,
            });
        }
    }
    let total: f64 = forecasts.iter().map(|f| f.confidence).sum();
    if total <= 0.0 {
        return Err(AraError::ZeroTotalConfidence);
    }
    let labels: BTreeSet<&Label> = forecasts
        .iter()
        .flat_map(|f| f.predictions.labels())
        .collect();
    let mut entries = BTreeMap::new();
    for label in labels {
        let weighted: f64 = forecasts
            .iter()
            .map(|f| f.confidence * f.predictions.mass(label))
            .sum();
        entries.insert(label.clone(), (weighted / total).clamp(0.0, 1.0));
    }
    let sum: f64 = entries.values().sum();
    Ok(PredictionSet::from_raw_parts(
        entries,
        (sum - 1.0).abs() <= NORMALIZED_TOLERANCE,
    ))
}

fn normalized_or_raw(w: &PredictionSet) -> PredictionSet {
    if w.is_normalized() {
        w.clone()
    } else {
        w.to_normalized().unwrap_or_else(|_| w.clone())
    }
}

/// Reward of `theta` against the round aggregate `w_t`, in `[0, 1]`.
pub fn reward(theta: &InformationStructure, w_t: &PredictionSet, reward_fn: &RewardFn) -> f64 {
    match reward_fn {
        RewardFn::TotalVariation => {
            let tvd = total_variation(&theta.dist.to_prediction_set(), &normalized_or_raw(w_t));
            (1.0 - tvd).clamp(0.0, 1.0)
        }
        RewardFn::TruthMass(label) => theta.dist.mass(label),
    }
}

/// Rewards closer than this count as tied.
pub const REWARD_TIE_TOLERANCE: f64 = 1e-12;

/// Index of the largest reward; ties go to the lowest index.
pub fn best_response(rewards: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &r) in rewards.iter().enumerate() {
        match best {
            Some((_, b)) if r <= b + REWARD_TIE_TOLERANCE => {}
            _ => best = Some((i, r)),
        }
    }
    best.map(|(i, _)| i)
}

/// One stored round of the aggregation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAggregate {
    pub raw: PredictionSet,
    pub normalized: PredictionSet,
    pub forecasts: Vec<WeightedForecast>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateState {
    pub round: usize,
    pub history: Vec<RoundAggregate>,
    /// Per-round reward vectors, aligned with the structure set.
    pub rewards: Vec<Vec<f64>>,
}

impl AggregateState {
    pub fn current(&self) -> Option<&RoundAggregate> {
        self.history.last()
    }
}

/// Appends one round: aggregates the forecasts and records the reward vector
/// of every structure against the new aggregate.
pub fn propagate(
    mut state: AggregateState,
    round_forecasts: &[WeightedForecast],
    structures: &[InformationStructure],
    reward_fn: &RewardFn,
) -> Result<AggregateState, AraError> {
    let raw = aggregate_round(round_forecasts)?;
    let normalized = normalized_or_raw(&raw);
    let rewards = structures
        .iter()
        .map(|theta| reward(theta, &raw, reward_fn))
        .collect();
    state.history.push(RoundAggregate {
        raw,
        normalized,
        forecasts: round_forecasts.to_vec(),
    });
    state.rewards.push(rewards);
    state.round += 1;
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub best_theta_id: u32,
    pub hindsight_total: f64,
    pub achieved_total: f64,
    pub regret: f64,
}

fn check_history(reward_history: &[Vec<f64>], width: usize) -> Result<(), AraError> {
    if reward_history.is_empty() {
        return Err(AraError::EmptyHistory);
    }
    if width == 0 {
        return Err(AraError::EmptyStructureSet);
    }
    for (round, u) in reward_history.iter().enumerate() {
        if u.len() != width {
            return Err(AraError::RewardLengthMismatch {
                round: round + 1,
                got: u.len(),
                expected: width,
            });
        }
    }
    Ok(())
}

/// Hindsight-best cumulative reward minus the achieved total. `structure_ids`
/// labels the reward columns; `achieved` holds the aggregator's per-round
/// reward.
pub fn regret(
    reward_history: &[Vec<f64>],
    achieved: &[f64],
    structure_ids: &[u32],
) -> Result<RegretReport, AraError> {
    check_history(reward_history, structure_ids.len())?;
    if achieved.len() != reward_history.len() {
        return Err(AraError::RewardLengthMismatch {
            round: 0,
            got: achieved.len(),
            expected: reward_history.len(),
        });
    }
    let totals: Vec<f64> = (0..structure_ids.len())
        .map(|j| reward_history.iter().map(|u| u[j]).sum())
        .collect();
    let best = best_response(&totals).ok_or(AraError::EmptyStructureSet)?;
    let hindsight_total = totals[best];
    let achieved_total: f64 = achieved.iter().sum();
    Ok(RegretReport {
        best_theta_id: structure_ids[best],
        hindsight_total,
        achieved_total,
        regret: hindsight_total - achieved_total,
    })
}

/// Per-round rewards of the mixed strategy that plays each structure with the
/// frequency it was chosen as best response.
pub fn mixture_rewards(reward_history: &[Vec<f64>], choices: &[usize]) -> Vec<f64> {
    let n = choices.len().max(1) as f64;
    let width = reward_history.first().map_or(0, Vec::len);
    let mut weights = vec![0.0; width];
    for &c in choices {
        weights[c] += 1.0 / n;
    }
    reward_history
        .iter()
        .map(|u| u.iter().zip(&weights).map(|(r, w)| r * w).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub label: String,
    pub aggregate_mass: f64,
    pub best_theta_id: u32,
    pub cumulative_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AraOutcome {
    pub final_aggregate: PredictionSet,
    pub report: RegretReport,
    pub trace: Vec<TraceRow>,
    /// Best-response structure id per round.
    pub best_responses: Vec<u32>,
    pub state: AggregateState,
}

fn check_structures(structures: &[InformationStructure]) -> Result<(), AraError> {
    if structures.is_empty() {
        return Err(AraError::EmptyStructureSet);
    }
    if structures.len() > MAX_STRUCTURES {
        return Err(AraError::TooManyStructures(structures.len()));
    }
    let mut seen = BTreeSet::new();
    for s in structures {
        if !seen.insert(s.id) {
            return Err(AraError::DuplicateStructureId(s.id));
        }
    }
    Ok(())
}

/// Runs the best-response loop over `rounds` and reports the regret of the
/// resulting strategy. Structures are considered in ascending id order.
pub fn run_ara(
    rounds: &[Vec<WeightedForecast>],
    structures: &[InformationStructure],
    reward_fn: &RewardFn,
) -> Result<AraOutcome, AraError> {
    check_structures(structures)?;
    if rounds.is_empty() {
        return Err(AraError::EmptyHistory);
    }
    let mut sorted = structures.to_vec();
    sorted.sort_by_key(|s| s.id);
    let ids: Vec<u32> = sorted.iter().map(|s| s.id).collect();

    let mut state = AggregateState::default();
    let mut choices = Vec::with_capacity(rounds.len());
    let mut trace = Vec::new();
    for forecasts in rounds {
        state = propagate(state, forecasts, &sorted, reward_fn)?;
        let u = state.rewards.last().expect("just pushed");
        let choice = best_response(u).expect("structure set is non-empty");
        choices.push(choice);

        let achieved = mixture_rewards(&state.rewards, &choices);
        let cumulative = regret(&state.rewards, &achieved, &ids)?.regret;
        let aggregate = &state.current().expect("just pushed").raw;
        trace.extend(aggregate.iter().map(|(label, mass)| TraceRow {
            round: state.round,
            label: label.to_string(),
            aggregate_mass: mass,
            best_theta_id: ids[choice],
            cumulative_regret: cumulative,
        }));
    }

    let achieved = mixture_rewards(&state.rewards, &choices);
    let report = regret(&state.rewards, &achieved, &ids)?;
    let final_aggregate = state.current().expect("at least one round").raw.clone();
    Ok(AraOutcome {
        final_aggregate,
        report,
        trace,
        best_responses: choices.iter().map(|&c| ids[c]).collect(),
        state,
    })
}

/// Distinct discretized aggregates, in first-seen order with ids from 1.
pub fn structures_from_aggregates(
    aggregates: &[PredictionSet],
) -> Result<Vec<InformationStructure>, AraError> {
    let mut out: Vec<InformationStructure> = Vec::new();
    for w in aggregates {
        let dist = discretize(&normalized_or_raw(w))?;
        if out.iter().any(|s| s.dist == dist) {
            continue;
        }
        out.push(InformationStructure {
            id: out.len() as u32 + 1,
            dist,
        });
    }
    if out.len() > MAX_STRUCTURES {
        return Err(AraError::TooManyStructures(out.len()));
    }
    Ok(out)
}

/// Writes the trace as CSV with a header row.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
