//! Entropy-based agent pairing.
//!
//! Each candidate is probed on a few cases for the mean entropy of its
//! predictions and a quality score. Among the pairs whose qualities differ by
//! at most ε, the pair with the largest entropy gap is chosen, giving one
//! explorative and one exploitative debater.

use serde::{Deserialize, Serialize};

use crate::agents::{
    open_session, render_opening_prompt, AgentError, AgentProfile, PromptContext, Responder,
};
use crate::crit::{crit, extract_document, CritError};
use crate::dataset::{score_topk, CaseRecord};
use crate::debate::turn_entropy;
use crate::probdist::ProbError;

/// Default tolerance on the quality difference of a pair.
pub const DEFAULT_QUALITY_EPSILON: f64 = 0.10;

/// Probe k values, assigned to candidates in turn.
pub const DEFAULT_PROBE_KS: [usize; 2] = [2, 8];

const GAP_EPS: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum PairingError {
    #[error("need at least two probes, got {0}")]
    TooFewProbes(usize),
    #[error("no pair of agents has qualities within {epsilon}")]
    NoEligiblePair { epsilon: f64 },
    #[error("probing needs at least one case")]
    NoCases,
    #[error("probe k {0} is outside [1, 10]")]
    InvalidK(usize),
    #[error("probe of agent '{agent}' on case '{case}' failed: {source}")]
    Agent {
        agent: String,
        case: String,
        #[source]
        source: AgentError,
    },
    #[error(transparent)]
    Crit(#[from] CritError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProbe {
    pub agent_id: String,
    pub mean_entropy: f64,
    pub mean_quality: f64,
    pub probe_k: usize,
    pub cases_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSelection {
    pub high_entropy_agent: String,
    pub low_entropy_agent: String,
    pub entropy_gap: f64,
    pub quality_difference: f64,
}

/// k used for the `index`-th candidate when none is configured.
pub fn default_probe_k(index: usize) -> usize {
    DEFAULT_PROBE_KS[index % DEFAULT_PROBE_KS.len()]
}

/// Asks `agent` the opening question on every case with `k` predictions.
/// Quality is the mean top-3 score against the case labels, or the mean
/// judge score of the answers when `judge` is given.
pub fn probe_agent(
    agent: &AgentProfile,
    cases: &[CaseRecord],
    k: usize,
    mut judge: Option<&mut dyn Responder>,
) -> Result<AgentProbe, PairingError> {
    if cases.is_empty() {
        return Err(PairingError::NoCases);
    }
    if !(1..=10).contains(&k) {
        return Err(PairingError::InvalidK(k));
    }
    let agent_error = |case: &CaseRecord, source: AgentError| PairingError::Agent {
        agent: agent.id.clone(),
        case: case.id.clone(),
        source,
    };
    let mut entropy_sum = 0.0;
    let mut quality_sum = 0.0;
    for case in cases {
        let mut session = open_session(agent, &case.id).map_err(|e| agent_error(case, e))?;
        let ctx = PromptContext::opening(&agent.id, case.symptoms.clone(), k);
        let prompt = render_opening_prompt(&ctx).map_err(|e| agent_error(case, e))?;
        let turn = session.respond(&prompt).map_err(|e| agent_error(case, e))?;
        entropy_sum += turn_entropy(&turn)?;
        quality_sum += match judge.as_deref_mut() {
            Some(j) => crit(j, &extract_document(&turn, None, &agent.id, 1), 0)?.gamma_total,
            None => score_topk(&turn.predictions, &case.truth),
        };
    }
    let n = cases.len() as f64;
    Ok(AgentProbe {
        agent_id: agent.id.clone(),
        mean_entropy: entropy_sum / n,
        mean_quality: quality_sum / n,
        probe_k: k,
        cases_used: cases.len(),
    })
}

/// The quality-eligible pair with the largest entropy gap. Equal gaps go to
/// the lexicographically smallest (sorted) id pair.
pub fn select_pair(
    probes: &[AgentProbe],
    quality_epsilon: f64,
) -> Result<PairSelection, PairingError> {
    if probes.len() < 2 {
        return Err(PairingError::TooFewProbes(probes.len()));
    }
    let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
    for i in 0..probes.len() {
        for j in (i + 1)..probes.len() {
            let (p, q) = (&probes[i], &probes[j]);
            if (p.mean_quality - q.mean_quality).abs() > quality_epsilon + GAP_EPS {
                continue;
            }
            let gap = (p.mean_entropy - q.mean_entropy).abs();
            let key = if p.agent_id <= q.agent_id {
                (p.agent_id.as_str(), q.agent_id.as_str())
            } else {
                (q.agent_id.as_str(), p.agent_id.as_str())
            };
            let better = match best {
                None => true,
                Some((g, k, _, _)) => gap > g + GAP_EPS || ((gap - g).abs() <= GAP_EPS && key < k),
            };
            if better {
                best = Some((gap, key, i, j));
            }
        }
    }
    let (gap, _, i, j) = best.ok_or(PairingError::NoEligiblePair {
        epsilon: quality_epsilon,
    })?;
    let (p, q) = (&probes[i], &probes[j]);
    let (high, low) = if p.mean_entropy > q.mean_entropy
        || (p.mean_entropy == q.mean_entropy && p.agent_id <= q.agent_id)
    {
        (p, q)
    } else {
        (q, p)
    };
    Ok(PairSelection {
        high_entropy_agent: high.agent_id.clone(),
        low_entropy_agent: low.agent_id.clone(),
        entropy_gap: gap,
        quality_difference: (p.mean_quality - q.mean_quality).abs(),
    })
}
