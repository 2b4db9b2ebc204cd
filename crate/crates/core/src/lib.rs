//! Adversarial diagnostic debates between prediction agents.
//!
//! Two agents exchange top-k disease predictions over a symptom list while a
//! contentiousness schedule anneals them from combative to conciliatory. Their
//! per-round predictions are combined by confidence-weighted robust
//! aggregation with regret tracking, argument quality is scored by an
//! independent judge, and the final aggregate is used to audit dataset labels.

pub mod agents;
pub mod ara;
pub mod crit;
pub mod dataset;
pub mod debate;
pub mod pairing;
pub mod pipeline;
pub mod probdist;

pub use probdist::{Label, PredictionSet, ProbError};
