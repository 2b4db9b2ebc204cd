//! Symptom/disease case corpus: loading, deduplication, top-k scoring, batch
//! evaluation, confusion matrices and ground-truth audits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::probdist::{Label, PredictionSet, ProbError};

/// Most symptoms a case may carry.
pub const MAX_SYMPTOMS: usize = 17;

/// Default probability margin for ground-truth audits.
pub const DEFAULT_AUDIT_MARGIN: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: u64, reason: String },
    #[error("CSV header has no disease column")]
    MissingDiseaseColumn,
    #[error("repetitions must be at least 1")]
    InvalidRepetitions,
    #[error("label subset is empty")]
    EmptySubset,
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub symptoms: Vec<String>,
    pub truth: Label,
}

/// Trims, lowercases, turns underscores into spaces and collapses runs of
/// whitespace.
pub fn canonical_symptom(raw: &str) -> String {
    raw.replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn load_dataset(path: &Path) -> Result<Vec<CaseRecord>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_dataset_from_reader(file)
}

/// Parses a CSV with a header row. The disease column is found by name
/// (case-insensitive); an optional `id` / `case_id` column names the cases;
/// every other column holds one symptom per cell.
pub fn load_dataset_from_reader<R: Read>(reader: R) -> Result<Vec<CaseRecord>, DatasetError> {
    let mut csv = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let malformed = |line: u64, reason: String| DatasetError::MalformedCsv { line, reason };
    let headers = csv
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let column = |names: &[&str]| {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
    };
    let disease_col =
        column(&["disease", "prognosis", "diagnosis"]).ok_or(DatasetError::MissingDiseaseColumn)?;
    let id_col = column(&["id", "case_id", "case-id"]);

    let mut records = Vec::new();
    for (index, row) in csv.records().enumerate() {
        let line = index as u64 + 2;
        let row = row.map_err(|e| malformed(line, e.to_string()))?;
        let line = row.position().map_or(line, |p| p.line());
        let disease = row.get(disease_col).unwrap_or("");
        let truth =
            Label::new(disease).map_err(|_| malformed(line, "disease cell is empty".into()))?;
        let mut symptoms: Vec<String> = Vec::new();
        for (col, cell) in row.iter().enumerate() {
            if col == disease_col || Some(col) == id_col {
                continue;
            }
            let symptom = canonical_symptom(cell);
            if !symptom.is_empty() && !symptoms.contains(&symptom) {
                symptoms.push(symptom);
            }
        }
        if symptoms.is_empty() {
            return Err(malformed(line, "row has no symptoms".into()));
        }
        if symptoms.len() > MAX_SYMPTOMS {
            return Err(malformed(
                line,
                format!(
                    "{} symptoms exceed the limit of {MAX_SYMPTOMS}",
                    symptoms.len()
                ),
            ));
        }
        let id = id_col
            .and_then(|c| row.get(c))
            .filter(|s| !s.is_empty())
            .map_or_else(|| format!("case-{:04}", index + 1), str::to_string);
        records.push(CaseRecord {
            id,
            symptoms,
            truth,
        });
    }
    Ok(records)
}

/// Drops records whose (label, symptom set) was already seen, keeping the
/// first occurrence.
pub fn dedup(records: &[CaseRecord]) -> Vec<CaseRecord> {
    let mut seen: HashSet<(Label, BTreeSet<String>)> = HashSet::new();
    records
        .iter()
        .filter(|r| seen.insert((r.truth.clone(), r.symptoms.iter().cloned().collect())))
        .cloned()
        .collect()
}

/// 1.0, 0.5 or 0.25 when `truth` is ranked first, second or third among the
/// positive masses; otherwise 0.
pub fn score_topk(predictions: &PredictionSet, truth: &Label) -> f64 {
    score_for_rank(predictions.rank_of(truth))
}

pub fn score_for_rank(rank: Option<usize>) -> f64 {
    match rank {
        Some(1) => 1.0,
        Some(2) => 0.5,
        Some(3) => 0.25,
        _ => 0.0,
    }
}

/// Result of evaluating one case in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub case_id: String,
    pub pipeline: String,
    pub repetition: usize,
    pub truth: Label,
    pub predictions: Option<PredictionSet>,
    pub score: Option<f64>,
    pub truth_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EvalOutcome {
    pub fn is_scored(&self) -> bool {
        self.score.is_some()
    }

    pub fn top_label(&self) -> Option<&Label> {
        self.predictions.as_ref()?.top().map(|(l, _)| l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub pipeline: String,
    pub cases: usize,
    pub repetitions: usize,
    /// Mean score over scored outcomes, as a percentage.
    pub mean_percent: f64,
    /// Population standard deviation of the per-repetition percentages.
    pub std_dev_percent: f64,
    pub per_repetition_percent: Vec<f64>,
    pub scored: usize,
    pub unscored: usize,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Evaluates every case `repetitions` times with `evaluate`, on at most
/// `parallelism` worker threads. Failed evaluations are kept as unscored
/// outcomes and excluded from the means.
pub fn evaluate_batch<F>(
    cases: &[CaseRecord],
    pipeline: &str,
    repetitions: usize,
    parallelism: usize,
    evaluate: F,
) -> Result<(AccuracyReport, Vec<EvalOutcome>), DatasetError>
where
    F: Fn(&CaseRecord, usize) -> Result<PredictionSet, String> + Sync,
{
    if repetitions == 0 {
        return Err(DatasetError::InvalidRepetitions);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| DatasetError::ThreadPool(e.to_string()))?;
    let jobs: Vec<(usize, &CaseRecord)> = (0..repetitions)
        .flat_map(|rep| cases.iter().map(move |c| (rep, c)))
        .collect();
    let outcomes: Vec<EvalOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(rep, case)| match evaluate(case, rep) {
                Ok(predictions) => {
                    let rank = predictions.rank_of(&case.truth);
                    EvalOutcome {
                        case_id: case.id.clone(),
                        pipeline: pipeline.to_string(),
                        repetition: rep,
                        truth: case.truth.clone(),
                        score: Some(score_for_rank(rank)),
                        truth_rank: rank,
                        predictions: Some(predictions),
                        error: None,
                    }
                }
                Err(error) => {
                    tracing::warn!(case = %case.id, repetition = rep, %error, "case unscored");
                    EvalOutcome {
                        case_id: case.id.clone(),
                        pipeline: pipeline.to_string(),
                        repetition: rep,
                        truth: case.truth.clone(),
                        predictions: None,
                        score: None,
                        truth_rank: None,
                        error: Some(error),
                    }
                }
            })
            .collect()
    });
    Ok((
        summarize(pipeline, cases.len(), repetitions, &outcomes),
        outcomes,
    ))
}

/// Aggregates outcomes into an accuracy report.
pub fn summarize(
    pipeline: &str,
    cases: usize,
    repetitions: usize,
    outcomes: &[EvalOutcome],
) -> AccuracyReport {
    let scores: Vec<f64> = outcomes.iter().filter_map(|o| o.score).collect();
    let per_repetition_percent: Vec<f64> = (0..repetitions)
        .map(|rep| {
            let rep_scores: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.repetition == rep)
                .filter_map(|o| o.score)
                .collect();
            mean(&rep_scores) * 100.0
        })
        .collect();
    let rep_mean = mean(&per_repetition_percent);
    let variance = mean(
        &per_repetition_percent
            .iter()
            .map(|p| (p - rep_mean).powi(2))
            .collect::<Vec<_>>(),
    );
    AccuracyReport {
        pipeline: pipeline.to_string(),
        cases,
        repetitions,
        mean_percent: mean(&scores) * 100.0,
        std_dev_percent: variance.sqrt(),
        per_repetition_percent,
        scored: scores.len(),
        unscored: outcomes.len() - scores.len(),
    }
}

/// Rows are truth labels, columns the top-1 prediction; the last column
/// counts predictions outside the subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub const OTHER: &'static str = "other";

    pub fn count(&self, truth: &Label, predicted: &Label) -> u64 {
        let Some(row) = self.labels.iter().position(|l| l == truth) else {
            return 0;
        };
        let col = self
            .labels
            .iter()
            .position(|l| l == predicted)
            .unwrap_or(self.labels.len());
        self.counts[row][col]
    }

    pub fn other(&self, truth: &Label) -> u64 {
        self.labels
            .iter()
            .position(|l| l == truth)
            .map_or(0, |row| self.counts[row][self.labels.len()])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["truth".to_string()];
        header.extend(self.labels.iter().map(|l| l.to_string()));
        header.push(Self::OTHER.to_string());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let mut record = vec![label.to_string()];
            record.extend(row.iter().map(u64::to_string));
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

/// Tallies top-1 predictions of scored outcomes whose truth lies in
/// `label_subset`.
pub fn confusion_matrix(
    outcomes: &[EvalOutcome],
    label_subset: &[Label],
) -> Result<ConfusionMatrix, DatasetError> {
    if label_subset.is_empty() {
        return Err(DatasetError::EmptySubset);
    }
    let mut labels: Vec<Label> = Vec::new();
    for l in label_subset {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }
    let index: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut counts = vec![vec![0u64; labels.len() + 1]; labels.len()];
    for outcome in outcomes.iter().filter(|o| o.is_scored()) {
        let Some(&row) = index.get(&outcome.truth) else {
            continue;
        };
        let col = outcome
            .top_label()
            .and_then(|l| index.get(l).copied())
            .unwrap_or(labels.len());
        counts[row][col] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub case_id: String,
    pub truth: Label,
    pub truth_mass: f64,
    pub truth_rank: Option<usize>,
    pub top_label: Label,
    pub top_mass: f64,
    /// Top-1 mass minus truth mass.
    pub gap: f64,
    pub margin: f64,
    pub flagged: bool,
    pub aggregate: PredictionSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
}

/// Flags `case` when its truth label trails the aggregate's top prediction by
/// more than `margin` and is not among the top three.
pub fn audit_ground_truth(
    case: &CaseRecord,
    final_aggregate: &PredictionSet,
    margin: f64,
    transcript: Option<&str>,
) -> Result<AuditReport, DatasetError> {
    let aggregate = final_aggregate.to_normalized()?;
    let (top_label, top_mass) = aggregate
        .top()
        .map(|(l, m)| (l.clone(), m))
        .ok_or(ProbError::AllZeroWeights)?;
    let truth_mass = aggregate.mass(&case.truth);
    let truth_rank = aggregate.rank_of(&case.truth);
    let outside_top3 = truth_rank.is_none_or(|r| r > 3);
    Ok(AuditReport {
        case_id: case.id.clone(),
        truth: case.truth.clone(),
        truth_mass,
        truth_rank,
        top_label,
        top_mass,
        gap: top_mass - truth_mass,
        margin,
        flagged: truth_mass + margin < top_mass && outside_top3,
        aggregate,
        transcript: transcript.map(str::to_string),
    })
}
