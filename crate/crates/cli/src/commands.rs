//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use dxdebate::agents::{open_session, AgentProfile};
use dxdebate::ara::write_trace_csv;
use dxdebate::dataset::{
    audit_ground_truth, confusion_matrix, dedup, evaluate_batch, load_dataset, AccuracyReport,
    AuditReport, CaseRecord, EvalOutcome,
};
use dxdebate::debate::{entropy_trajectory, turn_entropy, write_entropy_csv, DebateTranscript};
use dxdebate::pairing::{default_probe_k, probe_agent, select_pair, AgentProbe, PairSelection};
use dxdebate::pipeline::{
    aggregate_transcript, run_debate_pipeline, run_single, DebateOutcome, PipelineKind,
};
use dxdebate::{Label, PredictionSet};

use crate::config::EngineConfig;
use crate::{AuditArgs, Cli, Command, DebateArgs, EvaluateArgs, PairArgs, QualityArg, ReplayArgs};

const REPLAY_ENTROPY_TOLERANCE: f64 = 1e-6;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => format!("{m}\nrun `dxdebate --help` for usage"),
            CliError::Runtime(e) => format!("{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => EngineConfig::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => EngineConfig::default(),
    };
    match cli.command {
        Command::Debate(args) => cmd_debate(&config, args),
        Command::Evaluate(args) => cmd_evaluate(&config, args),
        Command::Pair(args) => cmd_pair(&config, args),
        Command::Audit(args) => cmd_audit(&config, args),
        Command::Replay(args) => cmd_replay(&config, args),
    }
}

enum Count {
    Exactly(usize),
    AtLeast(usize),
}

/// Roster profiles for the requested ids, or the whole roster.
fn select_agents(
    config: &EngineConfig,
    ids: &Option<Vec<String>>,
    count: Count,
) -> CliResult<Vec<AgentProfile>> {
    let agents: Vec<AgentProfile> = match ids {
        Some(ids) => ids
            .iter()
            .map(|id| {
                config
                    .agent(id.trim())
                    .cloned()
                    .ok_or_else(|| usage(format!("unknown agent id '{}'", id.trim())))
            })
            .collect::<CliResult<_>>()?,
        None => config.agents.clone(),
    };
    for (i, a) in agents.iter().enumerate() {
        if agents[..i].iter().any(|b| b.id == a.id) {
            return Err(usage(format!("agent '{}' listed twice", a.id)));
        }
    }
    match count {
        Count::Exactly(n) if agents.len() != n => Err(usage(format!(
            "this command needs exactly {n} agent(s), got {}",
            agents.len()
        ))),
        Count::AtLeast(n) if agents.len() < n => Err(usage(format!(
            "this command needs at least {n} agent(s), got {}",
            agents.len()
        ))),
        _ => Ok(agents),
    }
}

/// Creates the output directory and checks that it accepts files.
fn prepare_out(config: &EngineConfig, flag: &Option<PathBuf>) -> CliResult<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("dxdebate-out"));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    let _ = fs::remove_file(&probe);
    Ok(dir)
}

fn load_cases(config: &EngineConfig, flag: &Option<PathBuf>) -> CliResult<Vec<CaseRecord>> {
    let path = flag
        .clone()
        .or_else(|| config.dataset.clone())
        .ok_or_else(|| usage("no dataset given; pass --dataset or set `dataset` in the config"))?;
    let records =
        load_dataset(&path).with_context(|| format!("loading dataset {}", path.display()))?;
    let cases = dedup(&records);
    tracing::info!(rows = records.len(), cases = cases.len(), "dataset loaded");
    if cases.is_empty() {
        return Err(anyhow!("dataset {} has no cases", path.display()).into());
    }
    Ok(cases)
}

fn dataset_labels(cases: &[CaseRecord]) -> Vec<Label> {
    let mut labels: Vec<Label> = cases.iter().map(|c| c.truth.clone()).collect();
    labels.sort();
    labels.dedup();
    labels
}

fn candidate_labels(cases: &[CaseRecord], restrict: bool) -> Option<Vec<String>> {
    restrict.then(|| {
        dataset_labels(cases)
            .iter()
            .map(|l| l.to_string())
            .collect()
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, values: &[T]) -> anyhow::Result<()> {
    let mut text = String::new();
    for v in values {
        text.push_str(&serde_json::to_string(v)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_debate_csvs(dir: &Path, outcome: &DebateOutcome) -> anyhow::Result<()> {
    let case = &outcome.transcript.case_id;
    let entropy = dir.join(format!("{case}.entropy.csv"));
    write_entropy_csv(
        &entropy_trajectory(&outcome.transcript),
        fs::File::create(&entropy).with_context(|| format!("writing {}", entropy.display()))?,
    )?;
    let trace = dir.join(format!("{case}.ara.csv"));
    write_trace_csv(
        &outcome.ara.trace,
        fs::File::create(&trace).with_context(|| format!("writing {}", trace.display()))?,
    )?;
    Ok(())
}

fn format_top(p: &PredictionSet, k: usize) -> String {
    let mut s = String::new();
    for (i, (label, mass)) in p.ranked().into_iter().take(k).enumerate() {
        let _ = writeln!(s, "  {}. {} {:.1}%", i + 1, label, mass * 100.0);
    }
    s
}

fn joint_distribution(outcome: &DebateOutcome) -> &PredictionSet {
    outcome
        .transcript
        .final_aggregate
        .as_ref()
        .unwrap_or_else(|| outcome.prediction())
}

fn cmd_debate(config: &EngineConfig, args: DebateArgs) -> CliResult<()> {
    let agents = select_agents(config, &args.common.agents, Count::Exactly(2))?;
    let out = prepare_out(config, &args.common.out)?;
    let cases = load_cases(config, &args.common.dataset)?;
    let case = cases
        .iter()
        .find(|c| c.id == args.case)
        .ok_or_else(|| usage(format!("case '{}' is not in the dataset", args.case)))?;
    let mut debate = config.debate.clone();
    if args.restrict_labels {
        debate.candidate_labels = candidate_labels(&cases, true);
    }

    let transcript_path = out.join(format!("{}.transcript.json", case.id));
    let outcome = match run_debate_pipeline(
        case,
        &agents[0],
        &agents[1],
        config.judge.as_ref(),
        &debate,
        &config.ara,
    ) {
        Ok(o) => o,
        Err(e) => {
            if let Some(partial) = e.partial_transcript() {
                write_json(&transcript_path, partial)?;
                eprintln!(
                    "partial transcript written to {}",
                    transcript_path.display()
                );
            }
            return Err(anyhow::Error::new(e)
                .context(format!("debate on case '{}'", case.id))
                .into());
        }
    };
    write_json(&transcript_path, &outcome.transcript)?;
    write_debate_csvs(&out, &outcome)?;
    println!(
        "case {}: {} rounds, regret {:.6}\njoint top-3:\n{}transcript: {}",
        case.id,
        outcome.transcript.rounds.len(),
        outcome.ara.report.regret,
        format_top(joint_distribution(&outcome), 3),
        transcript_path.display()
    );
    Ok(())
}

fn write_evaluation(
    out: &Path,
    stem: &str,
    report: &AccuracyReport,
    outcomes: &[EvalOutcome],
    labels: &[Label],
) -> anyhow::Result<()> {
    write_json(&out.join(format!("{stem}.report.json")), report)?;
    write_jsonl(&out.join(format!("{stem}.outcomes.jsonl")), outcomes)?;
    let matrix = confusion_matrix(outcomes, labels)?;
    let path = out.join(format!("{stem}.confusion.csv"));
    fs::write(&path, matrix.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{stem}: {:.2}% over {} cases x {} reps (std-dev {:.2}, unscored {})",
        report.mean_percent,
        report.cases,
        report.repetitions,
        report.std_dev_percent,
        report.unscored
    );
    Ok(())
}

fn check_parallelism(flag: Option<usize>, config: &EngineConfig) -> CliResult<usize> {
    match flag.unwrap_or(config.parallelism) {
        0 => Err(usage("parallelism must be at least 1")),
        n => Ok(n),
    }
}

fn cmd_evaluate(config: &EngineConfig, args: EvaluateArgs) -> CliResult<()> {
    let kind = PipelineKind::from(args.pipeline);
    let agents = match kind {
        PipelineKind::Single => select_agents(config, &args.common.agents, Count::AtLeast(1))?,
        PipelineKind::Debate => select_agents(config, &args.common.agents, Count::Exactly(2))?,
    };
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let parallelism = check_parallelism(args.parallelism, config)?;
    let out = prepare_out(config, &args.common.out)?;
    let cases = load_cases(config, &args.common.dataset)?;
    let labels = dataset_labels(&cases);
    let candidates = candidate_labels(&cases, args.restrict_labels);

    match kind {
        PipelineKind::Single => {
            let k = config.debate.requested_k;
            for agent in &agents {
                let (report, outcomes) =
                    evaluate_batch(&cases, kind.as_str(), args.reps, parallelism, |case, _| {
                        run_single(case, agent, k, candidates.as_deref()).map_err(|e| e.to_string())
                    })
                    .map_err(anyhow::Error::new)?;
                write_evaluation(
                    &out,
                    &format!("evaluate.single.{}", agent.id),
                    &report,
                    &outcomes,
                    &labels,
                )?;
            }
        }
        PipelineKind::Debate => {
            let mut debate = config.debate.clone();
            debate.candidate_labels = candidates;
            let (report, outcomes) =
                evaluate_batch(&cases, kind.as_str(), args.reps, parallelism, |case, _| {
                    run_debate_pipeline(
                        case,
                        &agents[0],
                        &agents[1],
                        config.judge.as_ref(),
                        &debate,
                        &config.ara,
                    )
                    .map(|o| o.prediction().clone())
                    .map_err(|e| e.to_string())
                })
                .map_err(anyhow::Error::new)?;
            write_evaluation(&out, "evaluate.debate", &report, &outcomes, &labels)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PairingReport<'a> {
    quality_epsilon: f64,
    probes: &'a [AgentProbe],
    selection: Option<&'a PairSelection>,
}

fn cmd_pair(config: &EngineConfig, args: PairArgs) -> CliResult<()> {
    let agents = select_agents(config, &args.common.agents, Count::AtLeast(2))?;
    let epsilon = args.epsilon.unwrap_or(config.quality_epsilon);
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(usage("--epsilon must be a non-negative number"));
    }
    let judge = match args.quality {
        QualityArg::Crit => Some(
            config
                .judge
                .as_ref()
                .ok_or_else(|| usage("--quality crit needs a judge in the config"))?,
        ),
        QualityArg::Score => None,
    };
    let out = prepare_out(config, &args.common.out)?;
    let mut cases = load_cases(config, &args.common.dataset)?;
    if let Some(n) = args.probe_cases {
        cases.truncate(n);
    }

    let mut probes = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter().enumerate() {
        let k = config
            .probe_k
            .get(&agent.id)
            .copied()
            .unwrap_or_else(|| default_probe_k(i));
        let probe = match judge {
            Some(j) => {
                let mut session = open_session(j, &format!("pairing-{}", agent.id))
                    .map_err(anyhow::Error::new)?;
                probe_agent(agent, &cases, k, Some(session.as_mut()))
            }
            None => probe_agent(agent, &cases, k, None),
        }
        .map_err(anyhow::Error::new)?;
        probes.push(probe);
    }

    println!(
        "{:<16} {:>3} {:>8} {:>9} {:>6}",
        "agent", "k", "entropy", "quality", "cases"
    );
    for p in &probes {
        println!(
            "{:<16} {:>3} {:>8.4} {:>9.4} {:>6}",
            p.agent_id, p.probe_k, p.mean_entropy, p.mean_quality, p.cases_used
        );
    }
    let selection = select_pair(&probes, epsilon);
    write_json(
        &out.join("pairing.json"),
        &PairingReport {
            quality_epsilon: epsilon,
            probes: &probes,
            selection: selection.as_ref().ok(),
        },
    )?;
    let s =
        selection.map_err(|e| anyhow!("{e}; widen --epsilon or probe agents of closer quality"))?;
    println!(
        "selected: {} (high entropy) with {} (low entropy), gap {:.4}, quality difference {:.4}",
        s.high_entropy_agent, s.low_entropy_agent, s.entropy_gap, s.quality_difference
    );
    Ok(())
}

#[derive(Serialize)]
struct AuditSummary {
    pipeline: String,
    margin: f64,
    cases: usize,
    audited: usize,
    failed: usize,
    flagged: usize,
}

fn cmd_audit(config: &EngineConfig, args: AuditArgs) -> CliResult<()> {
    let kind = PipelineKind::from(args.pipeline);
    let agents = match kind {
        PipelineKind::Single => select_agents(config, &args.common.agents, Count::Exactly(1))?,
        PipelineKind::Debate => select_agents(config, &args.common.agents, Count::Exactly(2))?,
    };
    let margin = args.margin.unwrap_or(config.audit_margin);
    if !margin.is_finite() || margin < 0.0 {
        return Err(usage("--margin must be a non-negative number"));
    }
    let parallelism = check_parallelism(args.parallelism, config)?;
    let out = prepare_out(config, &args.common.out)?;
    let cases = load_cases(config, &args.common.dataset)?;
    let candidates = candidate_labels(&cases, args.restrict_labels);
    let transcripts = out.join("transcripts");
    if kind == PipelineKind::Debate {
        fs::create_dir_all(&transcripts)
            .with_context(|| format!("creating {}", transcripts.display()))?;
    }
    let transcript_ref = |case: &CaseRecord| format!("transcripts/{}.transcript.json", case.id);

    let (_, outcomes) = evaluate_batch(
        &cases,
        kind.as_str(),
        1,
        parallelism,
        |case, _| match kind {
            PipelineKind::Single => run_single(
                case,
                &agents[0],
                config.debate.requested_k,
                candidates.as_deref(),
            )
            .map_err(|e| e.to_string()),
            PipelineKind::Debate => {
                let mut debate = config.debate.clone();
                debate.candidate_labels = candidates.clone();
                let outcome = run_debate_pipeline(
                    case,
                    &agents[0],
                    &agents[1],
                    config.judge.as_ref(),
                    &debate,
                    &config.ara,
                )
                .map_err(|e| e.to_string())?;
                write_json(&out.join(transcript_ref(case)), &outcome.transcript)
                    .map_err(|e| format!("{e:#}"))?;
                Ok(outcome.prediction().clone())
            }
        },
    )
    .map_err(anyhow::Error::new)?;

    let mut reports: Vec<AuditReport> = Vec::new();
    for (case, outcome) in cases.iter().zip(&outcomes) {
        let Some(predictions) = &outcome.predictions else {
            continue;
        };
        let reference = (kind == PipelineKind::Debate).then(|| transcript_ref(case));
        reports.push(
            audit_ground_truth(case, predictions, margin, reference.as_deref())
                .map_err(anyhow::Error::new)?,
        );
    }
    let flagged: Vec<&AuditReport> = reports.iter().filter(|r| r.flagged).collect();
    write_jsonl(&out.join("audit.flags.jsonl"), &flagged)?;
    let summary = AuditSummary {
        pipeline: kind.as_str().to_string(),
        margin,
        cases: cases.len(),
        audited: reports.len(),
        failed: cases.len() - reports.len(),
        flagged: flagged.len(),
    };
    write_json(&out.join("audit.summary.json"), &summary)?;
    for r in &flagged {
        println!(
            "flagged {}: label '{}' at {:.1}%, top '{}' at {:.1}%",
            r.case_id,
            r.truth,
            r.truth_mass * 100.0,
            r.top_label,
            r.top_mass * 100.0
        );
    }
    println!(
        "{} of {} audited cases flagged (margin {}, {} failed)",
        summary.flagged, summary.audited, margin, summary.failed
    );
    Ok(())
}

fn cmd_replay(config: &EngineConfig, args: ReplayArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.transcript)
        .with_context(|| format!("reading transcript {}", args.transcript.display()))?;
    let transcript: DebateTranscript = serde_json::from_str(&text)
        .with_context(|| format!("parsing transcript {}", args.transcript.display()))?;
    let out = match (&args.out, &config.output_dir) {
        (None, None) => {
            let dir = args
                .transcript
                .parent()
                .unwrap_or(Path::new("."))
                .to_path_buf();
            prepare_out(config, &Some(dir))?
        }
        _ => prepare_out(config, &args.out)?,
    };

    for round in &transcript.rounds {
        for (agent, turn, recorded) in [
            (&transcript.agent_a, &round.turn_a, round.entropy_a),
            (&transcript.agent_b, &round.turn_b, round.entropy_b),
        ] {
            let h = turn_entropy(turn).map_err(anyhow::Error::new)?;
            if (h - recorded).abs() > REPLAY_ENTROPY_TOLERANCE {
                return Err(anyhow!(
                    "round {} of agent '{agent}': recorded entropy {recorded} differs from recomputed {h}",
                    round.index
                )
                .into());
            }
        }
    }
    let outcome = aggregate_transcript(transcript, config.judge.as_ref(), &config.ara)
        .map_err(|e| anyhow::Error::new(e).context("aggregating transcript"))?;
    write_debate_csvs(&out, &outcome)?;
    println!(
        "case {}: {} rounds verified, regret {:.6}\njoint top-3:\n{}",
        outcome.transcript.case_id,
        outcome.transcript.rounds.len(),
        outcome.ara.report.regret,
        format_top(joint_distribution(&outcome), 3).trim_end()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roster() -> EngineConfig {
        EngineConfig {
            agents: vec![
                AgentProfile::scripted("a", "a"),
                AgentProfile::scripted("b", "b"),
            ],
            ..EngineConfig::default()
        }
    }

    #[test]
    fn agent_selection() {
        let c = roster();
        assert_eq!(
            select_agents(&c, &None, Count::Exactly(2)).unwrap().len(),
            2
        );
        let err =
            select_agents(&c, &Some(vec!["a".into(), "zz".into()]), Count::Exactly(2)).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.message().contains("zz"));
        let one = Some(vec!["a".into()]);
        assert!(select_agents(&c, &one, Count::AtLeast(2)).is_err());
        assert!(select_agents(&c, &Some(vec!["a".into(), "a".into()]), Count::AtLeast(2)).is_err());
    }

    #[test]
    fn top_listing() {
        let p = PredictionSet::from_pairs(&[("x", 0.6), ("y", 0.3), ("z", 0.1)]).unwrap();
        assert_eq!(format_top(&p, 2), "  1. x 60.0%\n  2. y 30.0%\n");
    }
}
