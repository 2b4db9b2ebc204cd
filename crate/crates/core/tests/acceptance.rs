//! Acceptance suite. Every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line; the process exits nonzero if any criterion fails.
//!
//! Set `KAGGLE_SYMPTOM_CSV` to the full symptom/disease CSV to enable the
//! real-file deduplication check.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dxdebate::agents::AgentProfile;
use dxdebate::ara::{
    aggregate_round, run_ara, structures_from_aggregates, InformationStructure, RewardFn,
    WeightedForecast,
};
use dxdebate::crit::{gamma_total, ReasonScore};
use dxdebate::dataset::{dedup, load_dataset, load_dataset_from_reader, score_topk};
use dxdebate::debate::{entropy_trajectory, DebateConfig};
use dxdebate::pairing::{select_pair, AgentProbe};
use dxdebate::pipeline::{run_debate_pipeline, AraConfig};
use dxdebate::probdist::{discretize, entropy_lower_bound, mixture, shannon_entropy};
use dxdebate::{Label, PredictionSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, || {
        format!("took {elapsed:?}, budget {budget:?}")
    })
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn label(name: &str) -> Label {
    Label::new(name).unwrap()
}

/// Random normalized distribution over `n` labels drawn from `pool`.
fn random_dist(rng: &mut ChaCha8Rng, pool: &[&str], n: usize) -> PredictionSet {
    let mut names: Vec<&str> = pool.to_vec();
    for i in 0..n {
        let j = rng.random_range(i..names.len());
        names.swap(i, j);
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut masses: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // fold the rounding residue into the first label so the set is exactly normalized
    let residue = 1.0 - masses.iter().sum::<f64>();
    masses[0] += residue;
    PredictionSet::from_masses(names[..n].iter().zip(masses).map(|(n, m)| (label(n), m))).unwrap()
}

const POOL: [&str; 12] = [
    "dengue",
    "chikungunya",
    "zika",
    "influenza",
    "malaria",
    "typhoid",
    "measles",
    "covid",
    "hepatitis a",
    "leptospirosis",
    "rubella",
    "yellow fever",
];

fn criterion_1() -> Outcome {
    let gpt = PredictionSet::from_pairs(&[
        ("CHIKV", 0.5),
        ("DF", 0.2),
        ("Influenza", 0.1),
        ("ZIKV", 0.0),
    ])
    .unwrap();
    let gemini = PredictionSet::from_pairs(&[
        ("CHIKV", 0.3),
        ("DF", 0.4),
        ("Influenza", 0.0),
        ("ZIKV", 0.2),
    ])
    .unwrap();
    let forecasts = [
        WeightedForecast::new("gpt-4", gpt, 0.8),
        WeightedForecast::new("gemini", gemini, 0.7),
    ];
    let start = Instant::now();
    let w = aggregate_round(&forecasts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for (name, percent) in [
        ("chikv", 40.67),
        ("df", 29.33),
        ("influenza", 5.33),
        ("zikv", 9.33),
    ] {
        let got = w.get(name).unwrap_or(f64::NAN) * 100.0;
        check((got - percent).abs() <= 0.01, || {
            format!("{name}: {got:.4}% vs {percent}%")
        })?;
    }
    within_budget(elapsed, Duration::from_millis(1))?;
    Ok(format!("aggregate within 0.01 pp in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut checks = 0;
    let mut equality_cases = 0;
    for _ in 0..1000 {
        let na = rng.random_range(2..=10);
        let nb = rng.random_range(2..=10);
        let p_a = random_dist(&mut rng, &POOL, na);
        let p_b = random_dist(&mut rng, &POOL, nb);
        for step in 0..=10 {
            let alpha = f64::from(step) / 10.0;
            for (a, b) in [(&p_a, &p_b), (&p_a, &p_a)] {
                let h = shannon_entropy(&mixture(a, b, alpha).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let bound = entropy_lower_bound(a, b, alpha).map_err(|e| e.to_string())?;
                check(h >= bound - 1e-9, || {
                    format!("H(mix) {h} < bound {bound} at alpha {alpha}")
                })?;
                if std::ptr::eq(a, b) {
                    check((h - bound).abs() <= 1e-9, || {
                        format!("identical pair: {h} vs {bound}")
                    })?;
                    equality_cases += 1;
                }
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "{checks} mixtures, {equality_cases} equality cases, {elapsed:?}"
    ))
}

/// Independent reward for the regret oracle.
fn oracle_reward(
    theta: &InformationStructure,
    w: &BTreeMap<String, f64>,
    reward: &RewardFn,
) -> f64 {
    match reward {
        RewardFn::TotalVariation => {
            let total: f64 = w.values().sum();
            let mut names: BTreeSet<String> = w.keys().cloned().collect();
            names.extend(theta.dist.bins().keys().map(|l| l.to_string()));
            let tv: f64 = names
                .iter()
                .map(|n| {
                    let t = f64::from(theta.dist.bin(&label(n))) / 1000.0;
                    let p = w.get(n).copied().unwrap_or(0.0) / total;
                    (t - p).abs()
                })
                .sum::<f64>()
                / 2.0;
            (1.0 - tv).clamp(0.0, 1.0)
        }
        RewardFn::TruthMass(l) => f64::from(theta.dist.bin(l)) / 1000.0,
    }
}

/// Confidence-weighted average computed directly from the forecasts.
fn oracle_aggregate(forecasts: &[WeightedForecast]) -> BTreeMap<String, f64> {
    let total: f64 = forecasts.iter().map(|f| f.confidence).sum();
    let mut out = BTreeMap::new();
    for f in forecasts {
        for (l, m) in f.predictions.iter() {
            *out.entry(l.to_string()).or_insert(0.0) += f.confidence * m / total;
        }
    }
    out
}

struct OracleReport {
    best_id: u32,
    hindsight: f64,
    achieved: f64,
}

/// Index of the largest value; values within 1e-12 of each other tie and go
/// to the lowest index.
fn oracle_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..values.len() {
        if values[j] > values[best] + 1e-12 {
            best = j;
        }
    }
    best
}

/// Enumerates every structure's cumulative reward and replays the
/// best-response mixture.
fn oracle_regret(
    rounds: &[Vec<WeightedForecast>],
    structures: &[InformationStructure],
    reward: &RewardFn,
) -> OracleReport {
    let mut sorted = structures.to_vec();
    sorted.sort_by_key(|s| s.id);
    let u: Vec<Vec<f64>> = rounds
        .iter()
        .map(|f| {
            let w = oracle_aggregate(f);
            sorted
                .iter()
                .map(|s| oracle_reward(s, &w, reward))
                .collect()
        })
        .collect();
    let mut counts = vec![0usize; sorted.len()];
    for row in &u {
        counts[oracle_argmax(row)] += 1;
    }
    let totals: Vec<f64> = (0..sorted.len())
        .map(|j| u.iter().map(|r| r[j]).sum())
        .collect();
    let best = oracle_argmax(&totals);
    let t = u.len() as f64;
    let achieved = u
        .iter()
        .map(|row| {
            row.iter()
                .zip(&counts)
                .map(|(r, &c)| r * c as f64 / t)
                .sum::<f64>()
        })
        .sum();
    OracleReport {
        best_id: sorted[best].id,
        hindsight: totals[best],
        achieved,
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pool = &POOL[..6];
    let start = Instant::now();
    let mut covering = 0;
    for instance in 0..100 {
        let covering_set = instance % 2 == 0;
        let t = if covering_set {
            rng.random_range(1..=20)
        } else {
            rng.random_range(1..=50)
        };
        let rounds: Vec<Vec<WeightedForecast>> = (0..t)
            .map(|_| {
                (0..rng.random_range(1..=3))
                    .map(|i| {
                        let n = rng.random_range(1..=pool.len());
                        let c = rng.random_range(1..=10) as f64 / 10.0;
                        WeightedForecast::new(
                            &format!("agent{i}"),
                            random_dist(&mut rng, pool, n),
                            c,
                        )
                    })
                    .collect()
            })
            .collect();
        let structures = if covering_set {
            let aggregates = rounds
                .iter()
                .map(|f| aggregate_round(f))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            structures_from_aggregates(&aggregates).map_err(|e| e.to_string())?
        } else {
            let mut ids: Vec<u32> = (1..=40).collect();
            let size = rng.random_range(1..=20);
            (0..size)
                .map(|i| {
                    let j = rng.random_range(i..ids.len());
                    ids.swap(i, j);
                    let n = rng.random_range(1..=pool.len());
                    InformationStructure {
                        id: ids[i],
                        dist: discretize(&random_dist(&mut rng, pool, n)).unwrap(),
                    }
                })
                .collect()
        };
        let reward = if rng.random_bool(0.5) {
            RewardFn::TotalVariation
        } else {
            RewardFn::TruthMass(label(pool[rng.random_range(0..pool.len())]))
        };
        let got = run_ara(&rounds, &structures, &reward)
            .map_err(|e| format!("instance {instance}: {e}"))?;
        let want = oracle_regret(&rounds, &structures, &reward);
        let r = &got.report;

        check((r.hindsight_total - want.hindsight).abs() <= 1e-9, || {
            format!(
                "instance {instance}: hindsight {} vs {}",
                r.hindsight_total, want.hindsight
            )
        })?;
        check((r.achieved_total - want.achieved).abs() <= 1e-9, || {
            format!(
                "instance {instance}: achieved {} vs {}",
                r.achieved_total, want.achieved
            )
        })?;
        check(
            (r.regret - (want.hindsight - want.achieved)).abs() <= 1e-9,
            || format!("instance {instance}: regret {}", r.regret),
        )?;
        check(r.best_theta_id == want.best_id, || {
            format!(
                "instance {instance}: best id {} vs {}",
                r.best_theta_id, want.best_id
            )
        })?;
        if covering_set {
            covering += 1;
            check(r.regret >= -1e-12, || {
                format!("instance {instance}: negative regret {}", r.regret)
            })?;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "100 instances ({covering} with covering structures) in {elapsed:?}"
    ))
}

/// Entropy of the masses declared in a fixture turn.
fn declared_entropy(turn: &serde_json::Value) -> f64 {
    let masses: Vec<f64> = turn["predictions"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let total: f64 = masses.iter().sum();
    -masses
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|m| (m / total) * (m / total).log2())
        .sum::<f64>()
}

fn criterion_4() -> Outcome {
    let dir = fixtures().join("jaundice");
    let cases = dedup(&load_dataset(&dir.join("cases.csv")).map_err(|e| e.to_string())?);
    let case = cases
        .iter()
        .find(|c| c.id == "jaundice-hepatitis")
        .ok_or("case missing")?;
    let a = AgentProfile::scripted("gpt4", dir.join("gpt4"));
    let b = AgentProfile::scripted("claude", dir.join("claude"));
    let outcome = run_debate_pipeline(
        case,
        &a,
        &b,
        None,
        &DebateConfig::default(),
        &AraConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let joint = outcome
        .transcript
        .final_aggregate
        .as_ref()
        .ok_or("no joint distribution")?;
    let expected = [
        ("hepatitis c", 0.35),
        ("hepatitis b", 0.30),
        ("cirrhosis", 0.20),
        ("obstructive jaundice", 0.10),
        ("acute liver failure", 0.05),
    ];
    check(joint.len() == expected.len(), || {
        format!("joint has {} labels", joint.len())
    })?;
    for (name, mass) in expected {
        let got = joint.get(name).unwrap_or(f64::NAN);
        check((got - mass).abs() <= 1e-9, || {
            format!("{name}: {got} vs {mass}")
        })?;
    }

    let load = |agent: &str| -> Vec<serde_json::Value> {
        let text =
            std::fs::read_to_string(dir.join(agent).join("jaundice-hepatitis.json")).unwrap();
        serde_json::from_str(&text).unwrap()
    };
    let (turns_a, turns_b) = (load("gpt4"), load("claude"));
    let trajectory = entropy_trajectory(&outcome.transcript);
    check(
        trajectory.len() == turns_a.len() && trajectory.len() == turns_b.len(),
        || {
            format!(
                "{} rounds for {} fixture turns",
                trajectory.len(),
                turns_a.len()
            )
        },
    )?;
    for (i, point) in trajectory.iter().enumerate() {
        let (ha, hb) = (declared_entropy(&turns_a[i]), declared_entropy(&turns_b[i]));
        check(
            (point.entropy_a - ha).abs() <= 1e-6 && (point.entropy_b - hb).abs() <= 1e-6,
            || {
                format!(
                    "round {}: ({}, {}) vs ({ha}, {hb})",
                    point.round, point.entropy_a, point.entropy_b
                )
            },
        )?;
    }
    Ok(format!(
        "joint distribution and {} entropy points match",
        trajectory.len()
    ))
}

fn criterion_5() -> Outcome {
    let truth = label("truth");
    let mut seen = BTreeSet::new();
    let mut placements = 0;
    for k in 1..=10usize {
        for position in 0..=k {
            // position == k leaves the truth out of the set
            let mut pairs: Vec<(String, f64)> =
                (0..k).map(|i| (format!("other {i}"), 0.0)).collect();
            if position < k {
                pairs[position].0 = "truth".into();
            }
            let weights: Vec<f64> = (0..k).map(|i| (k - i) as f64).collect();
            let total: f64 = weights.iter().sum();
            let set = PredictionSet::from_masses(
                pairs
                    .iter()
                    .zip(&weights)
                    .map(|((n, _), w)| (label(n), w / total)),
            )
            .map_err(|e| e.to_string())?;
            let score = score_topk(&set, &truth);
            let want = match position {
                p if p == k => 0.0,
                0 => 1.0,
                1 => 0.5,
                2 => 0.25,
                _ => 0.0,
            };
            check(score == want, || {
                format!("k={k} position={position}: {score} vs {want}")
            })?;
            seen.insert(score.to_bits());
            placements += 1;
        }
    }
    let values: BTreeSet<u64> = [1.0f64, 0.5, 0.25, 0.0]
        .iter()
        .map(|v| v.to_bits())
        .collect();
    check(seen == values, || {
        "score range differs from {1, 0.5, 0.25, 0}".into()
    })?;
    Ok(format!(
        "{placements} placements, scores exactly {{1, 0.5, 0.25, 0}}"
    ))
}

fn criterion_6() -> Outcome {
    // Flu appears three times (two are the same symptoms reordered and
    // recased), Cold twice with distinct symptoms, Measles once plus one
    // copy under a different label with identical symptoms.
    let csv = "\
Disease,Symptom_1,Symptom_2,Symptom_3
Flu, fever, cough,
Flu, Cough , FEVER,
Flu, fever, cough, chills
Cold, sneezing,,
Cold, sneezing, runny_nose,
Measles, rash, fever,
Rubella, rash, fever,
Cold, sneezing,,
";
    let records = load_dataset_from_reader(csv.as_bytes()).map_err(|e| e.to_string())?;
    let cases = dedup(&records);
    let labels: BTreeSet<&Label> = cases.iter().map(|c| &c.truth).collect();
    check(records.len() == 8, || {
        format!("{} rows loaded", records.len())
    })?;
    check(cases.len() == 6, || {
        format!("{} unique cases, expected 6", cases.len())
    })?;
    check(labels.len() == 4, || {
        format!("{} labels, expected 4", labels.len())
    })?;
    check(dedup(&cases) == cases, || "dedup is not idempotent".into())?;

    match std::env::var_os("KAGGLE_SYMPTOM_CSV") {
        Some(path) => {
            let real = dedup(&load_dataset(Path::new(&path)).map_err(|e| e.to_string())?);
            let real_labels: BTreeSet<&Label> = real.iter().map(|c| &c.truth).collect();
            check(real.len() == 304 && real_labels.len() == 40, || {
                format!(
                    "real file: {} cases / {} labels, expected 304 / 40",
                    real.len(),
                    real_labels.len()
                )
            })?;
            Ok("fixture 6 cases / 4 labels; real file 304 cases / 40 labels".into())
        }
        None => Ok(
            "fixture 6 cases / 4 labels; real-file check skipped (KAGGLE_SYMPTOM_CSV unset)".into(),
        ),
    }
}

fn score(gamma: u32, theta: u32) -> ReasonScore {
    ReasonScore {
        gamma: f64::from(gamma) / 10.0,
        theta: f64::from(theta) / 10.0,
        rationale: String::new(),
    }
}

fn random_scores(rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let n = rng.random_range(0..=6);
    (0..n)
        .map(|_| (rng.random_range(0..=10), rng.random_range(0..=10)))
        .collect()
}

fn to_scores(raw: &[(u32, u32)]) -> Vec<ReasonScore> {
    raw.iter().map(|&(g, t)| score(g, t)).collect()
}

fn weight(raw: &[(u32, u32)]) -> u32 {
    raw.iter().map(|(g, t)| g * t).sum()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    let (mut support_checks, mut rival_checks) = (0, 0);
    for trial in 0..10_000 {
        let support = random_scores(&mut rng);
        let rivals = random_scores(&mut rng);
        let g = gamma_total(&to_scores(&support), &to_scores(&rivals));
        check((0.0..=1.0).contains(&g), || {
            format!("trial {trial}: Γ = {g}")
        })?;

        let raisable = |s: &[(u32, u32)]| -> Vec<usize> {
            (0..s.len())
                .filter(|&i| s[i].0 < 10 && s[i].1 > 0)
                .collect()
        };
        let candidates = raisable(&support);
        if weight(&rivals) > 0 && !candidates.is_empty() {
            let i = candidates[rng.random_range(0..candidates.len())];
            let mut raised = support.clone();
            raised[i].0 += rng.random_range(1..=10 - raised[i].0);
            let g2 = gamma_total(&to_scores(&raised), &to_scores(&rivals));
            check(g2 > g, || {
                format!("trial {trial}: raising a support γ moved Γ {g} to {g2}")
            })?;
            support_checks += 1;
        }
        let candidates = raisable(&rivals);
        if weight(&support) > 0 && !candidates.is_empty() {
            let i = candidates[rng.random_range(0..candidates.len())];
            let mut raised = rivals.clone();
            raised[i].0 += rng.random_range(1..=10 - raised[i].0);
            let g2 = gamma_total(&to_scores(&support), &to_scores(&raised));
            check(g2 < g, || {
                format!("trial {trial}: raising a rival γ moved Γ {g} to {g2}")
            })?;
            rival_checks += 1;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "10000 score sets, {support_checks} support and {rival_checks} rival monotonicity checks, {elapsed:?}"
    ))
}

/// All pairs in sorted-id order; eligible ones ranked by gap, then ids.
fn oracle_pair(probes: &[AgentProbe], epsilon: f64) -> Option<(String, String, f64)> {
    let mut sorted: Vec<&AgentProbe> = probes.iter().collect();
    sorted.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    let mut best: Option<(f64, &AgentProbe, &AgentProbe)> = None;
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            let (p, q) = (sorted[i], sorted[j]);
            if (p.mean_quality - q.mean_quality).abs() > epsilon + 1e-12 {
                continue;
            }
            let gap = (p.mean_entropy - q.mean_entropy).abs();
            if best.is_none_or(|(g, _, _)| gap > g + 1e-12) {
                best = Some((gap, p, q));
            }
        }
    }
    best.map(|(gap, p, q)| {
        // p has the smaller id
        if q.mean_entropy > p.mean_entropy {
            (q.agent_id.clone(), p.agent_id.clone(), gap)
        } else {
            (p.agent_id.clone(), q.agent_id.clone(), gap)
        }
    })
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let start = Instant::now();
    let mut no_pair = 0;
    for trial in 0..1000 {
        let n = rng.random_range(2..=10);
        let mut ids: Vec<String> = (0..n).map(|i| format!("agent-{i:02}")).collect();
        for i in 0..n {
            let j = rng.random_range(i..n);
            ids.swap(i, j);
        }
        let probes: Vec<AgentProbe> = ids
            .into_iter()
            .map(|agent_id| AgentProbe {
                agent_id,
                // coarse grids make gap ties and boundary qualities common
                mean_entropy: f64::from(rng.random_range(0..=12u32)) / 4.0,
                mean_quality: f64::from(rng.random_range(0..=8u32)) / 8.0,
                probe_k: 5,
                cases_used: 1,
            })
            .collect();
        let epsilon = [0.0, 0.1, 0.125, 0.25][rng.random_range(0..4)];
        let got = select_pair(&probes, epsilon).ok();
        let want = oracle_pair(&probes, epsilon);
        match (&got, &want) {
            (None, None) => no_pair += 1,
            (Some(s), Some((high, low, gap))) => {
                check(
                    &s.high_entropy_agent == high && &s.low_entropy_agent == low,
                    || {
                        format!(
                            "trial {trial}: selected ({}, {}), oracle ({high}, {low})",
                            s.high_entropy_agent, s.low_entropy_agent
                        )
                    },
                )?;
                check((s.entropy_gap - gap).abs() <= 1e-12, || {
                    format!("trial {trial}: gap {} vs {gap}", s.entropy_gap)
                })?;
            }
            _ => return Err(format!("trial {trial}: selection {got:?}, oracle {want:?}")),
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "1000 trials ({no_pair} without an eligible pair) in {elapsed:?}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 aggregation worked example", criterion_1),
        ("2 mixture entropy bound", criterion_2),
        ("3 regret oracle equivalence", criterion_3),
        ("4 jaundice debate replay", criterion_4),
        ("5 top-3 scoring rule", criterion_5),
        ("6 deduplication counts", criterion_6),
        ("7 argument score properties", criterion_7),
        ("8 pair selection oracle", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL criterion {name}: panicked");
            }
        }
    }
    println!(
        "INFO criterion 9 live-model accuracy: not gated; see the live-mode section of the README"
    );
    if failed == 0 {
        println!("acceptance: all 8 gated criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 gated criteria failed");
        ExitCode::FAILURE
    }
}
