//! Topic-weighted detection cost evaluation.
//!
//! For each topic the first on-topic document is the detection target and
//! every later on-topic document is a non-target. A document "fires" when its
//! novelty is at or above the decision threshold. Per threshold:
//!
//! * `P_miss` is the fraction of topics whose target did not fire,
//! * `P_fa` is the mean, over topics with at least one non-target, of the
//!   fraction of that topic's non-targets that fired,
//! * `cost = (C_miss·P_miss·P_target + C_fa·P_fa·(1 − P_target)) / min(C_miss·P_target, C_fa·(1 − P_target))`.
//!
//! `c_min` is the minimum cost over every threshold that changes a decision.
//! Documents outside the ground truth are never scored.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::detectors::NoveltyRecord;
use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConstants {
    pub c_miss: f64,
    pub c_fa: f64,
    pub p_target: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants {
            c_miss: 1.0,
            c_fa: 0.1,
            p_target: 0.02,
        }
    }
}

impl CostConstants {
    pub fn normalizer(&self) -> f64 {
        (self.c_miss * self.p_target).min(self.c_fa * (1.0 - self.p_target))
    }

    /// Normalized detection cost.
    pub fn cost(&self, p_miss: f64, p_fa: f64) -> f64 {
        (self.c_miss * p_miss * self.p_target + self.c_fa * p_fa * (1.0 - self.p_target))
            / self.normalizer()
    }
}

/// On-topic positions per topic, each list in stream order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    topics: BTreeMap<String, Vec<u64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthLine {
    topic: String,
    positions: Vec<u64>,
}

impl GroundTruth {
    pub fn new(topics: BTreeMap<String, Vec<u64>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (topic, positions) in &topics {
            if positions.is_empty() {
                return Err(Error::InvalidTruth(format!(
                    "topic `{topic}` has no positions"
                )));
            }
            if positions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTruth(format!(
                    "positions of topic `{topic}` are not strictly increasing"
                )));
            }
            for p in positions {
                if !seen.insert(*p) {
                    return Err(Error::InvalidTruth(format!(
                        "position {p} belongs to more than one topic"
                    )));
                }
            }
        }
        Ok(GroundTruth { topics })
    }

    /// Collect topic labels carried by the documents themselves.
    pub fn from_documents(docs: &[Document]) -> Self {
        let mut topics: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for d in docs {
            if let Some(t) = &d.topic {
                topics.entry(t.clone()).or_default().push(d.position);
            }
        }
        for v in topics.values_mut() {
            v.sort_unstable();
        }
        GroundTruth { topics }
    }

    /// One JSON object per line: `{"topic": ..., "positions": [...]}`.
    pub fn read_jsonl<R: Read>(input: R) -> Result<Self> {
        let mut topics = BTreeMap::new();
        for (idx, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TruthLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if topics.insert(rec.topic.clone(), rec.positions).is_some() {
                return Err(Error::InvalidTruth(format!(
                    "topic `{}` listed twice",
                    rec.topic
                )));
            }
        }
        Self::new(topics)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (topic, positions) in &self.topics {
            serde_json::to_writer(
                &mut out,
                &TruthLine {
                    topic: topic.clone(),
                    positions: positions.clone(),
                },
            )?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn topics(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.topics.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn target(&self, topic: &str) -> Option<u64> {
        self.topics.get(topic).map(|v| v[0])
    }

    pub fn positions(&self, topic: &str) -> Option<&[u64]> {
        self.topics.get(topic).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub p_miss: f64,
    pub p_fa: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOutcome {
    /// 1 if the target did not fire at the optimal threshold.
    pub miss: u8,
    pub fa_count: usize,
    pub non_targets: usize,
    /// This topic's own normalized cost at the optimal threshold.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCostReport {
    /// Ascending by threshold.
    pub sweep: Vec<SweepPoint>,
    pub c_min: f64,
    pub argmin_threshold: f64,
    pub p_miss: f64,
    pub p_fa: f64,
    pub per_topic: BTreeMap<String, TopicOutcome>,
    pub constants: CostConstants,
}

impl DetectionCostReport {
    /// `(p_fa, p_miss)` pairs of the sweep.
    pub fn det_curve(&self) -> Vec<(f64, f64)> {
        self.sweep.iter().map(|p| (p.p_fa, p.p_miss)).collect()
    }
}

struct Scored {
    novelty: f64,
    topic: usize,
    target: bool,
}

struct TopicState {
    target_fired: bool,
    fired: usize,
    non_targets: usize,
}

fn rates(states: &[TopicState]) -> (f64, f64) {
    let misses = states.iter().filter(|s| !s.target_fired).count();
    let p_miss = misses as f64 / states.len() as f64;
    let mut fa_sum = 0.0;
    let mut fa_topics = 0usize;
    for s in states {
        if s.non_targets > 0 {
            fa_sum += s.fired as f64 / s.non_targets as f64;
            fa_topics += 1;
        }
    }
    let p_fa = if fa_topics == 0 {
        0.0
    } else {
        fa_sum / fa_topics as f64
    };
    (p_miss, p_fa)
}

/// Evaluate one run against the ground truth.
pub fn score_run(
    records: &[NoveltyRecord],
    truth: &GroundTruth,
    constants: CostConstants,
) -> Result<DetectionCostReport> {
    if truth.is_empty() {
        return Err(Error::InvalidTruth("empty ground truth".into()));
    }
    let by_position: HashMap<u64, f64> = records.iter().map(|r| (r.position, r.novelty)).collect();

    let names: Vec<&str> = truth.topics.keys().map(String::as_str).collect();
    let mut scored = Vec::new();
    let mut states = Vec::with_capacity(names.len());
    for (t, name) in names.iter().enumerate() {
        let positions = &truth.topics[*name];
        for (k, p) in positions.iter().enumerate() {
            let novelty = *by_position.get(p).ok_or_else(|| {
                Error::InvalidTruth(format!("position {p} of topic `{name}` has no record"))
            })?;
            scored.push(Scored {
                novelty,
                topic: t,
                target: k == 0,
            });
        }
        states.push(TopicState {
            target_fired: false,
            fired: 0,
            non_targets: positions.len() - 1,
        });
    }
    scored.sort_by(|a, b| b.novelty.total_cmp(&a.novelty));

    // Highest threshold first: nothing fires.
    let sentinel = scored[0].novelty.next_up();
    let mut sweep = Vec::new();
    let (p_miss, p_fa) = rates(&states);
    sweep.push(SweepPoint {
        threshold: sentinel,
        p_miss,
        p_fa,
        cost: constants.cost(p_miss, p_fa),
    });
    let mut k = 0;
    while k < scored.len() {
        let threshold = scored[k].novelty;
        while k < scored.len() && scored[k].novelty == threshold {
            let s = &scored[k];
            let state = &mut states[s.topic];
            if s.target {
                state.target_fired = true;
            } else {
                state.fired += 1;
            }
            k += 1;
        }
        let (p_miss, p_fa) = rates(&states);
        sweep.push(SweepPoint {
            threshold,
            p_miss,
            p_fa,
            cost: constants.cost(p_miss, p_fa),
        });
    }
    sweep.reverse();

    let best = sweep
        .iter()
        .copied()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("sweep always holds the sentinel");

    let norm = constants.normalizer();
    let mut per_topic = BTreeMap::new();
    for name in &names {
        let positions = &truth.topics[*name];
        let fires = |p: &u64| by_position[p] >= best.threshold;
        let miss = u8::from(!fires(&positions[0]));
        let fa_count = positions[1..].iter().filter(|p| fires(p)).count();
        let non_targets = positions.len() - 1;
        let fa_rate = if non_targets == 0 {
            0.0
        } else {
            fa_count as f64 / non_targets as f64
        };
        let contribution = (constants.c_miss * miss as f64 * constants.p_target
            + constants.c_fa * fa_rate * (1.0 - constants.p_target))
            / norm;
        per_topic.insert(
            name.to_string(),
            TopicOutcome {
                miss,
                fa_count,
                non_targets,
                contribution,
            },
        );
    }

    Ok(DetectionCostReport {
        c_min: best.cost,
        argmin_threshold: best.threshold,
        p_miss: best.p_miss,
        p_fa: best.p_fa,
        sweep,
        per_topic,
        constants,
    })
}

/// Drop every topic's current target so its first follow-up becomes the new
/// target. Topics with a single remaining position cannot be skipped and are
/// dropped with a warning.
pub fn skip_round(truth: &GroundTruth) -> GroundTruth {
    let mut topics = BTreeMap::new();
    for (topic, positions) in &truth.topics {
        if positions.len() < 2 {
            warn!("skip evaluation: topic `{topic}` has no follow-up left, dropping it");
            continue;
        }
        topics.insert(topic.clone(), positions[1..].to_vec());
    }
    GroundTruth { topics }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEvaluation {
    /// Round 0 is the original truth.
    pub rounds: Vec<DetectionCostReport>,
    pub mean_c_min: f64,
}

/// Evaluate rounds `0..=rounds` of skip evaluation. Stops early once every
/// topic is exhausted.
pub fn skip_evaluate(
    records: &[NoveltyRecord],
    truth: &GroundTruth,
    rounds: usize,
    constants: CostConstants,
    exec: Exec,
) -> Result<SkipEvaluation> {
    if truth.is_empty() {
        return Err(Error::InvalidTruth("empty ground truth".into()));
    }
    let mut truths = vec![truth.clone()];
    for r in 1..=rounds {
        let next = skip_round(&truths[r - 1]);
        if next.is_empty() {
            warn!("skip evaluation exhausted after {} round(s)", r - 1);
            break;
        }
        truths.push(next);
    }
    let reports = exec
        .map(&truths, |t| score_run(records, t, constants))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mean_c_min = reports.iter().map(|r| r.c_min).sum::<f64>() / reports.len() as f64;
    Ok(SkipEvaluation {
        rounds: reports,
        mean_c_min,
    })
}

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

const CHUNK: usize = 1_000;

/// Two-sided paired sign-flip randomization test on `a[i] − b[i]`.
///
/// Uses exact enumeration when `2^n ≤ permutations`; otherwise draws
/// `permutations` random sign vectors from a seeded generator and reports
/// `(hits + 1) / (permutations + 1)`.
pub fn paired_significance(
    a: &[f64],
    b: &[f64],
    permutations: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidConfig(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewPairs(n));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = diffs.iter().sum::<f64>().abs();
    let slack = 1e-12 * diffs.iter().map(|d| d.abs()).sum::<f64>();
    let extreme = |flipped: f64| flipped.abs() >= observed - slack;

    if n < usize::BITS as usize && (1usize << n) <= permutations.max(1) {
        let total = 1usize << n;
        let masks: Vec<usize> = (0..total).collect();
        let hits = exec
            .map(&masks, |&mask| {
                let s: f64 = diffs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
                    .sum();
                usize::from(extreme(s))
            })
            .into_iter()
            .sum::<usize>();
        return Ok(hits as f64 / total as f64);
    }

    let chunks: Vec<usize> = (0..permutations.div_ceil(CHUNK)).collect();
    let hits: usize = exec
        .map(&chunks, |&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(permutations - c * CHUNK);
            (0..count)
                .filter(|_| {
                    let s: f64 = diffs
                        .iter()
                        .map(|d| if rng.gen::<bool>() { -d } else { *d })
                        .sum();
                    extreme(s)
                })
                .count()
        })
        .into_iter()
        .sum();
    Ok((hits + 1) as f64 / (permutations + 1) as f64)
}

/// Pair two reports on identical truth by topic and test their per-topic
/// cost contributions.
pub fn compare_reports(
    a: &DetectionCostReport,
    b: &DetectionCostReport,
    permutations: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    if a.per_topic.keys().ne(b.per_topic.keys()) {
        return Err(Error::InvalidTruth(
            "reports were scored on different topics".into(),
        ));
    }
    let xs: Vec<f64> = a.per_topic.values().map(|t| t.contribution).collect();
    let ys: Vec<f64> = b.per_topic.values().map(|t| t.contribution).collect();
    paired_significance(&xs, &ys, permutations, seed, exec)
}

/// `round,c_min,threshold,p_miss,p_fa`
pub fn write_summary_csv<W: Write>(mut out: W, eval: &SkipEvaluation) -> Result<()> {
    writeln!(out, "round,c_min,threshold,p_miss,p_fa")?;
    for (r, rep) in eval.rounds.iter().enumerate() {
        writeln!(
            out,
            "{r},{},{},{},{}",
            rep.c_min, rep.argmin_threshold, rep.p_miss, rep.p_fa
        )?;
    }
    Ok(())
}

/// `p_fa,p_miss`
pub fn write_det_csv<W: Write>(mut out: W, report: &DetectionCostReport) -> Result<()> {
    writeln!(out, "p_fa,p_miss")?;
    for (fa, miss) in report.det_curve() {
        writeln!(out, "{fa},{miss}")?;
    }
    Ok(())
}
