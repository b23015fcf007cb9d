//! Synthetic event sequences with a planted causal structure.
//!
//! Entities perform seeded Markov walks over a node set partitioned into
//! cause, effect, and random roles. At a cause node the walk moves to a
//! planted effect with the pair's strength, otherwise uniformly at random;
//! effect nodes leak back to their cause at a small fraction of the strength,
//! creating the forward/backward asymmetry the direction task learns.
//! Planted forward transitions draw intervals from a wide log-uniform range,
//! everything else from a narrower one.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::TransitionNetwork;
use crate::ingest::{EventRecord, SequenceDataset};
use crate::matrix::{EdgeLabel, LabeledEdgeSet};
use crate::rng::{shuffle, stream, StreamKind};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid planted-network spec: {0}")]
    InvalidSpec(String),
    #[error("cannot sample {need} `{class}` edges, only {have} available")]
    Sampling {
        class: String,
        need: usize,
        have: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalPair {
    pub cause: usize,
    pub effect: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRange {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedNetworkSpec {
    pub n_nodes: usize,
    pub n_entities: usize,
    pub mean_sequence_length: f64,
    /// Nodes 0..n_cause are causes, the next n_effect are effects, the rest
    /// have the random role.
    pub n_cause: usize,
    pub n_effect: usize,
    #[serde(default)]
    pub causal_pairs: Vec<CausalPair>,
    /// Probability that a step ignores planted structure entirely and moves
    /// background-uniform.
    #[serde(default)]
    pub random_background_rate: f64,
    /// Reverse-transition probability as a fraction of the pair strength;
    /// must stay below 1/5.
    #[serde(default = "default_leak")]
    pub reverse_leak_factor: f64,
    #[serde(default = "default_causal_interval")]
    pub causal_interval: IntervalRange,
    #[serde(default = "default_random_interval")]
    pub random_interval: IntervalRange,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_leak() -> f64 {
    1.0 / 6.0
}

fn default_causal_interval() -> IntervalRange {
    IntervalRange { lo: 1, hi: 1700 }
}

fn default_random_interval() -> IntervalRange {
    IntervalRange { lo: 10, hi: 400 }
}

impl PlantedNetworkSpec {
    pub fn node_code(&self, index: usize) -> String {
        format!("N{index:05}")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_nodes < 2 {
            return Err(SynthError::InvalidSpec("need at least 2 nodes".into()));
        }
        if self.n_cause + self.n_effect > self.n_nodes {
            return Err(SynthError::InvalidSpec(
                "cause and effect roles exceed the node count".into(),
            ));
        }
        if self.n_entities == 0 {
            return Err(SynthError::InvalidSpec("need at least 1 entity".into()));
        }
        if self.mean_sequence_length < 1.0 {
            return Err(SynthError::InvalidSpec(
                "mean_sequence_length must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.random_background_rate) {
            return Err(SynthError::InvalidSpec(
                "random_background_rate must be in [0, 1)".into(),
            ));
        }
        if !(0.0..0.2).contains(&self.reverse_leak_factor) {
            return Err(SynthError::InvalidSpec(
                "reverse_leak_factor must be in [0, 1/5)".into(),
            ));
        }
        for range in [self.causal_interval, self.random_interval] {
            if range.lo < 1 || range.hi < range.lo {
                return Err(SynthError::InvalidSpec(format!(
                    "interval range [{}, {}] is invalid",
                    range.lo, range.hi
                )));
            }
        }
        let mut out_strength = vec![0.0f64; self.n_nodes];
        let mut in_leak = vec![0.0f64; self.n_nodes];
        for pair in &self.causal_pairs {
            if pair.cause >= self.n_cause {
                return Err(SynthError::InvalidSpec(format!(
                    "pair cause {} is not a cause-role node",
                    pair.cause
                )));
            }
            if pair.effect < self.n_cause || pair.effect >= self.n_cause + self.n_effect {
                return Err(SynthError::InvalidSpec(format!(
                    "pair effect {} is not an effect-role node",
                    pair.effect
                )));
            }
            if !(pair.strength > 0.0 && pair.strength <= 1.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "strength {} out of (0, 1]",
                    pair.strength
                )));
            }
            out_strength[pair.cause] += pair.strength;
            in_leak[pair.effect] += pair.strength * self.reverse_leak_factor;
        }
        if let Some((node, &total)) = out_strength
            .iter()
            .enumerate()
            .find(|(_, &s)| s > 1.0 + 1e-12)
        {
            return Err(SynthError::InvalidSpec(format!(
                "strengths from node {node} sum to {total} > 1"
            )));
        }
        if let Some((node, &total)) = in_leak.iter().enumerate().find(|(_, &s)| s >= 1.0) {
            return Err(SynthError::InvalidSpec(format!(
                "reverse leaks into node {node} sum to {total} >= 1"
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let spec: PlantedNetworkSpec =
            toml::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec serializes")
    }
}

/// Pair cause i with effect i, strengths spread linearly over the range.
pub fn uniform_pairs(
    n_pairs: usize,
    n_cause: usize,
    strength_lo: f64,
    strength_hi: f64,
) -> Vec<CausalPair> {
    (0..n_pairs)
        .map(|i| {
            let t = if n_pairs > 1 {
                i as f64 / (n_pairs - 1) as f64
            } else {
                0.5
            };
            CausalPair {
                cause: i,
                effect: n_cause + i,
                strength: strength_lo + t * (strength_hi - strength_lo),
            }
        })
        .collect()
}

/// Planted labels per directed node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Causal,
    ReverseCausal,
    Random,
    /// Pairs the generator cannot emit (self-pairs).
    None,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    planted: BTreeMap<(String, String), EdgeLabel>,
}

impl GroundTruth {
    pub fn label(&self, source: &str, target: &str) -> PairLabel {
        if source == target {
            return PairLabel::None;
        }
        match self.planted.get(&(source.to_string(), target.to_string())) {
            Some(EdgeLabel::Causal) => PairLabel::Causal,
            Some(EdgeLabel::ReverseCausal) => PairLabel::ReverseCausal,
            _ => PairLabel::Random,
        }
    }

    /// The planted (non-random) pairs, as written to the truth CSV.
    pub fn planted(&self) -> &BTreeMap<(String, String), EdgeLabel> {
        &self.planted
    }

    pub fn from_planted(planted: BTreeMap<(String, String), EdgeLabel>) -> Self {
        GroundTruth { planted }
    }
}

#[derive(Debug, Clone, Copy)]
enum StepKind {
    PlantedForward,
    Other,
}

/// Deterministic per-entity walk generation; parallel but schedule-independent
/// (each entity has its own derived stream).
pub fn generate(spec: &PlantedNetworkSpec) -> Result<(SequenceDataset, GroundTruth), SynthError> {
    spec.validate()?;
    let n = spec.n_nodes;

    let mut pairs_from: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut pairs_to: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for pair in &spec.causal_pairs {
        pairs_from[pair.cause].push((pair.effect, pair.strength));
        pairs_to[pair.effect].push((pair.cause, pair.strength * spec.reverse_leak_factor));
    }

    let records: Vec<Vec<EventRecord>> = (0..spec.n_entities)
        .into_par_iter()
        .map(|entity| {
            let mut rng = stream(spec.rng_seed, StreamKind::EntityWalk, entity as u64);
            let length = poisson(spec.mean_sequence_length, &mut rng).max(1);
            let entity_id = format!("E{entity:07}");
            let mut out = Vec::with_capacity(length);
            let mut node = rng.gen_range(0..n);
            let mut time = 0i64;
            out.push(EventRecord {
                entity_id: entity_id.clone(),
                event_code: spec.node_code(node),
                timestamp: time,
            });
            for _ in 1..length {
                let (next, kind) = next_node(spec, &pairs_from, &pairs_to, node, &mut rng);
                let range = match kind {
                    StepKind::PlantedForward => spec.causal_interval,
                    StepKind::Other => spec.random_interval,
                };
                time += log_uniform(range, &mut rng);
                node = next;
                out.push(EventRecord {
                    entity_id: entity_id.clone(),
                    event_code: spec.node_code(node),
                    timestamp: time,
                });
            }
            out
        })
        .collect();

    let dataset =
        SequenceDataset::from_records(records.into_iter().flatten().collect::<Vec<_>>());

    let mut planted = BTreeMap::new();
    for pair in &spec.causal_pairs {
        let cause = spec.node_code(pair.cause);
        let effect = spec.node_code(pair.effect);
        planted.insert((cause.clone(), effect.clone()), EdgeLabel::Causal);
        planted.insert((effect, cause), EdgeLabel::ReverseCausal);
    }
    Ok((dataset, GroundTruth { planted }))
}

fn next_node(
    spec: &PlantedNetworkSpec,
    pairs_from: &[Vec<(usize, f64)>],
    pairs_to: &[Vec<(usize, f64)>],
    node: usize,
    rng: &mut ChaCha8Rng,
) -> (usize, StepKind) {
    let n = spec.n_nodes;
    let background = |rng: &mut ChaCha8Rng| {
        let pick = rng.gen_range(0..n - 1);
        if pick >= node {
            pick + 1
        } else {
            pick
        }
    };

    if spec.random_background_rate > 0.0 && rng.gen::<f64>() < spec.random_background_rate {
        return (background(rng), StepKind::Other);
    }
    let r: f64 = rng.gen();
    let mut cumulative = 0.0;
    for &(effect, strength) in &pairs_from[node] {
        cumulative += strength;
        if r < cumulative {
            return (effect, StepKind::PlantedForward);
        }
    }
    for &(cause, leak) in &pairs_to[node] {
        cumulative += leak;
        if r < cumulative {
            return (cause, StepKind::Other);
        }
    }
    (background(rng), StepKind::Other)
}

/// Knuth's method with halving for large means.
fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    if mean > 30.0 {
        return poisson(mean / 2.0, rng) + poisson(mean / 2.0, rng);
    }
    let limit = (-mean).exp();
    let mut product: f64 = rng.gen();
    let mut count = 0usize;
    while product > limit {
        product *= rng.gen::<f64>();
        count += 1;
    }
    count
}

/// Integer draw, log-uniform over [lo, hi].
fn log_uniform(range: IntervalRange, rng: &mut ChaCha8Rng) -> i64 {
    let lo = range.lo as f64;
    let hi = (range.hi + 1) as f64;
    let value = (rng.gen_range(lo.ln()..hi.ln())).exp().floor() as i64;
    value.clamp(range.lo, range.hi)
}

/// Assign every network edge its planted label; unplanted pairs are random.
pub fn label_edges(
    truth: &GroundTruth,
    net: &TransitionNetwork,
) -> BTreeMap<(String, String), EdgeLabel> {
    net.edges
        .keys()
        .map(|(s, t)| {
            let label = match truth.label(s, t) {
                PairLabel::Causal => EdgeLabel::Causal,
                PairLabel::ReverseCausal => EdgeLabel::ReverseCausal,
                PairLabel::Random | PairLabel::None => EdgeLabel::Random,
            };
            ((s.clone(), t.clone()), label)
        })
        .collect()
}

/// Experiment set construction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetMode {
    /// Balanced causal-vs-random sample.
    RandomVsCausal { n_causal: usize, n_random: usize },
    /// Planted pairs observed in both directions; an edge and its reverse
    /// always land in the same split.
    Direction { n_pairs: usize },
    /// Causal and reverse edges as positives against a random background.
    Mixed {
        n_causal: usize,
        n_reverse: usize,
        n_random: usize,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct SplitOptions {
    pub train_ratio: f64,
    pub seed: u64,
    /// Shrink requested class sizes to what is available instead of failing.
    /// Balanced modes shrink all classes together to stay balanced.
    pub clamp: bool,
}

/// Sample class rows from a labeled set and split into train/test.
pub fn make_experiment_sets(
    labeled: &LabeledEdgeSet,
    mode: SetMode,
    opts: SplitOptions,
) -> Result<(LabeledEdgeSet, LabeledEdgeSet), SynthError> {
    if !(0.0..1.0).contains(&opts.train_ratio) {
        return Err(SynthError::InvalidSpec(format!(
            "train_ratio {} out of (0, 1)",
            opts.train_ratio
        )));
    }
    let class_rows = |label: EdgeLabel| -> Vec<usize> {
        (0..labeled.labels.len())
            .filter(|&i| labeled.labels[i] == label)
            .collect()
    };
    let take = |label: EdgeLabel, need: usize, counter: u64| -> Result<Vec<usize>, SynthError> {
        let mut rows = class_rows(label);
        if rows.len() < need {
            return Err(SynthError::Sampling {
                class: label.as_str().to_string(),
                need,
                have: rows.len(),
            });
        }
        let mut rng = stream(opts.seed, StreamKind::Sampling, counter);
        shuffle(&mut rows, &mut rng);
        rows.truncate(need);
        rows.sort_unstable();
        Ok(rows)
    };
    let split =
        |rows: &[usize], counter: u64| -> (Vec<usize>, Vec<usize>) {
            let mut shuffled = rows.to_vec();
            let mut rng = stream(opts.seed, StreamKind::Split, counter);
            shuffle(&mut shuffled, &mut rng);
            let n_train = (shuffled.len() as f64 * opts.train_ratio).floor() as usize;
            (
                shuffled[..n_train].to_vec(),
                shuffled[n_train..].to_vec(),
            )
        };

    match mode {
        SetMode::RandomVsCausal { n_causal, n_random } => {
            let (n_causal, n_random) = if opts.clamp {
                let available = class_rows(EdgeLabel::Causal)
                    .len()
                    .min(class_rows(EdgeLabel::Random).len());
                (n_causal.min(available), n_random.min(available))
            } else {
                (n_causal, n_random)
            };
            let causal = take(EdgeLabel::Causal, n_causal, 0)?;
            let random = take(EdgeLabel::Random, n_random, 1)?;
            let (mut train, mut test) = split(&causal, 0);
            let (train_r, test_r) = split(&random, 1);
            train.extend(train_r);
            test.extend(test_r);
            train.sort_unstable();
            test.sort_unstable();
            Ok((labeled.select(&train), labeled.select(&test)))
        }
        SetMode::Direction { n_pairs } => {
            let index: BTreeMap<&(String, String), usize> = labeled
                .matrix
                .keys
                .iter()
                .enumerate()
                .map(|(i, k)| (k, i))
                .collect();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (i, key) in labeled.matrix.keys.iter().enumerate() {
                if labeled.labels[i] != EdgeLabel::Causal {
                    continue;
                }
                let reverse = (key.1.clone(), key.0.clone());
                if let Some(&j) = index.get(&reverse) {
                    if labeled.labels[j] == EdgeLabel::ReverseCausal {
                        pairs.push((i, j));
                    }
                }
            }
            let need = if opts.clamp {
                n_pairs.min(pairs.len())
            } else {
                n_pairs
            };
            if pairs.len() < need {
                return Err(SynthError::Sampling {
                    class: "paired causal/reverse_causal".to_string(),
                    need,
                    have: pairs.len(),
                });
            }
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            let mut rng = stream(opts.seed, StreamKind::Sampling, 2);
            shuffle(&mut order, &mut rng);
            order.truncate(need);
            order.sort_unstable();
            let chosen: Vec<(usize, usize)> = order.iter().map(|&i| pairs[i]).collect();
            let pair_ids: Vec<usize> = (0..chosen.len()).collect();
            let (train_pairs, test_pairs) = split(&pair_ids, 2);
            let expand = |ids: &[usize]| -> Vec<usize> {
                let mut rows: Vec<usize> = ids
                    .iter()
                    .flat_map(|&p| [chosen[p].0, chosen[p].1])
                    .collect();
                rows.sort_unstable();
                rows
            };
            Ok((
                labeled.select(&expand(&train_pairs)),
                labeled.select(&expand(&test_pairs)),
            ))
        }
        SetMode::Mixed {
            n_causal,
            n_reverse,
            n_random,
        } => {
            let clamp_to = |label: EdgeLabel, need: usize| {
                if opts.clamp {
                    need.min(class_rows(label).len())
                } else {
                    need
                }
            };
            let causal = take(EdgeLabel::Causal, clamp_to(EdgeLabel::Causal, n_causal), 3)?;
            let reverse = take(
                EdgeLabel::ReverseCausal,
                clamp_to(EdgeLabel::ReverseCausal, n_reverse),
                4,
            )?;
            let random = take(EdgeLabel::Random, clamp_to(EdgeLabel::Random, n_random), 5)?;
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (counter, rows) in [(3u64, causal), (4, reverse), (5, random)] {
                let (tr, te) = split(&rows, counter);
                train.extend(tr);
                test.extend(te);
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok((labeled.select(&train), labeled.select(&test)))
        }
    }
}
