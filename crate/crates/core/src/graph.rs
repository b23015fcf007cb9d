//! The weighted directed transition network.
//!
//! Transitions aggregate into edges carrying a count and the multiset of
//! observed intervals; node frequencies come from record occurrence counts in
//! the source dataset. The built network is immutable and shared read-only by
//! featurization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{SequenceDataset, Transition};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("transition endpoint `{0}` does not appear in the record dataset")]
    UnknownCode(String),
    #[error("node `{0}` is not in the network")]
    UnknownNode(String),
    #[error("edge {0}->{1} is not in the network")]
    UnknownEdge(String, String),
    #[error("unsupported network document version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed network document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    pub code: String,
    /// Occurrences of the code in the record dataset (not in/out totals).
    pub freq: u64,
    pub out_total: u64,
    pub in_total: u64,
    pub out_degree: u32,
    pub in_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub count: u64,
    /// All observed intervals for this edge, sorted ascending.
    pub intervals: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionNetwork {
    pub nodes: BTreeMap<String, NodeStats>,
    pub edges: BTreeMap<(String, String), EdgeStats>,
    pub total_transitions: u64,
    predecessors: BTreeMap<String, Vec<String>>,
}

impl TransitionNetwork {
    /// Aggregate transitions into the network; node frequencies are taken
    /// from record occurrence counts in `freq_source`.
    pub fn build(
        transitions: &[Transition],
        freq_source: &SequenceDataset,
    ) -> Result<Self, GraphError> {
        Self::build_from_frequencies(transitions, freq_source.code_frequencies())
    }

    /// Aggregate transitions with an explicit code-frequency table (the
    /// cached form written by the ingest stage).
    pub fn build_from_frequencies(
        transitions: &[Transition],
        freqs: BTreeMap<String, u64>,
    ) -> Result<Self, GraphError> {
        let nodes: BTreeMap<String, NodeStats> = freqs
            .iter()
            .map(|(code, &freq)| {
                (
                    code.clone(),
                    NodeStats {
                        code: code.clone(),
                        freq,
                        out_total: 0,
                        in_total: 0,
                        out_degree: 0,
                        in_degree: 0,
                    },
                )
            })
            .collect();

        let mut edges: BTreeMap<(String, String), EdgeStats> = BTreeMap::new();
        for t in transitions {
            if !nodes.contains_key(&t.source) {
                return Err(GraphError::UnknownCode(t.source.clone()));
            }
            if !nodes.contains_key(&t.target) {
                return Err(GraphError::UnknownCode(t.target.clone()));
            }
            let edge = edges
                .entry((t.source.clone(), t.target.clone()))
                .or_insert_with(|| EdgeStats {
                    count: 0,
                    intervals: Vec::new(),
                });
            edge.count += 1;
            edge.intervals.push(t.interval);
        }
        for edge in edges.values_mut() {
            edge.intervals.sort_unstable();
        }

        let mut net = TransitionNetwork {
            nodes,
            edges,
            total_transitions: transitions.len() as u64,
            predecessors: BTreeMap::new(),
        };
        net.rebuild_derived();
        Ok(net)
    }

    fn rebuild_derived(&mut self) {
        for node in self.nodes.values_mut() {
            node.out_total = 0;
            node.in_total = 0;
            node.out_degree = 0;
            node.in_degree = 0;
        }
        self.predecessors.clear();
        for ((src, dst), edge) in &self.edges {
            {
                let s = self.nodes.get_mut(src).expect("edge source known");
                s.out_total += edge.count;
                s.out_degree += 1;
            }
            {
                let t = self.nodes.get_mut(dst).expect("edge target known");
                t.in_total += edge.count;
                t.in_degree += 1;
            }
            self.predecessors
                .entry(dst.clone())
                .or_default()
                .push(src.clone());
        }
        // BTreeMap edge iteration is sorted by (src, dst), so each
        // predecessor list arrives already sorted by source code.
    }

    pub fn node(&self, code: &str) -> Result<&NodeStats, GraphError> {
        self.nodes
            .get(code)
            .ok_or_else(|| GraphError::UnknownNode(code.to_string()))
    }

    pub fn edge(&self, source: &str, target: &str) -> Result<&EdgeStats, GraphError> {
        self.edges
            .get(&(source.to_string(), target.to_string()))
            .ok_or_else(|| GraphError::UnknownEdge(source.to_string(), target.to_string()))
    }

    pub fn edge_count(&self, source: &str, target: &str) -> u64 {
        self.edges
            .get(&(source.to_string(), target.to_string()))
            .map_or(0, |e| e.count)
    }

    /// Count on the reverse edge (target, source); 0 when absent.
    pub fn reverse_count(&self, source: &str, target: &str) -> u64 {
        self.edge_count(target, source)
    }

    /// Outgoing adjacency sorted by target code.
    pub fn successors(&self, code: &str) -> Result<Vec<(&str, &EdgeStats)>, GraphError> {
        self.node(code)?;
        Ok(self
            .edges
            .range((code.to_string(), String::new())..)
            .take_while(|((src, _), _)| src == code)
            .map(|((_, dst), edge)| (dst.as_str(), edge))
            .collect())
    }

    /// Incoming adjacency sorted by source code.
    pub fn predecessors(&self, code: &str) -> Result<Vec<(&str, &EdgeStats)>, GraphError> {
        self.node(code)?;
        let Some(sources) = self.predecessors.get(code) else {
            return Ok(Vec::new());
        };
        Ok(sources
            .iter()
            .map(|src| {
                let edge = &self.edges[&(src.clone(), code.to_string())];
                (src.as_str(), edge)
            })
            .collect())
    }

    pub fn sum_of_frequencies(&self) -> u64 {
        self.nodes.values().map(|n| n.freq).sum()
    }

    /// Edge keys sorted by (source, target).
    pub fn edge_keys(&self) -> Vec<(String, String)> {
        self.edges.keys().cloned().collect()
    }

    // --- versioned JSON document ---

    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            version: NETWORK_DOC_VERSION,
            total_transitions: self.total_transitions,
            nodes: self.nodes.values().cloned().collect(),
            edges: self
                .edges
                .iter()
                .map(|((src, dst), edge)| EdgeDoc {
                    source: src.clone(),
                    target: dst.clone(),
                    count: edge.count,
                    intervals: edge.intervals.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: NetworkDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        if doc.version != NETWORK_DOC_VERSION {
            return Err(GraphError::UnsupportedVersion(doc.version));
        }
        let nodes: BTreeMap<String, NodeStats> = doc
            .nodes
            .into_iter()
            .map(|n| (n.code.clone(), n))
            .collect();
        let mut edges = BTreeMap::new();
        let mut total = 0u64;
        for e in doc.edges {
            if !nodes.contains_key(&e.source) {
                return Err(GraphError::Malformed(format!("edge source {}", e.source)));
            }
            if !nodes.contains_key(&e.target) {
                return Err(GraphError::Malformed(format!("edge target {}", e.target)));
            }
            if e.count as usize != e.intervals.len() {
                return Err(GraphError::Malformed(format!(
                    "edge {}->{} count/interval mismatch",
                    e.source, e.target
                )));
            }
            total += e.count;
            edges.insert(
                (e.source, e.target),
                EdgeStats {
                    count: e.count,
                    intervals: e.intervals,
                },
            );
        }
        if total != doc.total_transitions {
            return Err(GraphError::Malformed(
                "total_transitions does not match edge counts".into(),
            ));
        }
        let mut net = TransitionNetwork {
            nodes,
            edges,
            total_transitions: total,
            predecessors: BTreeMap::new(),
        };
        net.rebuild_derived();
        Ok(net)
    }
}

const NETWORK_DOC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    version: u32,
    total_transitions: u64,
    nodes: Vec<NodeStats>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    source: String,
    target: String,
    count: u64,
    intervals: Vec<i64>,
}
