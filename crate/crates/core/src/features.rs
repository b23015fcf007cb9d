//! The per-edge feature hierarchy.
//!
//! Level 1: confidence (count / source out-total) and contribution
//! (count / target in-total) for the edge and its reverse. Level 2:
//! normalizations against endpoint prevalence, in both the literal product
//! form and the lift form. Level 3: engineered derivatives (resistance,
//! output pressure, asymmetries).
//!
//! Around each node, four distribution zones describe its transition
//! composition: out-confidences, out-contributions, in-confidences, and
//! in-contributions. Every zone is summarized by the full statistic set of
//! [`DistributionSummary`]; an edge sees eight zones, four per endpoint
//! (`.x` source, `.y` target), plus pressure summaries of its endpoints'
//! in/out edge sets.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{GraphError, TransitionNetwork};
use crate::matrix::FeatureMatrix;
use crate::stats::{median_mad, zscore, DistributionSummary};

/// Bumped whenever the column list changes.
pub const FEATURE_SCHEMA_VERSION: &str = "cf-1";

/// The four per-node distribution zones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    /// Zone 1: confidences of the node's outgoing edges.
    OutConf,
    /// Zone 2: contributions of the node's outgoing edges.
    OutContrib,
    /// Zone 3: confidences of the node's incoming edges.
    InConf,
    /// Zone 4: contributions of the node's incoming edges.
    InContrib,
}

impl Zone {
    pub fn id(&self) -> u8 {
        match self {
            Zone::OutConf => 1,
            Zone::OutContrib => 2,
            Zone::InConf => 3,
            Zone::InContrib => 4,
        }
    }
}

/// Parameterization of a zone's edge set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// The zone's own probability (confidence or contribution).
    Raw,
    /// Probability adjusted by endpoint prevalence (product form).
    Normalized,
    /// Output-pressure values of the zone's edges.
    Pressure,
}

/// Level 1-3 parameters of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeParams {
    pub conf: f64,
    pub contrib: f64,
    pub conf_rev: f64,
    pub contrib_rev: f64,
    pub nconf: f64,
    pub nconf_lift: f64,
    pub ncontrib: f64,
    pub ncontrib_lift: f64,
    pub nconf_rev: f64,
    pub nconf_rev_lift: f64,
    pub ncontrib_rev: f64,
    pub ncontrib_rev_lift: f64,
    pub resistance: f64,
    pub pressure: f64,
    pub asym_conf: f64,
    pub asym_contrib: f64,
}

/// One zone's summary: full statistics of the raw values plus the MAD of the
/// normalized values (the NMAD feature).
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneSummary {
    pub base: DistributionSummary,
    pub nmad: Option<f64>,
}

/// All zone summaries of one node, plus its raw zone samples for z-scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBehavior {
    pub out_conf: ZoneSummary,
    pub out_contrib: ZoneSummary,
    pub in_conf: ZoneSummary,
    pub in_contrib: ZoneSummary,
    pub pressure_out: DistributionSummary,
    pub pressure_in: DistributionSummary,
    out_conf_sample: Vec<f64>,
    in_contrib_sample: Vec<f64>,
}

pub fn edge_params(
    net: &TransitionNetwork,
    source: &str,
    target: &str,
) -> Result<EdgeParams, GraphError> {
    let edge = net.edge(source, target)?;
    let src = net.node(source)?;
    let dst = net.node(target)?;
    let total_freq = net.sum_of_frequencies() as f64;
    let fi = src.freq as f64;
    let fj = dst.freq as f64;
    let count = edge.count as f64;

    let conf = count / src.out_total as f64;
    let contrib = count / dst.in_total as f64;

    let rev = net.reverse_count(source, target);
    let (conf_rev, contrib_rev) = if rev > 0 {
        (
            rev as f64 / dst.out_total as f64,
            rev as f64 / src.in_total as f64,
        )
    } else {
        (0.0, 0.0)
    };

    let pi = fi / total_freq;
    let pj = fj / total_freq;

    Ok(EdgeParams {
        conf,
        contrib,
        conf_rev,
        contrib_rev,
        nconf: conf * pj,
        nconf_lift: conf / pj,
        ncontrib: contrib * pi,
        ncontrib_lift: contrib / pi,
        nconf_rev: conf_rev * pi,
        nconf_rev_lift: conf_rev / pi,
        ncontrib_rev: contrib_rev * pj,
        ncontrib_rev_lift: contrib_rev / pj,
        resistance: (fi - fj).abs() / count,
        pressure: (fi - fj) * count / fi,
        asym_conf: conf - conf_rev,
        asym_contrib: contrib - contrib_rev,
    })
}

fn pressure_of(net: &TransitionNetwork, source: &str, target: &str, count: u64) -> f64 {
    let fi = net.nodes[source].freq as f64;
    let fj = net.nodes[target].freq as f64;
    (fi - fj) * count as f64 / fi
}

/// Values of one zone of one node under the chosen parameterization.
/// Nodes without the relevant adjacency yield an empty sample.
pub fn zone_values(
    net: &TransitionNetwork,
    node: &str,
    zone: Zone,
    family: Family,
) -> Result<Vec<f64>, GraphError> {
    let stats = net.node(node)?;
    let total_freq = net.sum_of_frequencies() as f64;
    let out_total = stats.out_total as f64;
    let in_total = stats.in_total as f64;
    let freq = stats.freq as f64;

    let values = match zone {
        Zone::OutConf | Zone::OutContrib => {
            let succ = net.successors(node)?;
            succ.iter()
                .map(|(k, e)| match (zone, family) {
                    (Zone::OutConf, Family::Raw) => e.count as f64 / out_total,
                    (Zone::OutConf, Family::Normalized) => {
                        (e.count as f64 / out_total) * (net.nodes[*k].freq as f64 / total_freq)
                    }
                    (Zone::OutContrib, Family::Raw) => {
                        e.count as f64 / net.nodes[*k].in_total as f64
                    }
                    (Zone::OutContrib, Family::Normalized) => {
                        (e.count as f64 / net.nodes[*k].in_total as f64) * (freq / total_freq)
                    }
                    (_, Family::Pressure) => pressure_of(net, node, k, e.count),
                    _ => unreachable!(),
                })
                .collect()
        }
        Zone::InConf | Zone::InContrib => {
            let pred = net.predecessors(node)?;
            pred.iter()
                .map(|(k, e)| match (zone, family) {
                    (Zone::InConf, Family::Raw) => {
                        e.count as f64 / net.nodes[*k].out_total as f64
                    }
                    (Zone::InConf, Family::Normalized) => {
                        (e.count as f64 / net.nodes[*k].out_total as f64) * (freq / total_freq)
                    }
                    (Zone::InContrib, Family::Raw) => e.count as f64 / in_total,
                    (Zone::InContrib, Family::Normalized) => {
                        (e.count as f64 / in_total) * (net.nodes[*k].freq as f64 / total_freq)
                    }
                    (_, Family::Pressure) => pressure_of(net, k, node, e.count),
                    _ => unreachable!(),
                })
                .collect()
        }
    };
    Ok(values)
}

fn zone_summary(
    net: &TransitionNetwork,
    node: &str,
    zone: Zone,
) -> Result<(ZoneSummary, Vec<f64>), GraphError> {
    let raw = zone_values(net, node, zone, Family::Raw)?;
    let normalized = zone_values(net, node, zone, Family::Normalized)?;
    let summary = ZoneSummary {
        base: DistributionSummary::from_sample(&raw),
        nmad: median_mad(&normalized).1,
    };
    Ok((summary, raw))
}

pub fn node_behavior(net: &TransitionNetwork, node: &str) -> Result<NodeBehavior, GraphError> {
    let (out_conf, out_conf_sample) = zone_summary(net, node, Zone::OutConf)?;
    let (out_contrib, _) = zone_summary(net, node, Zone::OutContrib)?;
    let (in_conf, _) = zone_summary(net, node, Zone::InConf)?;
    let (in_contrib, in_contrib_sample) = zone_summary(net, node, Zone::InContrib)?;
    let pressure_out = DistributionSummary::from_sample(&zone_values(
        net,
        node,
        Zone::OutConf,
        Family::Pressure,
    )?);
    let pressure_in = DistributionSummary::from_sample(&zone_values(
        net,
        node,
        Zone::InConf,
        Family::Pressure,
    )?);
    Ok(NodeBehavior {
        out_conf,
        out_contrib,
        in_conf,
        in_contrib,
        pressure_out,
        pressure_in,
        out_conf_sample,
        in_contrib_sample,
    })
}

// --- schema ---

const EDGE_LEVEL_COLUMNS: [&str; 21] = [
    "conf",
    "contrib",
    "conf_rev",
    "contrib_rev",
    "nconf",
    "nconf_lift",
    "ncontrib",
    "ncontrib_lift",
    "nconf_rev",
    "nconf_rev_lift",
    "ncontrib_rev",
    "ncontrib_rev_lift",
    "resistance",
    "pressure",
    "asym_conf",
    "asym_contrib",
    "tz",
    "intvl_median",
    "count",
    "freq_x",
    "freq_y",
];

const ZONE_STATS: [&str; 13] = [
    "Mean", "SD", "Skew", "Kurt", "Median", "MAD", "NMAD", "L1", "L2", "L3", "L4", "Min", "Max",
];

const PRESSURE_STATS: [&str; 12] = [
    "Mean", "SD", "Skew", "Kurt", "Median", "MAD", "L1", "L2", "L3", "L4", "Min", "Max",
];

/// scf/scb: the node's own out-edges (conf / contrib view);
/// ocf/ocb: other nodes' edges into it.
const ZONE_PREFIXES: [&str; 4] = ["scf", "scb", "ocf", "ocb"];
const PRESSURE_PREFIXES: [&str; 2] = ["Pin", "Pout"];

/// The fixed column list; identical for every edge of a run.
pub fn feature_columns() -> Vec<String> {
    let mut cols: Vec<String> = EDGE_LEVEL_COLUMNS.iter().map(|s| s.to_string()).collect();
    for endpoint in ["x", "y"] {
        for prefix in ZONE_PREFIXES {
            for stat in ZONE_STATS {
                cols.push(format!("{prefix}{stat}.{endpoint}"));
            }
        }
        for prefix in PRESSURE_PREFIXES {
            for stat in PRESSURE_STATS {
                cols.push(format!("{prefix}{stat}.{endpoint}"));
            }
        }
        for prefix in ZONE_PREFIXES.iter().chain(PRESSURE_PREFIXES.iter()) {
            cols.push(format!("{prefix}Missing.{endpoint}"));
        }
    }
    cols
}

fn or_zero(v: Option<f64>) -> f64 {
    v.unwrap_or(0.0)
}

fn push_summary_stats(out: &mut Vec<f64>, s: &DistributionSummary, nmad: Option<Option<f64>>) {
    out.push(or_zero(s.mean));
    out.push(or_zero(s.sd));
    out.push(or_zero(s.skewness));
    out.push(or_zero(s.kurtosis));
    out.push(or_zero(s.median));
    out.push(or_zero(s.mad));
    if let Some(nmad) = nmad {
        out.push(or_zero(nmad));
    }
    out.push(or_zero(s.l1));
    out.push(or_zero(s.l2));
    out.push(or_zero(s.l3));
    out.push(or_zero(s.l4));
    out.push(or_zero(s.min));
    out.push(or_zero(s.max));
}

fn push_behavior(out: &mut Vec<f64>, b: &NodeBehavior) {
    for zone in [&b.out_conf, &b.out_contrib, &b.in_conf, &b.in_contrib] {
        push_summary_stats(out, &zone.base, Some(zone.nmad));
    }
    push_summary_stats(out, &b.pressure_in, None);
    push_summary_stats(out, &b.pressure_out, None);
    for zone in [&b.out_conf, &b.out_contrib, &b.in_conf, &b.in_contrib] {
        out.push(if zone.base.has_undefined() { 1.0 } else { 0.0 });
    }
    out.push(if b.pressure_in.has_undefined() { 1.0 } else { 0.0 });
    out.push(if b.pressure_out.has_undefined() { 1.0 } else { 0.0 });
}

fn edge_row(
    net: &TransitionNetwork,
    source: &str,
    target: &str,
    bx: &NodeBehavior,
    by: &NodeBehavior,
) -> Result<Vec<f64>, GraphError> {
    let params = edge_params(net, source, target)?;
    let edge = net.edge(source, target)?;

    let (tz_conf, _) = zscore(params.conf, &bx.out_conf_sample);
    let (tz_contrib, _) = zscore(params.contrib, &by.in_contrib_sample);
    let tz = tz_conf + tz_contrib;

    let intervals: Vec<f64> = edge.intervals.iter().map(|&v| v as f64).collect();
    let intvl_median = median_mad(&intervals).0.expect("edges have intervals");

    let mut row = Vec::with_capacity(feature_count());
    row.extend([
        params.conf,
        params.contrib,
        params.conf_rev,
        params.contrib_rev,
        params.nconf,
        params.nconf_lift,
        params.ncontrib,
        params.ncontrib_lift,
        params.nconf_rev,
        params.nconf_rev_lift,
        params.ncontrib_rev,
        params.ncontrib_rev_lift,
        params.resistance,
        params.pressure,
        params.asym_conf,
        params.asym_contrib,
        tz,
        intvl_median,
        edge.count as f64,
        net.nodes[source].freq as f64,
        net.nodes[target].freq as f64,
    ]);
    push_behavior(&mut row, bx);
    push_behavior(&mut row, by);
    Ok(row)
}

pub fn feature_count() -> usize {
    EDGE_LEVEL_COLUMNS.len()
        + 2 * (ZONE_PREFIXES.len() * ZONE_STATS.len()
            + PRESSURE_PREFIXES.len() * PRESSURE_STATS.len()
            + ZONE_PREFIXES.len()
            + PRESSURE_PREFIXES.len())
}

/// Complete feature vector of one edge, ordered as [`feature_columns`].
pub fn edge_feature_vector(
    net: &TransitionNetwork,
    source: &str,
    target: &str,
) -> Result<Vec<f64>, GraphError> {
    net.edge(source, target)?;
    let bx = node_behavior(net, source)?;
    let by = node_behavior(net, target)?;
    edge_row(net, source, target, &bx, &by)
}

fn behaviors_for(
    net: &TransitionNetwork,
    codes: &[&str],
) -> Result<BTreeMap<String, NodeBehavior>, GraphError> {
    let computed: Result<Vec<(String, NodeBehavior)>, GraphError> = codes
        .par_iter()
        .map(|code| Ok((code.to_string(), node_behavior(net, code)?)))
        .collect();
    Ok(computed?.into_iter().collect())
}

/// Feature rows for the given edges, in the given order.
pub fn featurize_keys(
    net: &TransitionNetwork,
    keys: &[(String, String)],
) -> Result<FeatureMatrix, GraphError> {
    for (s, t) in keys {
        net.edge(s, t)?;
    }
    let mut codes: Vec<&str> = keys
        .iter()
        .flat_map(|(s, t)| [s.as_str(), t.as_str()])
        .collect();
    codes.sort_unstable();
    codes.dedup();
    let behaviors = behaviors_for(net, &codes)?;

    let rows: Result<Vec<Vec<f64>>, GraphError> = keys
        .par_iter()
        .map(|(s, t)| edge_row(net, s, t, &behaviors[s], &behaviors[t]))
        .collect();

    Ok(FeatureMatrix {
        schema_version: FEATURE_SCHEMA_VERSION.to_string(),
        columns: feature_columns(),
        keys: keys.to_vec(),
        rows: rows?,
    })
}

/// Feature rows for every edge (optionally only those with at least
/// `min_edge_count` observations), sorted by (source, target).
pub fn featurize_all(
    net: &TransitionNetwork,
    min_edge_count: Option<u64>,
) -> Result<FeatureMatrix, GraphError> {
    let keys: Vec<(String, String)> = net
        .edges
        .iter()
        .filter(|(_, e)| min_edge_count.map_or(true, |m| e.count >= m))
        .map(|(k, _)| k.clone())
        .collect();
    featurize_keys(net, &keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::e1_network;
    use approx::assert_relative_eq;

    #[test]
    fn level_one_to_three_params() {
        let net = e1_network();
        let p = edge_params(&net, "A", "B").unwrap();
        assert_relative_eq!(p.conf, 0.8, epsilon = 1e-12);
        assert_relative_eq!(p.contrib, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.resistance, 0.25, epsilon = 1e-12);
        assert_relative_eq!(p.pressure, 1.6, epsilon = 1e-12);
        assert_eq!(p.conf_rev, 0.0);
        assert_eq!(p.contrib_rev, 0.0);
        assert_relative_eq!(p.asym_conf, 0.8, epsilon = 1e-12);
        // freq sum = 25; nconf = 0.8 * 8/25, lift = 0.8 / (8/25)
        assert_relative_eq!(p.nconf, 0.8 * 8.0 / 25.0, epsilon = 1e-12);
        assert_relative_eq!(p.nconf_lift, 0.8 * 25.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn zone_value_sets() {
        let net = e1_network();
        let z3c = zone_values(&net, "C", Zone::InConf, Family::Raw).unwrap();
        assert_eq!(z3c, vec![0.2, 1.0]);

        let z3a = zone_values(&net, "A", Zone::InConf, Family::Raw).unwrap();
        assert!(z3a.is_empty());

        let z4c = zone_values(&net, "C", Zone::InContrib, Family::Raw).unwrap();
        assert_relative_eq!(z4c[0], 2.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(z4c[1], 5.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(z4c.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn behavior_medians() {
        let net = e1_network();
        let b = node_behavior(&net, "C").unwrap();
        assert_relative_eq!(b.in_conf.base.median.unwrap(), 0.6, epsilon = 1e-12);
        assert_eq!(b.in_conf.base.n, 2);
        assert!(b.in_conf.base.has_undefined()); // n=2 < 4
    }

    #[test]
    fn isolated_node_has_empty_zones() {
        use crate::ingest::{EventRecord, SequenceDataset, Transition};
        let ds = SequenceDataset::from_records(vec![
            EventRecord {
                entity_id: "a".into(),
                event_code: "A".into(),
                timestamp: 0,
            },
            EventRecord {
                entity_id: "a".into(),
                event_code: "B".into(),
                timestamp: 1,
            },
            EventRecord {
                entity_id: "b".into(),
                event_code: "LONE".into(),
                timestamp: 0,
            },
        ]);
        let net = crate::graph::TransitionNetwork::build(
            &[Transition {
                source: "A".into(),
                target: "B".into(),
                interval: 1,
            }],
            &ds,
        )
        .unwrap();
        let b = node_behavior(&net, "LONE").unwrap();
        assert_eq!(b.out_conf.base.n, 0);
        assert_eq!(b.out_conf.base.mean, None);
        assert_eq!(b.in_contrib.base.n, 0);
        assert!(b.out_conf.base.has_undefined());
    }

    #[test]
    fn tz_and_interval_median() {
        let net = e1_network();
        let cols = feature_columns();
        let tz_idx = cols.iter().position(|c| c == "tz").unwrap();
        let row = edge_feature_vector(&net, "B", "C").unwrap();
        // zone-1 of B is singleton {1.0} -> first term degenerate 0;
        // contrib(B->C) = 5/7 against zone-4 of C {2/7, 5/7}: z = +1
        assert_relative_eq!(row[tz_idx], 1.0, epsilon = 1e-12);

        let med_idx = cols.iter().position(|c| c == "intvl_median").unwrap();
        let row_ab = edge_feature_vector(&net, "A", "B").unwrap();
        // A->B intervals are 0..=7 -> median 3.5
        assert_relative_eq!(row_ab[med_idx], 3.5, epsilon = 1e-12);
    }

    #[test]
    fn interval_median_even_case() {
        use crate::ingest::{EventRecord, SequenceDataset, Transition};
        let mut records = Vec::new();
        for (i, code) in ["A", "B"].iter().enumerate() {
            for k in 0..3 {
                records.push(EventRecord {
                    entity_id: format!("{i}{k}"),
                    event_code: (*code).into(),
                    timestamp: 0,
                });
            }
        }
        let ds = SequenceDataset::from_records(records);
        let ts = vec![
            Transition {
                source: "A".into(),
                target: "B".into(),
                interval: 3,
            },
            Transition {
                source: "A".into(),
                target: "B".into(),
                interval: 8,
            },
        ];
        let net = crate::graph::TransitionNetwork::build(&ts, &ds).unwrap();
        let cols = feature_columns();
        let med_idx = cols.iter().position(|c| c == "intvl_median").unwrap();
        let row = edge_feature_vector(&net, "A", "B").unwrap();
        assert_relative_eq!(row[med_idx], 5.5, epsilon = 1e-12);
    }

    #[test]
    fn schema_is_consistent() {
        let cols = feature_columns();
        assert_eq!(cols.len(), feature_count());
        // paper-named predictors must exist
        for name in [
            "scfNMAD.x",
            "scfNMAD.y",
            "scbMedian.x",
            "scbMedian.y",
            "ocbNMAD.x",
            "ocbNMAD.y",
            "scfL1.x",
            "scfL1.y",
            "PinSD.y",
            "ocfKurt.x",
            "tz",
            "intvl_median",
        ] {
            assert!(cols.contains(&name.to_string()), "missing column {name}");
        }
        let net = e1_network();
        for (s, t) in net.edge_keys() {
            let row = edge_feature_vector(&net, &s, &t).unwrap();
            assert_eq!(row.len(), cols.len());
            assert!(row.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn named_columns_match_direct_computation() {
        let net = e1_network();
        let cols = feature_columns();
        let row = edge_feature_vector(&net, "A", "B").unwrap();
        let get = |name: &str| row[cols.iter().position(|c| c == name).unwrap()];

        assert_relative_eq!(get("conf"), 0.8, epsilon = 1e-12);
        // scfMedian.x = median of A's out-conf zone {0.8, 0.2}
        assert_relative_eq!(get("scfMedian.x"), 0.5, epsilon = 1e-12);
        // ocbMedian.y = median of B's in-contrib zone {1.0}
        assert_relative_eq!(get("ocbMedian.y"), 1.0, epsilon = 1e-12);
        // scfNMAD.x = MAD of normalized out-confs of A: {0.8*8/25, 0.2*7/25}
        let nvals: [f64; 2] = [0.8 * 8.0 / 25.0, 0.2 * 7.0 / 25.0];
        let want = (nvals[0] - nvals[1]).abs() / 2.0;
        assert_relative_eq!(get("scfNMAD.x"), want, epsilon = 1e-12);
        // PinSD.y: B has one in-edge -> sd undefined -> 0, missing flag set
        assert_eq!(get("PinSD.y"), 0.0);
        assert_eq!(get("PinMissing.y"), 1.0);
        assert_eq!(get("freq_x"), 10.0);
        assert_eq!(get("freq_y"), 8.0);
        assert_eq!(get("count"), 8.0);
    }

    #[test]
    fn featurize_all_with_filter() {
        let net = e1_network();
        let all = featurize_all(&net, None).unwrap();
        assert_eq!(all.n_rows(), 3);
        assert_eq!(
            all.keys,
            vec![
                ("A".to_string(), "B".to_string()),
                ("A".to_string(), "C".to_string()),
                ("B".to_string(), "C".to_string()),
            ]
        );
        let filtered = featurize_all(&net, Some(5)).unwrap();
        assert_eq!(filtered.n_rows(), 2);
        assert_eq!(filtered.keys[0].1, "B");
        assert_eq!(filtered.keys[1].0, "B");
    }

    #[test]
    fn zone_probability_sums_and_ranges() {
        let net = random_network(20, 2000, 31);
        for (code, node) in &net.nodes {
            if node.out_total > 0 {
                let z1 = zone_values(&net, code, Zone::OutConf, Family::Raw).unwrap();
                assert!((z1.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(z1.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            if node.in_total > 0 {
                let z4 = zone_values(&net, code, Zone::InContrib, Family::Raw).unwrap();
                assert!((z4.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(z4.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
        // pressure sign follows freq difference
        for ((s, t), e) in &net.edges {
            let p = pressure_of(&net, s, t, e.count);
            let fi = net.nodes[s].freq as f64;
            let fj = net.nodes[t].freq as f64;
            assert_eq!(p > 0.0, fi > fj, "pressure sign for {s}->{t}");
            let params = edge_params(&net, s, t).unwrap();
            assert!(params.resistance >= 0.0);
        }
    }

    #[test]
    fn behavior_matches_brute_force_recomputation() {
        let net = random_network(20, 1500, 77);
        for code in net.nodes.keys() {
            let b = node_behavior(&net, code).unwrap();
            let z1 = zone_values(&net, code, Zone::OutConf, Family::Raw).unwrap();
            assert_eq!(b.out_conf.base, DistributionSummary::from_sample(&z1));
            let z4 = zone_values(&net, code, Zone::InContrib, Family::Raw).unwrap();
            assert_eq!(b.in_contrib.base, DistributionSummary::from_sample(&z4));
            let z3n = zone_values(&net, code, Zone::InConf, Family::Normalized).unwrap();
            assert_eq!(b.in_conf.nmad, median_mad(&z3n).1);
            let pin = zone_values(&net, code, Zone::InConf, Family::Pressure).unwrap();
            assert_eq!(b.pressure_in, DistributionSummary::from_sample(&pin));
        }
    }

    #[test]
    fn featurize_is_permutation_invariant() {
        use crate::ingest::{EventRecord, SequenceDataset, Transition};
        use rand::Rng;
        let mut rng = crate::rng::stream(3, crate::rng::StreamKind::Sampling, 9);
        let codes: Vec<String> = (0..8).map(|i| format!("N{i}")).collect();
        let records: Vec<EventRecord> = codes
            .iter()
            .flat_map(|c| {
                (0..20).map(move |i| EventRecord {
                    entity_id: format!("{c}{i}"),
                    event_code: c.clone(),
                    timestamp: 0,
                })
            })
            .collect();
        let ds = SequenceDataset::from_records(records);
        let mut ts: Vec<Transition> = (0..400)
            .map(|_| {
                let s = rng.gen_range(0..8);
                let t = (s + rng.gen_range(1..8)) % 8;
                Transition {
                    source: codes[s].clone(),
                    target: codes[t].clone(),
                    interval: rng.gen_range(0..50),
                }
            })
            .collect();
        let net1 = crate::graph::TransitionNetwork::build(&ts, &ds).unwrap();
        let m1 = featurize_all(&net1, None).unwrap();
        for i in (1..ts.len()).rev() {
            let j = rng.gen_range(0..=i);
            ts.swap(i, j);
        }
        let net2 = crate::graph::TransitionNetwork::build(&ts, &ds).unwrap();
        let m2 = featurize_all(&net2, None).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn count_scaling_behaviour() {
        use crate::ingest::{EventRecord, SequenceDataset, Transition};
        let base_records = |mult: usize| {
            let mut records = Vec::new();
            for (code, n) in [("A", 6), ("B", 5), ("C", 4)] {
                for i in 0..n * mult {
                    records.push(EventRecord {
                        entity_id: format!("{code}{i}"),
                        event_code: code.into(),
                        timestamp: 0,
                    });
                }
            }
            SequenceDataset::from_records(records)
        };
        let base_ts = |mult: usize| {
            let mut ts = Vec::new();
            for _ in 0..mult {
                for (s, t, n) in [("A", "B", 4), ("A", "C", 2), ("B", "C", 3)] {
                    for _ in 0..n {
                        ts.push(Transition {
                            source: s.into(),
                            target: t.into(),
                            interval: 7,
                        });
                    }
                }
            }
            ts
        };
        let net1 =
            crate::graph::TransitionNetwork::build(&base_ts(1), &base_records(1)).unwrap();
        let net3 =
            crate::graph::TransitionNetwork::build(&base_ts(3), &base_records(3)).unwrap();
        let cols = feature_columns();
        let idx = |name: &str| cols.iter().position(|c| c == name).unwrap();
        for (s, t) in net1.edge_keys() {
            let r1 = edge_feature_vector(&net1, &s, &t).unwrap();
            let r3 = edge_feature_vector(&net3, &s, &t).unwrap();
            for name in ["conf", "contrib", "nconf", "nconf_lift", "tz", "scfMedian.x",
                         "scbMAD.y", "ocfL2.x", "ocbNMAD.y", "resistance"] {
                assert_relative_eq!(r1[idx(name)], r3[idx(name)], epsilon = 1e-9);
            }
            // pressure is proportional to counts
            assert_relative_eq!(3.0 * r1[idx("pressure")], r3[idx("pressure")], epsilon = 1e-9);
            assert_relative_eq!(3.0 * r1[idx("count")], r3[idx("count")], epsilon = 1e-9);
        }
    }

    /// Random node-frequency-consistent network for property tests.
    fn random_network(n_nodes: usize, n_transitions: usize, seed: u64) -> TransitionNetwork {
        use crate::ingest::{EventRecord, SequenceDataset, Transition};
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, crate::rng::StreamKind::Sampling, 0);
        let codes: Vec<String> = (0..n_nodes).map(|i| format!("N{i:03}")).collect();
        let mut records = Vec::new();
        let mut entity = 0usize;
        let mut ts = Vec::new();
        while ts.len() < n_transitions {
            let len = rng.gen_range(2..6);
            let mut prev: Option<(usize, i64)> = None;
            let mut time = 0i64;
            for _ in 0..len {
                let node = rng.gen_range(0..n_nodes);
                time += rng.gen_range(1..40);
                records.push(EventRecord {
                    entity_id: format!("e{entity}"),
                    event_code: codes[node].clone(),
                    timestamp: time,
                });
                if let Some((p, pt)) = prev {
                    ts.push(Transition {
                        source: codes[p].clone(),
                        target: codes[node].clone(),
                        interval: time - pt,
                    });
                }
                prev = Some((node, time));
            }
            entity += 1;
        }
        ts.truncate(n_transitions);
        // records must cover every endpoint; they do by construction
        TransitionNetwork::build(&ts, &SequenceDataset::from_records(records)).unwrap()
    }
}
