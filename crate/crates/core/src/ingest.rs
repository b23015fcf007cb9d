//! Event-sequence parsing and transition extraction.
//!
//! Input is one record per line, CSV (`entity_id,event_code,timestamp`) or
//! JSONL with the same keys. Each entity's history, sorted by timestamp,
//! yields one transition per consecutive pair of events.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unparseable input: {malformed} of {total} lines malformed, first at line {first_bad_line}")]
    Format {
        malformed: usize,
        total: usize,
        first_bad_line: usize,
    },
    #[error("unsupported format `{0}` (expected csv or jsonl)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for InputFormat {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

/// One observed event: an entity was in a state at a time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub entity_id: String,
    pub event_code: String,
    pub timestamp: i64,
}

/// A one-step transition between consecutive events of one entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub source: String,
    pub target: String,
    /// Time units between the two events; >= 0 by construction.
    pub interval: i64,
}

/// Records grouped by entity, each group sorted by timestamp (stable, so
/// same-timestamp events keep input order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequenceDataset {
    pub groups: BTreeMap<String, Vec<EventRecord>>,
    pub n_records: usize,
}

impl SequenceDataset {
    pub fn from_records(records: Vec<EventRecord>) -> Self {
        let n_records = records.len();
        let mut groups: BTreeMap<String, Vec<EventRecord>> = BTreeMap::new();
        for rec in records {
            groups.entry(rec.entity_id.clone()).or_default().push(rec);
        }
        for group in groups.values_mut() {
            group.sort_by_key(|r| r.timestamp); // stable: ties keep input order
        }
        SequenceDataset { groups, n_records }
    }

    pub fn n_entities(&self) -> usize {
        self.groups.len()
    }

    /// Occurrences of each event code across all records.
    pub fn code_frequencies(&self) -> BTreeMap<String, u64> {
        let mut freqs = BTreeMap::new();
        for group in self.groups.values() {
            for rec in group {
                *freqs.entry(rec.event_code.clone()).or_insert(0) += 1;
            }
        }
        freqs
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub dataset: SequenceDataset,
    pub malformed_count: usize,
    pub first_bad_line: Option<usize>,
}

/// Parse a line-oriented stream of event records.
///
/// Malformed lines are counted and skipped; if they exceed half of all
/// non-empty data lines the whole stream is rejected.
pub fn parse_events<R: Read>(reader: R, format: InputFormat) -> Result<ParseOutcome, IngestError> {
    let buf = BufReader::new(reader);
    let mut records = Vec::new();
    let mut malformed = 0usize;
    let mut first_bad_line = None;
    let mut data_lines = 0usize;

    for (idx, line) in buf.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if format == InputFormat::Csv && line_no == 1 {
            // header required; tolerate BOM
            let header = line.trim_start_matches('\u{feff}').trim();
            if header != "entity_id,event_code,timestamp" {
                return Err(IngestError::Format {
                    malformed: 1,
                    total: 1,
                    first_bad_line: 1,
                });
            }
            continue;
        }
        data_lines += 1;
        match parse_line(&line, format) {
            Some(rec) => records.push(rec),
            None => {
                malformed += 1;
                first_bad_line.get_or_insert(line_no);
            }
        }
    }

    if data_lines > 0 && malformed * 2 > data_lines {
        return Err(IngestError::Format {
            malformed,
            total: data_lines,
            first_bad_line: first_bad_line.unwrap_or(1),
        });
    }

    Ok(ParseOutcome {
        dataset: SequenceDataset::from_records(records),
        malformed_count: malformed,
        first_bad_line,
    })
}

fn parse_line(line: &str, format: InputFormat) -> Option<EventRecord> {
    match format {
        InputFormat::Csv => {
            let mut parts = line.split(',');
            let entity = parts.next()?.trim();
            let code = parts.next()?.trim();
            let ts = parts.next()?.trim();
            if parts.next().is_some() || entity.is_empty() || code.is_empty() {
                return None;
            }
            Some(EventRecord {
                entity_id: entity.to_string(),
                event_code: code.to_string(),
                timestamp: ts.parse::<i64>().ok()?,
            })
        }
        InputFormat::Jsonl => {
            #[derive(Deserialize)]
            struct Line {
                entity_id: String,
                event_code: String,
                timestamp: i64,
            }
            let parsed: Line = serde_json::from_str(line).ok()?;
            if parsed.entity_id.is_empty() || parsed.event_code.is_empty() {
                return None;
            }
            Some(EventRecord {
                entity_id: parsed.entity_id,
                event_code: parsed.event_code,
                timestamp: parsed.timestamp,
            })
        }
    }
}

/// Emit one transition per consecutive record pair within each entity.
pub fn extract_transitions(dataset: &SequenceDataset) -> Vec<Transition> {
    let mut out = Vec::new();
    for group in dataset.groups.values() {
        for pair in group.windows(2) {
            out.push(Transition {
                source: pair[0].event_code.clone(),
                target: pair[1].event_code.clone(),
                interval: pair[1].timestamp - pair[0].timestamp,
            });
        }
    }
    out
}

/// Keep only transitions whose (source, target) pair occurs at least
/// `min_count` times; relative order is preserved.
pub fn filter_by_edge_count(transitions: &[Transition], min_count: usize) -> Vec<Transition> {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for t in transitions {
        *counts.entry((&t.source, &t.target)).or_insert(0) += 1;
    }
    transitions
        .iter()
        .filter(|t| counts[&(t.source.as_str(), t.target.as_str())] >= min_count)
        .cloned()
        .collect()
}

/// Drop transitions with an interval above the cutoff.
pub fn filter_by_max_interval(transitions: &[Transition], max_interval: i64) -> Vec<Transition> {
    transitions
        .iter()
        .filter(|t| t.interval <= max_interval)
        .cloned()
        .collect()
}

/// Write a dataset back out in the ingest CSV format
/// (`entity_id,event_code,timestamp`), entities in sorted order.
pub fn write_events_csv<W: std::io::Write>(
    writer: W,
    dataset: &SequenceDataset,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["entity_id", "event_code", "timestamp"])
        .map_err(csv_io)?;
    for group in dataset.groups.values() {
        for rec in group {
            w.write_record([
                rec.entity_id.as_str(),
                rec.event_code.as_str(),
                &rec.timestamp.to_string(),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write the per-code frequency table (`event_code,freq`).
pub fn write_codes_csv<W: std::io::Write>(
    writer: W,
    freqs: &std::collections::BTreeMap<String, u64>,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["event_code", "freq"]).map_err(csv_io)?;
    for (code, freq) in freqs {
        w.write_record([code.as_str(), &freq.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_codes_csv<R: Read>(
    reader: R,
) -> Result<std::collections::BTreeMap<String, u64>, IngestError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = std::collections::BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_io)?;
        if rec.len() != 2 {
            return Err(IngestError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("codes row needs 2 fields, got {}", rec.len()),
            )));
        }
        let freq: u64 = rec[1].parse().map_err(|e| {
            IngestError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("bad freq: {e}"),
            ))
        })?;
        out.insert(rec[0].to_string(), freq);
    }
    Ok(out)
}

// --- transitions file format (CSV `source,target,interval`) ---

pub fn write_transitions_csv<W: std::io::Write>(
    writer: W,
    transitions: &[Transition],
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["source", "target", "interval"])
        .map_err(csv_io)?;
    for t in transitions {
        w.write_record([&t.source, &t.target, &t.interval.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_transitions_csv<R: Read>(reader: R) -> Result<Vec<Transition>, IngestError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize::<Transition>() {
        out.push(rec.map_err(csv_io)?);
    }
    Ok(out)
}

fn csv_io(err: csv::Error) -> IngestError {
    IngestError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(entity: &str, code: &str, ts: i64) -> EventRecord {
        EventRecord {
            entity_id: entity.into(),
            event_code: code.into(),
            timestamp: ts,
        }
    }

    #[test]
    fn parses_csv_grouped_and_sorted() {
        let input = "entity_id,event_code,timestamp\np1,X,5\np2,A,1\np1,Y,2\n";
        let out = parse_events(input.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(out.dataset.n_entities(), 2);
        assert_eq!(out.dataset.n_records, 3);
        assert_eq!(out.malformed_count, 0);
        let p1 = &out.dataset.groups["p1"];
        assert_eq!(p1[0].event_code, "Y"); // sorted by timestamp
        assert_eq!(p1[1].event_code, "X");
    }

    #[test]
    fn empty_stream_is_an_empty_dataset() {
        let out = parse_events("".as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(out.dataset.n_entities(), 0);
        assert_eq!(out.dataset.n_records, 0);
    }

    #[test]
    fn counts_malformed_lines() {
        let mut input = String::from("entity_id,event_code,timestamp\n");
        for i in 0..9 {
            input.push_str(&format!("p{i},C{i},{i}\n"));
        }
        input.push_str("p9,C9,not-a-number\n");
        let out = parse_events(input.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(out.dataset.n_records, 9);
        assert_eq!(out.malformed_count, 1);
        assert_eq!(out.first_bad_line, Some(11));
    }

    #[test]
    fn mostly_malformed_stream_is_rejected() {
        let input = "entity_id,event_code,timestamp\np1,A,x\np2,B,y\np3,C,3\n";
        match parse_events(input.as_bytes(), InputFormat::Csv) {
            Err(IngestError::Format { first_bad_line, .. }) => assert_eq!(first_bad_line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn parses_jsonl() {
        let input = r#"{"entity_id":"p1","event_code":"X","timestamp":0}
{"entity_id":"p1","event_code":"Y","timestamp":10}"#;
        let out = parse_events(input.as_bytes(), InputFormat::Jsonl).unwrap();
        assert_eq!(out.dataset.n_records, 2);
        let ts = extract_transitions(&out.dataset);
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].interval, 10);
    }

    #[test]
    fn extracts_consecutive_pairs() {
        let ds = SequenceDataset::from_records(vec![
            rec("p1", "X", 0),
            rec("p1", "Y", 10),
            rec("p1", "Z", 15),
        ]);
        let ts = extract_transitions(&ds);
        assert_eq!(
            ts,
            vec![
                Transition {
                    source: "X".into(),
                    target: "Y".into(),
                    interval: 10
                },
                Transition {
                    source: "Y".into(),
                    target: "Z".into(),
                    interval: 5
                },
            ]
        );
    }

    #[test]
    fn single_event_entities_emit_nothing() {
        let ds = SequenceDataset::from_records(vec![rec("p1", "X", 0)]);
        assert!(extract_transitions(&ds).is_empty());
    }

    #[test]
    fn two_entities_fixture() {
        let ds = SequenceDataset::from_records(vec![
            rec("p1", "A", 0),
            rec("p1", "B", 3),
            rec("p2", "A", 1),
            rec("p2", "B", 9),
        ]);
        let ts = extract_transitions(&ds);
        assert_eq!(ts.len(), 2);
        assert_eq!((ts[0].interval, ts[1].interval), (3, 8));
        assert!(ts.iter().all(|t| t.source == "A" && t.target == "B"));
    }

    #[test]
    fn same_timestamp_events_keep_input_order() {
        let ds = SequenceDataset::from_records(vec![
            rec("p1", "A", 5),
            rec("p1", "B", 5),
            rec("p1", "C", 5),
        ]);
        let ts = extract_transitions(&ds);
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].source, "A");
        assert_eq!(ts[0].target, "B");
        assert_eq!(ts[0].interval, 0);
        assert_eq!(ts[1].target, "C");
    }

    #[test]
    fn transition_count_matches_group_sizes() {
        use rand::Rng;
        let mut rng = crate::rng::stream(1, crate::rng::StreamKind::Sampling, 0);
        let mut records = Vec::new();
        let mut expected = 0usize;
        for e in 0..50 {
            let k = rng.gen_range(1..8);
            expected += k - 1;
            for i in 0..k {
                records.push(rec(&format!("e{e}"), &format!("C{}", rng.gen_range(0..5)), i as i64));
            }
        }
        let ds = SequenceDataset::from_records(records);
        let ts = extract_transitions(&ds);
        assert_eq!(ts.len(), expected);
        assert!(ts.iter().all(|t| t.interval >= 0));
    }

    #[test]
    fn edge_count_filter_thresholds() {
        let mut ts = Vec::new();
        for _ in 0..25 {
            ts.push(Transition {
                source: "A".into(),
                target: "B".into(),
                interval: 1,
            });
        }
        for _ in 0..5 {
            ts.push(Transition {
                source: "A".into(),
                target: "C".into(),
                interval: 1,
            });
        }
        let kept = filter_by_edge_count(&ts, 21);
        assert_eq!(kept.len(), 25);
        assert!(kept.iter().all(|t| t.target == "B"));

        assert_eq!(filter_by_edge_count(&ts, 1), ts);

        let boundary: Vec<Transition> = ts.iter().take(20).cloned().collect();
        assert!(filter_by_edge_count(&boundary, 21).is_empty());
    }

    #[test]
    fn events_and_codes_csv_round_trip() {
        let ds = SequenceDataset::from_records(vec![
            rec("p1", "X", 0),
            rec("p1", "Y", 10),
            rec("p2", "X", 3),
        ]);
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &ds).unwrap();
        let back = parse_events(buf.as_slice(), InputFormat::Csv).unwrap();
        assert_eq!(back.dataset, ds);

        let freqs = ds.code_frequencies();
        let mut buf = Vec::new();
        write_codes_csv(&mut buf, &freqs).unwrap();
        assert_eq!(read_codes_csv(buf.as_slice()).unwrap(), freqs);
    }

    #[test]
    fn transitions_csv_round_trip() {
        let ts = vec![
            Transition {
                source: "A".into(),
                target: "B".into(),
                interval: 3,
            },
            Transition {
                source: "B".into(),
                target: "C".into(),
                interval: 0,
            },
        ];
        let mut buf = Vec::new();
        write_transitions_csv(&mut buf, &ts).unwrap();
        let back = read_transitions_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ts);
    }
}
