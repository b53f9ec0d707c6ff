use std::collections::HashMap;
use std::io::BufRead;

use super::Graph;
use crate::error::{Error, Result};

/// One contact between two devices.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub node_a: String,
    pub node_b: String,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

/// Graph built from a contact trace, with the external label of every node.
#[derive(Debug, Clone)]
pub struct TraceGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
    /// Contact count per retained edge, aligned with `graph.edges()`.
    pub contacts: Vec<usize>,
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<TraceRecord>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    let parse_err = |message: String| Error::Parse { line: line_no, message };
    if fields.len() < 2 {
        return Err(parse_err(format!("expected at least two node labels, found {}", fields.len())));
    }
    let time = |idx: usize| -> Result<Option<f64>> {
        fields
            .get(idx)
            .map(|raw| raw.parse::<f64>().map_err(|_| parse_err(format!("timestamp {raw:?} is not a number"))))
            .transpose()
    };
    let record = TraceRecord {
        node_a: fields[0].to_string(),
        node_b: fields[1].to_string(),
        start: time(2)?,
        end: time(3)?,
    };
    if record.node_a == record.node_b {
        return Err(parse_err(format!("contact of node {:?} with itself", record.node_a)));
    }
    Ok(Some(record))
}

/// Parse a delimited contact trace: `node_a node_b [start [end [...]]]` per
/// line, separated by whitespace or commas. Lines starting with `#` are
/// comments; columns after `end` are ignored.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        if let Some(record) = parse_line(&line?, idx + 1)? {
            records.push(record);
        }
    }
    Ok(records)
}

/// Build the contact graph: nodes are relabeled densely in order of first
/// appearance, and `{a, b}` is an edge iff the pair met at least
/// `min_contacts` times.
pub fn ingest_trace<I>(records: I, min_contacts: usize) -> Result<TraceGraph>
where
    I: IntoIterator<Item = TraceRecord>,
{
    if min_contacts == 0 {
        return Err(Error::Domain("min_contacts must be at least 1".into()));
    }
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    let mut intern = |label: String| -> usize {
        *ids.entry(label.clone()).or_insert_with(|| {
            labels.push(label);
            labels.len() - 1
        })
    };
    for record in records {
        let a = intern(record.node_a);
        let b = intern(record.node_b);
        if a == b {
            return Err(Error::Domain(format!("self-contact on node {a}")));
        }
        *counts.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    if labels.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut graph = Graph::empty(labels.len());
    for (&(a, b), &count) in &counts {
        if count >= min_contacts {
            graph.add_edge(a, b)?;
        }
    }
    let contacts = graph.edges().map(|(a, b)| counts[&(a, b)]).collect();
    Ok(TraceGraph { graph, labels, contacts })
}
