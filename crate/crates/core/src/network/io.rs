use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

/// Write the graph file format: `V <count>` followed by one `u v` line per edge.
pub fn write_graph<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "V {}", graph.node_count())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Read the graph file format. Blank lines and lines starting with `#` are skipped.
pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut graph: Option<Graph> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match &mut graph {
            None => {
                let count = match fields.as_slice() {
                    ["V", count] => count
                        .parse::<usize>()
                        .map_err(|_| parse_err(format!("node count {count:?} is not an integer")))?,
                    _ => return Err(parse_err(format!("expected header \"V <count>\", found {trimmed:?}"))),
                };
                graph = Some(Graph::empty(count));
            }
            Some(g) => {
                let (u, v) = match fields.as_slice() {
                    [u, v] => (
                        u.parse::<usize>().map_err(|_| parse_err(format!("node id {u:?} is not an integer")))?,
                        v.parse::<usize>().map_err(|_| parse_err(format!("node id {v:?} is not an integer")))?,
                    ),
                    _ => return Err(parse_err(format!("expected \"u v\", found {trimmed:?}"))),
                };
                g.add_edge(u, v).map_err(|e| parse_err(e.to_string()))?;
            }
        }
    }
    graph.ok_or(Error::EmptyGraph)
}
