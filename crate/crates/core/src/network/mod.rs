//! Undirected simple graphs: synthetic topologies, contact-trace ingestion,
//! the plain-text graph file format, and degree/betweenness metrics.

mod generate;
mod io;
mod metrics;
mod trace;

pub use generate::{generate, Topology, DEFAULT_MESH_DENSITY};
pub use io::{read_graph, write_graph};
pub use metrics::{betweenness, degree_stats, DegreeStats};
pub use trace::{ingest_trace, parse_trace, TraceGraph, TraceRecord};

use crate::error::{Error, Result};

/// Undirected graph on nodes `0..V` without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(nodes: usize) -> Self {
        Graph { adjacency: vec![Vec::new(); nodes], edge_count: 0 }
    }

    /// Build from an edge list. Repeated edges collapse into one; self-loops
    /// and out-of-range endpoints are errors.
    pub fn from_edges<I>(nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(nodes);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Insert `{u, v}`; returns `false` if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        let n = self.node_count();
        if u >= n || v >= n {
            return Err(Error::Domain(format!("edge ({u}, {v}) references a node outside 0..{n}")));
        }
        if u == v {
            return Err(Error::Domain(format!("self-loop on node {u}")));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let pos = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbors of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|adj| adj.binary_search(&v).is_ok())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn invalid_edges_are_rejected() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn edge_listing_is_canonical() {
        let g = Graph::from_edges(4, [(3, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 3)]);
        assert!(g.is_connected());
        assert!(!Graph::from_edges(4, [(0, 1)]).unwrap().is_connected());
    }
}
