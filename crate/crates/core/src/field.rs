//! Cooperation probabilities of regular players around a set of ZD nodes.
//!
//! A regular node's log-odds of cooperating is the sum of two local terms:
//! a constant `-1` when it plays a game with at least one regular neighbor,
//! and the incentive offered by its ZD neighbors, `r(nA-1)/(nA+1) + 1` with
//! `r` taken from the payoff scale at `nA + 1` players.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PayoffScale;
use crate::network::Graph;

pub fn logistic(delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0 / (1.0 + (-delta).exp())
    } else {
        let e = delta.exp();
        e / (1.0 + e)
    }
}

/// Log-odds of cooperation for a regular node with `zd_neighbors` ZD
/// neighbors.
pub fn node_delta(zd_neighbors: usize, has_regular_neighbors: bool, scale: &PayoffScale) -> f64 {
    let regular = if has_regular_neighbors { -1.0 } else { 0.0 };
    let zd = if zd_neighbors == 0 {
        0.0
    } else {
        let n_a = zd_neighbors as f64;
        let r = scale.eval(zd_neighbors + 1);
        r * (n_a - 1.0) / (n_a + 1.0) + 1.0
    };
    regular + zd
}

/// A graph with exactly the nodes in `zd_set` acting as ZD players.
#[derive(Debug, Clone)]
pub struct Deployment<'g> {
    graph: &'g Graph,
    zd_mask: Vec<bool>,
    zd_set: Vec<usize>,
    scale: PayoffScale,
}

impl<'g> Deployment<'g> {
    pub fn new(graph: &'g Graph, zd_nodes: &[usize], scale: PayoffScale) -> Result<Self> {
        scale.validate()?;
        let mut zd_mask = vec![false; graph.node_count()];
        for &v in zd_nodes {
            if v >= graph.node_count() {
                return Err(Error::Domain(format!("ZD node {v} is not in the graph")));
            }
            if std::mem::replace(&mut zd_mask[v], true) {
                return Err(Error::Domain(format!("ZD node {v} listed twice")));
            }
        }
        let zd_set = mask_to_set(&zd_mask);
        Ok(Deployment { graph, zd_mask, zd_set, scale })
    }

    pub fn from_mask(graph: &'g Graph, zd_mask: Vec<bool>, scale: PayoffScale) -> Result<Self> {
        if zd_mask.len() != graph.node_count() {
            return Err(Error::InvalidShape(format!(
                "mask has {} entries for {} nodes",
                zd_mask.len(),
                graph.node_count()
            )));
        }
        scale.validate()?;
        let zd_set = mask_to_set(&zd_mask);
        Ok(Deployment { graph, zd_mask, zd_set, scale })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// ZD nodes in increasing order.
    pub fn zd_set(&self) -> &[usize] {
        &self.zd_set
    }

    pub fn zd_mask(&self) -> &[bool] {
        &self.zd_mask
    }

    pub fn is_zd(&self, node: usize) -> bool {
        self.zd_mask[node]
    }

    pub fn scale(&self) -> &PayoffScale {
        &self.scale
    }

    pub fn k(&self) -> usize {
        self.zd_set.len()
    }

    pub fn regular_count(&self) -> usize {
        self.graph.node_count() - self.k()
    }
}

fn mask_to_set(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(i, &z)| z.then_some(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeField {
    pub zd: bool,
    pub zd_neighbors: usize,
    pub has_regular_neighbors: bool,
    pub delta: f64,
    /// Cooperation probability. ZD nodes carry the value they would have as
    /// regular players; it never enters the objective.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldResult {
    pub nodes: Vec<NodeField>,
    /// Sum of `q` over regular nodes.
    pub objective: f64,
    /// `objective / (V - K)`, or 0 when every node is a ZD node.
    pub mean_regular: f64,
}

pub fn evaluate(dep: &Deployment<'_>) -> FieldResult {
    let g = dep.graph();
    let counts = zd_neighbor_counts(g, dep.zd_set());
    let nodes: Vec<NodeField> = (0..g.node_count())
        .map(|v| {
            let zd_neighbors = counts[v] as usize;
            let has_regular_neighbors = g.degree(v) > zd_neighbors;
            let delta = node_delta(zd_neighbors, has_regular_neighbors, dep.scale());
            NodeField { zd: dep.is_zd(v), zd_neighbors, has_regular_neighbors, delta, q: logistic(delta) }
        })
        .collect();
    let objective: f64 = nodes.iter().filter(|n| !n.zd).map(|n| n.q).sum();
    let regular = dep.regular_count();
    let mean_regular = if regular == 0 { 0.0 } else { objective / regular as f64 };
    FieldResult { nodes, objective, mean_regular }
}

fn zd_neighbor_counts(g: &Graph, zd_set: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; g.node_count()];
    for &z in zd_set {
        for &v in g.neighbors(z) {
            counts[v] += 1;
        }
    }
    counts
}

/// Objective evaluator with the cooperation probabilities tabulated per
/// `(zd_neighbors, has_regular_neighbors)`. Produces the same sums as
/// [`evaluate`].
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'g> {
    graph: &'g Graph,
    /// `q_table[nA][has_regular as usize]`
    q_table: Vec<[f64; 2]>,
}

impl<'g> FieldEvaluator<'g> {
    pub fn new(graph: &'g Graph, scale: &PayoffScale) -> Result<Self> {
        scale.validate()?;
        let max_degree = (0..graph.node_count()).map(|v| graph.degree(v)).max().unwrap_or(0);
        let q_table = (0..=max_degree)
            .map(|n_a| [logistic(node_delta(n_a, false, scale)), logistic(node_delta(n_a, true, scale))])
            .collect();
        Ok(FieldEvaluator { graph, q_table })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Objective for the ZD set given both as a mask and as a sorted list.
    pub fn objective(&self, zd_mask: &[bool], zd_set: &[usize]) -> f64 {
        let counts = zd_neighbor_counts(self.graph, zd_set);
        let mut total = 0.0;
        for (v, &zd) in zd_mask.iter().enumerate() {
            if !zd {
                let n_a = counts[v] as usize;
                let has_regular = self.graph.degree(v) > n_a;
                total += self.q_table[n_a][has_regular as usize];
            }
        }
        total
    }

    pub fn objective_of_mask(&self, zd_mask: &[bool]) -> f64 {
        self.objective(zd_mask, &mask_to_set(zd_mask))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RatioMode {
    /// ZD nodes count as sure cooperators; regular nodes contribute `q`.
    Expected,
    /// Sample every regular node independently each round.
    MonteCarlo { rounds: u64 },
}

/// Fraction of cooperators in the population.
pub fn cooperator_ratio(dep: &Deployment<'_>, mode: RatioMode, seed: u64) -> Result<f64> {
    let field = evaluate(dep);
    let v = dep.graph().node_count();
    if v == 0 {
        return Err(Error::EmptyGraph);
    }
    match mode {
        RatioMode::Expected => Ok((dep.k() as f64 + field.objective) / v as f64),
        RatioMode::MonteCarlo { rounds } => {
            if rounds == 0 {
                return Err(Error::Domain("monte carlo needs at least one round".into()));
            }
            let qs: Vec<f64> = field.nodes.iter().filter(|n| !n.zd).map(|n| n.q).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cooperations: u64 = 0;
            for _ in 0..rounds {
                for &q in &qs {
                    if rng.gen::<f64>() < q {
                        cooperations += 1;
                    }
                }
            }
            let per_round = dep.k() as f64 + cooperations as f64 / rounds as f64;
            Ok(per_round / v as f64)
        }
    }
}
