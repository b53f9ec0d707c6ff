use std::collections::VecDeque;

use super::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub degrees: Vec<usize>,
    pub mean: f64,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let degrees: Vec<usize> = (0..g.node_count()).map(|v| g.degree(v)).collect();
    let mean = if degrees.is_empty() {
        0.0
    } else {
        degrees.iter().sum::<usize>() as f64 / degrees.len() as f64
    };
    DegreeStats { degrees, mean }
}

/// Shortest-path betweenness (Brandes), unnormalized, each unordered pair
/// counted once. Ties among equally short paths share the credit equally.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut centrality = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for source in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();

        sigma[source] = 1.0;
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != source {
                centrality[w] += delta[w];
            }
        }
    }
    // Every unordered pair was visited from both ends.
    centrality.iter_mut().for_each(|c| *c /= 2.0);
    centrality
}
