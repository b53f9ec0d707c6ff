use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// Edge probability that puts the mean degree of an 80-node mesh near 39.
pub const DEFAULT_MESH_DENSITY: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Node 0 is the hub.
    Star,
    Ring,
    /// Complete binary tree filled level by level from root 0.
    Tree,
    /// Random graph with independent edges, then every node topped up to
    /// degree two.
    Mesh,
}

impl Topology {
    pub fn min_nodes(self) -> usize {
        match self {
            Topology::Star | Topology::Tree => 2,
            Topology::Ring | Topology::Mesh => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::Star => "star",
            Topology::Ring => "ring",
            Topology::Tree => "tree",
            Topology::Mesh => "mesh",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Ok(Topology::Star),
            "ring" => Ok(Topology::Ring),
            "tree" => Ok(Topology::Tree),
            "mesh" => Ok(Topology::Mesh),
            other => Err(Error::Domain(format!("unknown topology {other:?}"))),
        }
    }
}

/// Generate a topology on `n` nodes. `seed` and `mesh_density` only affect
/// [`Topology::Mesh`]; the density defaults to [`DEFAULT_MESH_DENSITY`].
pub fn generate(topology: Topology, n: usize, seed: u64, mesh_density: Option<f64>) -> Result<Graph> {
    if n < topology.min_nodes() {
        return Err(Error::Domain(format!(
            "{topology} needs at least {} nodes, got {n}",
            topology.min_nodes()
        )));
    }
    let mut g = Graph::empty(n);
    match topology {
        Topology::Star => {
            for leaf in 1..n {
                g.add_edge(0, leaf)?;
            }
        }
        Topology::Ring => {
            for u in 0..n {
                g.add_edge(u, (u + 1) % n)?;
            }
        }
        Topology::Tree => {
            for child in 1..n {
                g.add_edge((child - 1) / 2, child)?;
            }
        }
        Topology::Mesh => {
            let density = mesh_density.unwrap_or(DEFAULT_MESH_DENSITY);
            if !(density > 0.0 && density <= 1.0) {
                return Err(Error::Domain(format!("mesh density {density} must lie in (0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < density {
                        g.add_edge(u, v)?;
                    }
                }
            }
            for u in 0..n {
                while g.degree(u) < 2 {
                    let candidates: Vec<usize> = (0..n).filter(|&v| v != u && !g.has_edge(u, v)).collect();
                    let &v = candidates.choose(&mut rng).expect("n >= 3 leaves a non-neighbor");
                    g.add_edge(u, v)?;
                }
            }
        }
    }
    Ok(g)
}
