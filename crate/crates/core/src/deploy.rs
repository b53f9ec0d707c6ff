//! Choosing which `K` nodes act as ZD players.
//!
//! [`optimize_ga`] is a generational genetic algorithm over fixed-cardinality
//! bit vectors. [`optimize_exhaustive`] enumerates every `K`-subset and is the
//! reference on small graphs.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldEvaluator;
use crate::game::PayoffScale;
use crate::network::{betweenness, Graph};

pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene flip probability; `None` means `1/V`.
    pub mutation_rate: Option<f64>,
    pub elitism_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 300,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism_count: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Domain(format!("population_size {} must be at least 2", self.population_size)));
        }
        if self.tournament_size == 0 {
            return Err(Error::Domain("tournament_size must be at least 1".into()));
        }
        if self.elitism_count > self.population_size {
            return Err(Error::Domain(format!(
                "elitism_count {} exceeds population_size {}",
                self.elitism_count, self.population_size
            )));
        }
        let rate_ok = |x: f64| (0.0..=1.0).contains(&x);
        if !rate_ok(self.crossover_rate) {
            return Err(Error::Domain(format!("crossover_rate {} outside [0, 1]", self.crossover_rate)));
        }
        if let Some(m) = self.mutation_rate {
            if !rate_ok(m) {
                return Err(Error::Domain(format!("mutation_rate {m} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    /// ZD nodes in increasing order.
    pub zd_set: Vec<usize>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaOutcome {
    pub best: Placement,
    /// Best fitness of the initial population, then of every generation.
    pub history: Vec<f64>,
}

/// `k` nodes with the largest scores; ties go to the smaller index.
fn top_k(scores: &[f64], k: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut mask = vec![false; scores.len()];
    for &v in &order[..k] {
        mask[v] = true;
    }
    mask
}

fn random_mask<R: Rng>(v: usize, k: usize, rng: &mut R) -> Vec<bool> {
    let mut mask = vec![false; v];
    for i in index::sample(rng, v, k) {
        mask[i] = true;
    }
    mask
}

/// Flip random bits until exactly `k` are set.
fn repair<R: Rng>(mask: &mut [bool], k: usize, rng: &mut R) {
    let count = mask.iter().filter(|&&z| z).count();
    if count == k {
        return;
    }
    let surplus = count > k;
    let candidates: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] == surplus).collect();
    let flips = count.abs_diff(k);
    for pick in index::sample(rng, candidates.len(), flips) {
        mask[candidates[pick]] = !surplus;
    }
}

fn tournament<'a, R: Rng>(pop: &'a [Vec<bool>], fitness: &[f64], size: usize, rng: &mut R) -> &'a [bool] {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..pop.len());
        if fitness[challenger] > fitness[best] {
            best = challenger;
        }
    }
    &pop[best]
}

fn mask_set(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(i, &z)| z.then_some(i)).collect()
}

/// Genetic search for the `k`-node ZD set maximizing the incentive-field
/// objective. Deterministic for a fixed configuration.
pub fn optimize_ga(g: &Graph, k: usize, scale: &PayoffScale, cfg: &GaConfig) -> Result<GaOutcome> {
    cfg.validate()?;
    let v = g.node_count();
    if k == 0 || k >= v {
        return Err(Error::Domain(format!("K = {k} must satisfy 1 <= K < V = {v}")));
    }
    let evaluator = FieldEvaluator::new(g, scale)?;
    let mutation_rate = cfg.mutation_rate.unwrap_or(1.0 / v as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let degrees: Vec<f64> = (0..v).map(|n| g.degree(n) as f64).collect();
    let mut population = vec![top_k(&degrees, k), top_k(&betweenness(g), k)];
    population.truncate(cfg.population_size);
    while population.len() < cfg.population_size {
        population.push(random_mask(v, k, &mut rng));
    }

    let score = |pop: &[Vec<bool>]| -> Vec<f64> { pop.par_iter().map(|m| evaluator.objective_of_mask(m)).collect() };
    let mut fitness = score(&population);
    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut best_idx = argmax(&fitness);
    let mut best = (population[best_idx].clone(), fitness[best_idx]);
    history.push(fitness[best_idx]);

    for _ in 0..cfg.generations {
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let mut next: Vec<Vec<bool>> = ranked[..cfg.elitism_count].iter().map(|&i| population[i].clone()).collect();
        while next.len() < cfg.population_size {
            let a = tournament(&population, &fitness, cfg.tournament_size, &mut rng);
            let mut child = if rng.gen::<f64>() < cfg.crossover_rate {
                let b = tournament(&population, &fitness, cfg.tournament_size, &mut rng);
                a.iter().zip(b).map(|(&x, &y)| if rng.gen::<bool>() { x } else { y }).collect()
            } else {
                a.to_vec()
            };
            for bit in child.iter_mut() {
                if rng.gen::<f64>() < mutation_rate {
                    *bit = !*bit;
                }
            }
            repair(&mut child, k, &mut rng);
            next.push(child);
        }
        population = next;
        fitness = score(&population);
        best_idx = argmax(&fitness);
        history.push(fitness[best_idx]);
        if fitness[best_idx] > best.1 {
            best = (population[best_idx].clone(), fitness[best_idx]);
        }
    }

    Ok(GaOutcome { best: Placement { zd_set: mask_set(&best.0), objective: best.1 }, history })
}

/// First index of the maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate() {
        if x > values[best] {
            best = i;
        }
    }
    best
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact optimum over all `k`-subsets, refusing when there are more than
/// `cap` of them. Among equal objectives the lexicographically smallest set
/// wins.
pub fn optimize_exhaustive(g: &Graph, k: usize, scale: &PayoffScale, cap: u128) -> Result<Placement> {
    let v = g.node_count();
    if k > v {
        return Err(Error::Domain(format!("K = {k} exceeds V = {v}")));
    }
    let count = binomial(v, k);
    if count > cap {
        return Err(Error::TooManyCombinations { count, cap });
    }
    let evaluator = FieldEvaluator::new(g, scale)?;
    let mut combo: Vec<usize> = (0..k).collect();
    let mut mask = vec![false; v];
    let mut best: Option<Placement> = None;
    loop {
        mask.iter_mut().for_each(|m| *m = false);
        for &c in &combo {
            mask[c] = true;
        }
        let objective = evaluator.objective(&mask, &combo);
        if best.as_ref().is_none_or(|b| objective > b.objective + 1e-12) {
            best = Some(Placement { zd_set: combo.clone(), objective });
        }
        // Advance to the next combination in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| combo[i] < v - k + i) else { break };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one combination"))
}
