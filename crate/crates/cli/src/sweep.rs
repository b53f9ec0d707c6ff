use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use zdlab::deploy::{optimize_exhaustive, optimize_ga, Placement};
use zdlab::field::{cooperator_ratio, evaluate, Deployment, RatioMode};
use zdlab::network::{betweenness, Graph};

use crate::config::{ExperimentConfig, Optimizer};
use crate::CliError;

pub const CSV_VERSION_LINE: &str = "# zdlab-v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub network: String,
    pub k: usize,
    pub repetition: usize,
    pub seed: u64,
    pub objective: f64,
    pub mean_regular_coop: f64,
    pub expected_ratio: f64,
    pub monte_carlo_ratio: Option<f64>,
    /// ZD node ids joined with `;`.
    pub zd_set: String,
    pub zd_mean_degree: f64,
    pub zd_mean_betweenness: f64,
    pub wall_ms: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub network: String,
    pub k: usize,
    pub repetitions: usize,
    pub objective_mean: f64,
    pub objective_std: f64,
    pub mean_regular_coop_mean: f64,
    pub mean_regular_coop_std: f64,
    pub expected_ratio_mean: f64,
    pub expected_ratio_std: f64,
    pub monte_carlo_ratio_mean: Option<f64>,
    pub monte_carlo_ratio_std: Option<f64>,
    pub zd_mean_degree_mean: f64,
    pub zd_mean_betweenness_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

impl SweepTable {
    /// Summary row for `k`, if it was swept.
    pub fn at(&self, k: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.k == k)
    }
}

struct PreparedGraph {
    graph: Graph,
    betweenness: Vec<f64>,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable, CliError> {
    let graphs = cfg.graphs()?;
    for g in &graphs {
        cfg.validate(g.node_count())?;
    }
    let prepared: Vec<PreparedGraph> = graphs
        .into_par_iter()
        .map(|graph| {
            let betweenness = betweenness(&graph);
            PreparedGraph { graph, betweenness }
        })
        .collect();
    let network = cfg.network_label();
    let jobs: Vec<(usize, usize)> = cfg
        .k_range
        .values()
        .flat_map(|k| (0..cfg.repetitions).map(move |rep| (k, rep)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, rep)| run_one(cfg, &prepared[rep % prepared.len()], &network, k, rep))
        .collect::<Result<Vec<_>, CliError>>()?;
    let summary = summarize(&rows);
    Ok(SweepTable { rows, summary })
}

fn run_one(cfg: &ExperimentConfig, prepared: &PreparedGraph, network: &str, k: usize, rep: usize) -> Result<SweepRow, CliError> {
    let started = Instant::now();
    let seed = cfg.seed.wrapping_add(rep as u64);
    let g = &prepared.graph;
    let Placement { zd_set, objective } = match cfg.optimizer {
        Optimizer::Ga => optimize_ga(g, k, &cfg.scale, &cfg.ga.clone().with_seed(seed))?.best,
        Optimizer::Exhaustive => optimize_exhaustive(g, k, &cfg.scale, cfg.exhaustive_cap())?,
    };
    let dep = Deployment::new(g, &zd_set, cfg.scale)?;
    let field = evaluate(&dep);
    let expected_ratio = cooperator_ratio(&dep, RatioMode::Expected, seed)?;
    let monte_carlo_ratio = cfg.ratio.monte_carlo().map(|mode| cooperator_ratio(&dep, mode, seed)).transpose()?;
    let zd_mean_degree = mean(zd_set.iter().map(|&z| g.degree(z) as f64));
    let zd_mean_betweenness = mean(zd_set.iter().map(|&z| prepared.betweenness[z]));
    Ok(SweepRow {
        network: network.to_string(),
        k,
        repetition: rep,
        seed,
        objective,
        mean_regular_coop: field.mean_regular,
        expected_ratio,
        monte_carlo_ratio,
        zd_set: zd_set.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(";"),
        zd_mean_degree,
        zd_mean_betweenness,
        wall_ms: cfg.record_timing.then(|| started.elapsed().as_millis()),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = mean(values.iter().copied());
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}

fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.k == k).collect();
            let col = |f: fn(&SweepRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (objective_mean, objective_std) = col(|r| r.objective);
            let (mean_regular_coop_mean, mean_regular_coop_std) = col(|r| r.mean_regular_coop);
            let (expected_ratio_mean, expected_ratio_std) = col(|r| r.expected_ratio);
            let mc: Option<Vec<f64>> = group.iter().map(|r| r.monte_carlo_ratio).collect();
            let mc = mc.map(|v| mean_std(&v));
            SummaryRow {
                network: group[0].network.clone(),
                k,
                repetitions: group.len(),
                objective_mean,
                objective_std,
                mean_regular_coop_mean,
                mean_regular_coop_std,
                expected_ratio_mean,
                expected_ratio_std,
                monte_carlo_ratio_mean: mc.map(|m| m.0),
                monte_carlo_ratio_std: mc.map(|m| m.1),
                zd_mean_degree_mean: col(|r| r.zd_mean_degree).0,
                zd_mean_betweenness_mean: col(|r| r.zd_mean_betweenness).0,
            }
        })
        .collect()
}

/// Write rows as CSV, preceded by the schema version line.
pub fn write_csv<W: Write, T: Serialize>(rows: &[T], mut out: W) -> Result<(), CliError> {
    writeln!(out, "{CSV_VERSION_LINE}").map_err(CliError::io)?;
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
    }
    writer.flush().map_err(CliError::io)?;
    Ok(())
}

/// `runs.csv` becomes `runs_summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_summary.csv"))
}

pub fn write_outputs(table: &SweepTable, path: &Path) -> Result<PathBuf, CliError> {
    let create = |p: &Path| std::fs::File::create(p).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())));
    write_csv(&table.rows, std::io::BufWriter::new(create(path)?))?;
    let summary = summary_path(path);
    write_csv(&table.summary, std::io::BufWriter::new(create(&summary)?))?;
    Ok(summary)
}
