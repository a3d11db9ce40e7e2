//! Experiment harness: sweeps graph sizes, dimensions, similarity kinds and
//! constraint methods over seeded random graphs, writing one CSV row per
//! solve. Reruns with the same config are identical except for timings.

mod plots;

pub use plots::{emit_plots, PlotSummary};

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alm::{alm_solve, init_state, AlmOptions, AlmVariant};
use crate::eval::{evaluate_sample, EmbeddingResult};
use crate::graph::{generate_random_graph, Graph};
use crate::qubo::{
    build_qubo_alm, build_qubo_almq, build_qubo_penalty, default_penalty_mu, BuilderParams,
    QuboStats,
};
use crate::similarity::{build_similarity, SimilarityKind};
use crate::solver::{ExactSampler, ExternalSampler, SaParams, SaSampler, Sampler};
use crate::{Error, Result};

/// Constraint-handling scheme of one experiment row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Fixed penalty weight on every product fragment.
    #[serde(rename = "penalty")]
    Penalty,
    /// Inequality multipliers, updated between solves.
    #[serde(rename = "alm")]
    Alm,
    /// One equality multiplier per product, updated between solves.
    #[serde(rename = "almq")]
    Almq,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Penalty => "penalty",
            Method::Alm => "alm",
            Method::Almq => "almq",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "penalty" => Ok(Method::Penalty),
            "alm" => Ok(Method::Alm),
            "almq" => Ok(Method::Almq),
            other => Err(Error::InvalidParam(format!(
                "unknown method `{other}` (expected penalty, alm or almq)"
            ))),
        }
    }
}

/// Which sampler answers the compiled instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    /// In-process simulated annealing.
    #[serde(rename = "sa")]
    Sa,
    /// Exhaustive enumeration (small instances only).
    #[serde(rename = "exact")]
    Exact,
    /// File exchange with an out-of-process solver.
    #[serde(rename = "external")]
    External,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Sa => "sa",
            SolverKind::Exact => "exact",
            SolverKind::External => "external",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sa" => Ok(SolverKind::Sa),
            "exact" => Ok(SolverKind::Exact),
            "external" => Ok(SolverKind::External),
            other => Err(Error::InvalidParam(format!(
                "unknown solver `{other}` (expected sa, exact or external)"
            ))),
        }
    }
}

/// Full sweep description. Every field has a default, so a partial JSON
/// config (or `{}`) is a valid experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Graph sizes to sweep.
    pub node_counts: Vec<usize>,
    /// Embedding dimensions to sweep.
    pub dimensions: Vec<usize>,
    /// Similarity kinds to sweep.
    pub similarities: Vec<SimilarityKind>,
    /// Constraint methods to sweep.
    pub methods: Vec<Method>,
    pub solver: SolverKind,
    /// Independent random graphs per node count.
    pub graphs_per_cell: usize,
    /// Solver repetitions per graph and parameter combination.
    pub repeats: usize,
    /// Expected average degree of the random graphs.
    pub avg_degree: f64,
    pub num_reads: usize,
    pub num_sweeps: usize,
    /// Iteration budget of the multiplier methods.
    pub max_iters: usize,
    /// Penalty weight override. For the penalty method this replaces the
    /// per-dimension default; for the multiplier methods it is the initial
    /// weight (default 0.5).
    pub mu: Option<f64>,
    /// Penalty growth factor of the multiplier methods.
    pub rho: f64,
    /// Weight of the scored-pair objective.
    pub alpha: f64,
    /// Weight of the zero-pair overlap term.
    pub beta: f64,
    /// Root of all derived per-graph and per-cell seeds.
    pub master_seed: u64,
    /// Worker threads for row-level parallelism (1 = sequential).
    pub jobs: usize,
    /// Exchange directory, required by the external solver.
    pub exchange_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            node_counts: vec![10, 15, 20],
            dimensions: vec![2, 3, 4, 5],
            similarities: vec![
                SimilarityKind::Jac,
                SimilarityKind::Jac0,
                SimilarityKind::Adjcy,
            ],
            methods: vec![Method::Penalty],
            solver: SolverKind::Sa,
            graphs_per_cell: 5,
            repeats: 3,
            avg_degree: 4.0,
            num_reads: 1000,
            num_sweeps: 1000,
            max_iters: 50,
            mu: None,
            rho: 1.1,
            alpha: 1.0,
            beta: 1.0,
            master_seed: 0,
            jobs: 1,
            exchange_dir: None,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        for (name, list_empty) in [
            ("node_counts", self.node_counts.is_empty()),
            ("dimensions", self.dimensions.is_empty()),
            ("similarities", self.similarities.is_empty()),
            ("methods", self.methods.is_empty()),
        ] {
            if list_empty {
                return Err(Error::InvalidParam(format!("{name} must not be empty")));
            }
        }
        if self.graphs_per_cell == 0 || self.repeats == 0 {
            return Err(Error::InvalidParam(
                "graphs_per_cell and repeats must be >= 1".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidParam("jobs must be >= 1".into()));
        }
        if self.solver == SolverKind::External {
            if self.exchange_dir.is_none() {
                return Err(Error::InvalidParam(
                    "the external solver needs an exchange_dir".into(),
                ));
            }
            if self.jobs > 1 {
                return Err(Error::InvalidParam(
                    "the external solver shares one exchange directory; use jobs = 1".into(),
                ));
            }
        }
        Ok(())
    }

    fn builder_params(&self, k: usize) -> BuilderParams {
        BuilderParams {
            mu: self.mu.unwrap_or_else(|| default_penalty_mu(k)),
            alpha: self.alpha,
            beta: self.beta,
            weights: None,
        }
    }

    fn alm_options(&self) -> AlmOptions {
        AlmOptions {
            mu0: self.mu.unwrap_or(0.5),
            rho: self.rho,
            max_iters: self.max_iters,
            params: BuilderParams {
                mu: 0.0,
                alpha: self.alpha,
                beta: self.beta,
                weights: None,
            },
        }
    }
}

/// Collision-resistant seed derivation: hashes the master seed and a path of
/// labels, so distinct cells get independent seeds and reruns repeat them.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for part in parts {
        hasher.update(part.as_bytes());
        hasher.update([0xff]);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

fn graph_seed(master: u64, n: usize, graph_index: usize) -> u64 {
    derive_seed(master, &["graph", &n.to_string(), &graph_index.to_string()])
}

#[allow(clippy::too_many_arguments)]
fn cell_seed(
    master: u64,
    n: usize,
    k: usize,
    sim: SimilarityKind,
    method: Method,
    graph_index: usize,
    repeat: usize,
) -> u64 {
    derive_seed(
        master,
        &[
            "cell",
            &n.to_string(),
            &k.to_string(),
            &sim.to_string(),
            &method.to_string(),
            &graph_index.to_string(),
            &repeat.to_string(),
        ],
    )
}

/// One CSV row of a sweep. Numeric fields are empty when the row failed;
/// `error` then carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub graph_id: String,
    pub n: usize,
    pub k: usize,
    pub similarity: String,
    pub method: String,
    pub solver: String,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub best_energy: Option<f64>,
    pub violations: Option<usize>,
    pub mse_nonzero: Option<f64>,
    pub mse_all: Option<f64>,
    pub mae_all: Option<f64>,
    pub num_vars: Option<usize>,
    pub num_linear: Option<usize>,
    pub num_quadratic: Option<usize>,
    pub runtime_ms: Option<u64>,
    pub error: String,
}

/// Column names of the sweep CSV, in order.
pub const CSV_COLUMNS: [&str; 18] = [
    "graph_id",
    "n",
    "k",
    "similarity",
    "method",
    "solver",
    "seed",
    "iterations",
    "best_energy",
    "violations",
    "mse_nonzero",
    "mse_all",
    "mae_all",
    "num_vars",
    "num_linear",
    "num_quadratic",
    "runtime_ms",
    "error",
];

#[derive(Debug, Clone, Copy)]
struct Task {
    n: usize,
    graph_index: usize,
    k: usize,
    sim: SimilarityKind,
    method: Method,
    repeat: usize,
}

fn expand(config: &ExperimentConfig) -> Vec<Task> {
    let mut tasks = Vec::new();
    for &n in &config.node_counts {
        for graph_index in 0..config.graphs_per_cell {
            for &k in &config.dimensions {
                for &sim in &config.similarities {
                    for &method in &config.methods {
                        for repeat in 0..config.repeats {
                            tasks.push(Task {
                                n,
                                graph_index,
                                k,
                                sim,
                                method,
                                repeat,
                            });
                        }
                    }
                }
            }
        }
    }
    tasks
}

struct SolveOutcome {
    stats: QuboStats,
    iterations: usize,
    best_energy: f64,
    result: EmbeddingResult,
}

fn make_sampler(config: &ExperimentConfig, seed: u64) -> Result<Box<dyn Sampler>> {
    Ok(match config.solver {
        SolverKind::Sa => Box::new(SaSampler {
            params: SaParams {
                num_reads: config.num_reads,
                num_sweeps: config.num_sweeps,
                beta_range: None,
                seed,
            },
        }),
        SolverKind::Exact => Box::new(ExactSampler),
        SolverKind::External => {
            let dir = config.exchange_dir.as_ref().ok_or_else(|| {
                Error::InvalidParam("the external solver needs an exchange_dir".into())
            })?;
            Box::new(ExternalSampler::new(dir.clone()))
        }
    })
}

fn solve_task(
    config: &ExperimentConfig,
    graph: &Graph,
    task: &Task,
    seed: u64,
) -> Result<SolveOutcome> {
    let sim = build_similarity(graph, task.sim);
    let sampler = make_sampler(config, seed)?;
    match task.method {
        Method::Penalty => {
            let params = config.builder_params(task.k);
            let (q, idx) = build_qubo_penalty(&sim, task.k, &params)?;
            let stats = q.stats();
            let set = sampler.sample(&q, &idx)?;
            let best = set
                .best()
                .ok_or_else(|| Error::Malformed("sampler returned no samples".into()))?;
            let result = evaluate_sample(&best.bits, &idx, &sim, &params)?;
            Ok(SolveOutcome {
                stats,
                iterations: 1,
                best_energy: best.energy,
                result,
            })
        }
        Method::Alm | Method::Almq => {
            let variant = match task.method {
                Method::Alm => AlmVariant::Alm,
                _ => AlmVariant::Almq,
            };
            let opts = config.alm_options();
            // Size statistics come from the instance the loop starts with.
            let state = init_state(&sim, task.k, variant, opts.mu0, opts.rho)?;
            let (q, _) = match variant {
                AlmVariant::Alm => build_qubo_alm(&sim, task.k, &state, &opts.params)?,
                AlmVariant::Almq => build_qubo_almq(&sim, task.k, &state, &opts.params)?,
            };
            let stats = q.stats();
            let (result, history) = alm_solve(&sim, task.k, variant, sampler.as_ref(), &opts)?;
            let best_energy = history
                .iter()
                .map(|h| h.energy)
                .fold(f64::INFINITY, f64::min);
            Ok(SolveOutcome {
                stats,
                iterations: history.len(),
                best_energy,
                result,
            })
        }
    }
}

fn run_task(config: &ExperimentConfig, task: &Task) -> ExperimentRow {
    let seed = cell_seed(
        config.master_seed,
        task.n,
        task.k,
        task.sim,
        task.method,
        task.graph_index,
        task.repeat,
    );
    let mut row = ExperimentRow {
        graph_id: format!("n{}-g{}", task.n, task.graph_index),
        n: task.n,
        k: task.k,
        similarity: task.sim.to_string(),
        method: task.method.to_string(),
        solver: config.solver.to_string(),
        seed,
        iterations: None,
        best_energy: None,
        violations: None,
        mse_nonzero: None,
        mse_all: None,
        mae_all: None,
        num_vars: None,
        num_linear: None,
        num_quadratic: None,
        runtime_ms: None,
        error: String::new(),
    };
    let start = Instant::now();
    let outcome = generate_random_graph(
        task.n,
        config.avg_degree,
        graph_seed(config.master_seed, task.n, task.graph_index),
    )
    .and_then(|graph| solve_task(config, &graph, task, seed));
    match outcome {
        Ok(outcome) => {
            row.iterations = Some(outcome.iterations);
            row.best_energy = Some(outcome.best_energy);
            row.violations = Some(outcome.result.violations);
            row.mse_nonzero = Some(outcome.result.metrics.mse_nonzero);
            row.mse_all = Some(outcome.result.metrics.mse_all);
            row.mae_all = Some(outcome.result.metrics.mae_all);
            row.num_vars = Some(outcome.stats.num_vars);
            row.num_linear = Some(outcome.stats.num_linear);
            row.num_quadratic = Some(outcome.stats.num_quadratic);
            row.runtime_ms = Some(start.elapsed().as_millis() as u64);
        }
        Err(e) => {
            row.runtime_ms = Some(start.elapsed().as_millis() as u64);
            row.error = e.to_string();
        }
    }
    row
}

/// What a sweep did: rows written and how many of them failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentSummary {
    pub rows: usize,
    pub failed: usize,
}

/// Runs the full sweep, streaming rows to `csv_path` in a fixed order.
///
/// With `jobs > 1`, rows are solved in parallel chunks but still written in
/// the same order, so reruns differ only in `runtime_ms`.
pub fn run_experiment(config: &ExperimentConfig, csv_path: &Path) -> Result<ExperimentSummary> {
    config.validate()?;
    let tasks = expand(config);
    let file = File::create(csv_path)?;
    let mut writer = csv::Writer::from_writer(file);
    let mut summary = ExperimentSummary { rows: 0, failed: 0 };
    let mut record = |writer: &mut csv::Writer<File>, row: ExperimentRow| -> Result<()> {
        summary.rows += 1;
        if !row.error.is_empty() {
            summary.failed += 1;
            log::warn!("row {} failed: {}", row.graph_id, row.error);
        }
        writer.serialize(row)?;
        Ok(())
    };
    if config.jobs == 1 {
        for task in &tasks {
            let row = run_task(config, task);
            record(&mut writer, row)?;
            writer.flush()?;
        }
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| {
                Error::InvalidParam(format!("cannot start {} workers: {e}", config.jobs))
            })?;
        for chunk in tasks.chunks(config.jobs) {
            let rows: Vec<ExperimentRow> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|task| run_task(config, task))
                    .collect()
            });
            for row in rows {
                record(&mut writer, row)?;
            }
            writer.flush()?;
        }
    }
    writer.flush()?;
    Ok(summary)
}
