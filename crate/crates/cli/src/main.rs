//! Command-line front end: generate graphs, score node pairs, compile and
//! solve QUBO instances, embed single graphs, and drive batch sweeps.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use binembed::alm::{alm_solve, init_state, AlmOptions, AlmVariant};
use binembed::eval::evaluate_sample;
use binembed::graph::{generate_random_graph, read_graph, write_graph, Graph, GraphFormat};
use binembed::harness::{emit_plots, run_experiment, ExperimentConfig, Method, SolverKind};
use binembed::qubo::{
    build_qubo_alm, build_qubo_almq, build_qubo_penalty, default_penalty_mu, export_qubo,
    import_qubo, BuilderParams, Qubo, VarIndexer,
};
use binembed::similarity::{build_similarity, SimilarityKind};
use binembed::solver::{
    write_samples_file, ExactSampler, ExternalSampler, SaParams, SaSampler, SampleSet, Sampler,
};

#[derive(Parser)]
#[command(
    name = "binembed",
    version,
    about = "Binary node embeddings via QUBO annealing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph and write it to a file or standard output.
    Gen(GenArgs),
    /// Compute pairwise similarity scores for a graph.
    Sim(SimArgs),
    /// Compile one embedding instance to a QUBO file.
    Build(BuildArgs),
    /// Solve a QUBO file with the chosen solver.
    Solve(SolveArgs),
    /// Run the full pipeline on one graph: score, compile, solve, decode.
    Embed(EmbedArgs),
    /// Run a batch experiment sweep to a CSV file.
    Sweep(SweepArgs),
    /// Turn a sweep CSV into plot data files and a gnuplot script.
    Plot(PlotArgs),
}

/// Where a graph comes from: a file, or the random generator.
#[derive(Args)]
struct GraphSource {
    /// Graph file (edge list or structured JSON); omit to generate.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Node count for the generated graph.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Average node degree for the generated graph.
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    /// Seed for the generated graph.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphSource {
    fn load(&self) -> Result<Graph> {
        match &self.input {
            Some(path) => {
                let content = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(read_graph(&content)?)
            }
            None => Ok(generate_random_graph(self.n, self.avg_degree, self.seed)?),
        }
    }
}

/// Objective weighting shared by every compiling subcommand.
#[derive(Args)]
struct ObjectiveArgs {
    /// Weight of the scored-pair objective.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Weight of the zero-pair overlap term.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

impl ObjectiveArgs {
    fn params(&self, mu: f64) -> BuilderParams {
        BuilderParams {
            mu,
            alpha: self.alpha,
            beta: self.beta,
            weights: None,
        }
    }
}

/// Solver choice plus its tuning knobs; the seed comes from the
/// subcommand's single `--seed` flag.
#[derive(Args)]
struct SolverArgs {
    /// Solver backend.
    #[arg(long, default_value = "sa")]
    solver: SolverKind,
    /// Annealing restarts.
    #[arg(long, default_value_t = 1000)]
    num_reads: usize,
    /// Annealing sweeps per read.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Exchange directory for the external solver.
    #[arg(long, required_if_eq("solver", "external"), value_name = "DIR")]
    exchange_dir: Option<PathBuf>,
}

impl SolverArgs {
    fn sampler(&self, seed: u64) -> Box<dyn Sampler> {
        match self.solver {
            SolverKind::Sa => Box::new(SaSampler {
                params: SaParams {
                    num_reads: self.num_reads,
                    num_sweeps: self.sweeps,
                    beta_range: None,
                    seed,
                },
            }),
            SolverKind::Exact => Box::new(ExactSampler),
            SolverKind::External => Box::new(ExternalSampler::new(
                self.exchange_dir
                    .clone()
                    .expect("clap enforces --exchange-dir"),
            )),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Node count.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Average node degree.
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, value_parser = ["edge-list", "structured"], default_value = "edge-list")]
    format: String,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    graph: GraphSource,
    /// Similarity kind.
    #[arg(long, default_value = "jac")]
    similarity: SimilarityKind,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphSource,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Similarity kind.
    #[arg(long, default_value = "jac")]
    similarity: SimilarityKind,
    /// Constraint handling for the compiled instance.
    #[arg(long, default_value = "penalty")]
    method: Method,
    /// Penalty weight (penalty method) or initial weight (multiplier methods);
    /// defaults to the dimension-dependent sufficient value or 0.5.
    #[arg(long)]
    mu: Option<f64>,
    /// Weight growth factor for multiplier methods.
    #[arg(long, default_value_t = 1.1)]
    rho: f64,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// QUBO file to solve.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Solver seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full sample set here as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphSource,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Similarity kind.
    #[arg(long, default_value = "jac")]
    similarity: SimilarityKind,
    /// Constraint handling.
    #[arg(long, default_value = "penalty")]
    method: Method,
    /// Penalty weight or initial multiplier-method weight.
    #[arg(long)]
    mu: Option<f64>,
    /// Weight growth factor for multiplier methods.
    #[arg(long, default_value_t = 1.1)]
    rho: f64,
    /// Iteration cap for multiplier methods.
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the embedding here as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config mirroring the sweep configuration; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Node counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Embedding dimensions.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Similarity kinds.
    #[arg(long, value_delimiter = ',')]
    similarity: Option<Vec<SimilarityKind>>,
    /// Constraint-handling methods.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    /// Solver backend.
    #[arg(long)]
    solver: Option<SolverKind>,
    /// Random graphs per cell.
    #[arg(long)]
    graphs: Option<usize>,
    /// Repeats per graph.
    #[arg(long)]
    repeats: Option<usize>,
    /// Average node degree.
    #[arg(long)]
    avg_degree: Option<f64>,
    /// Annealing restarts.
    #[arg(long)]
    num_reads: Option<usize>,
    /// Annealing sweeps per read.
    #[arg(long)]
    sweeps: Option<usize>,
    /// Iteration cap for multiplier methods.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Penalty weight or initial multiplier-method weight.
    #[arg(long)]
    mu: Option<f64>,
    /// Weight growth factor for multiplier methods.
    #[arg(long)]
    rho: Option<f64>,
    /// Weight of the scored-pair objective.
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight of the zero-pair overlap term.
    #[arg(long)]
    beta: Option<f64>,
    /// Master seed for the whole sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// Exchange directory for the external solver.
    #[arg(long, value_name = "DIR")]
    exchange_dir: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep CSV to aggregate.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Directory for data files and the plot script.
    #[arg(long, default_value = "plots")]
    out_dir: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Sim(args) => sim(args),
        Command::Build(args) => build(args),
        Command::Solve(args) => solve(args),
        Command::Embed(args) => embed(args),
        Command::Sweep(args) => sweep(args),
        Command::Plot(args) => plot(args),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let g = generate_random_graph(args.n, args.avg_degree, args.seed)?;
    let format = match args.format.as_str() {
        "structured" => GraphFormat::Structured,
        _ => GraphFormat::EdgeList,
    };
    emit(&args.out, &write_graph(&g, format)?)
}

fn sim(args: SimArgs) -> Result<()> {
    let g = args.graph.load()?;
    let map = build_similarity(&g, args.similarity);
    emit(&args.out, &map.to_json())
}

/// Compiles one instance; multiplier methods compile at fresh multipliers.
fn compile(
    sim: &binembed::SimilarityMap,
    k: usize,
    method: Method,
    mu: Option<f64>,
    rho: f64,
    objective: &ObjectiveArgs,
) -> Result<(Qubo, VarIndexer)> {
    let built = match method {
        Method::Penalty => {
            let params = objective.params(mu.unwrap_or_else(|| default_penalty_mu(k)));
            build_qubo_penalty(sim, k, &params)?
        }
        Method::Alm => {
            let state = init_state(sim, k, AlmVariant::Alm, mu.unwrap_or(0.5), rho)?;
            build_qubo_alm(sim, k, &state, &objective.params(0.0))?
        }
        Method::Almq => {
            let state = init_state(sim, k, AlmVariant::Almq, mu.unwrap_or(0.5), rho)?;
            build_qubo_almq(sim, k, &state, &objective.params(0.0))?
        }
    };
    Ok(built)
}

fn build(args: BuildArgs) -> Result<()> {
    let g = args.graph.load()?;
    let map = build_similarity(&g, args.similarity);
    let (q, idx) = compile(
        &map,
        args.k,
        args.method,
        args.mu,
        args.rho,
        &args.objective,
    )?;
    let mut buf = Vec::new();
    export_qubo(&q, &idx, &mut buf)?;
    emit(
        &args.out,
        std::str::from_utf8(&buf).expect("exports are utf-8"),
    )
}

fn report_best(set: &SampleSet) -> Result<()> {
    let best = match set.best() {
        Some(best) => best,
        None => bail!("solver returned no samples"),
    };
    let bits: String = best
        .bits
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    println!(
        "best_energy={} occurrences={} samples={} bits={}",
        best.energy,
        best.occurrences,
        set.len(),
        bits
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let content =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (q, idx) = import_qubo(content.as_slice())?;
    let set = args.solver.sampler(args.seed).sample(&q, &idx)?;
    report_best(&set)?;
    if let Some(path) = &args.out {
        write_samples_file(&set, q.num_vars(), path)?;
    }
    Ok(())
}

fn embed(args: EmbedArgs) -> Result<()> {
    let g = args.graph.load()?;
    let map = build_similarity(&g, args.similarity);
    let sampler = args.solver.sampler(args.graph.seed);
    let (result, iterations) = match args.method {
        Method::Penalty => {
            let params = args
                .objective
                .params(args.mu.unwrap_or_else(|| default_penalty_mu(args.k)));
            let (q, idx) = build_qubo_penalty(&map, args.k, &params)?;
            let set = sampler.sample(&q, &idx)?;
            let best = match set.best() {
                Some(best) => best,
                None => bail!("solver returned no samples"),
            };
            (evaluate_sample(&best.bits, &idx, &map, &params)?, 1)
        }
        Method::Alm | Method::Almq => {
            let variant = match args.method {
                Method::Alm => AlmVariant::Alm,
                _ => AlmVariant::Almq,
            };
            let opts = AlmOptions {
                mu0: args.mu.unwrap_or(0.5),
                rho: args.rho,
                max_iters: args.max_iters,
                params: args.objective.params(0.0),
            };
            let (result, history) = alm_solve(&map, args.k, variant, sampler.as_ref(), &opts)?;
            (result, history.len())
        }
    };
    let metrics = &result.metrics;
    println!(
        "n={} k={} similarity={} method={} iterations={} feasible={} violations={} \
         objective={} zero_error={} mse_nonzero={} mse_all={} mae_all={}",
        g.n(),
        args.k,
        args.similarity,
        args.method,
        iterations,
        result.feasible,
        result.violations,
        result.objective,
        result.zero_error,
        metrics.mse_nonzero,
        metrics.mse_all,
        metrics.mae_all,
    );
    if let Some(path) = &args.out {
        fs::write(path, result.embedding.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let content =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&content)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    macro_rules! override_field {
        ($flag:expr, $field:ident) => {
            if let Some(value) = $flag {
                config.$field = value;
            }
        };
    }
    override_field!(args.n, node_counts);
    override_field!(args.k, dimensions);
    override_field!(args.similarity, similarities);
    override_field!(args.method, methods);
    override_field!(args.solver, solver);
    override_field!(args.graphs, graphs_per_cell);
    override_field!(args.repeats, repeats);
    override_field!(args.avg_degree, avg_degree);
    override_field!(args.num_reads, num_reads);
    override_field!(args.sweeps, num_sweeps);
    override_field!(args.max_iters, max_iters);
    override_field!(args.rho, rho);
    override_field!(args.alpha, alpha);
    override_field!(args.beta, beta);
    override_field!(args.seed, master_seed);
    override_field!(args.jobs, jobs);
    if args.mu.is_some() {
        config.mu = args.mu;
    }
    if args.exchange_dir.is_some() {
        config.exchange_dir = args.exchange_dir.clone();
    }
    let summary = run_experiment(&config, &args.out)?;
    println!(
        "wrote {} rows ({} failed) to {}",
        summary.rows,
        summary.failed,
        args.out.display()
    );
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let summary = emit_plots(&args.input, &args.out_dir)?;
    let files: Vec<String> = summary
        .files
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    println!(
        "aggregated {} rows ({} skipped) into {} groups; wrote {}",
        summary.rows,
        summary.skipped,
        summary.groups,
        files.join(", ")
    );
    Ok(())
}
