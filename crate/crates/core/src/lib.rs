//! Binary node embeddings of graphs, computed by compiling a quadratic
//! embedding objective into QUBO instances and solving them with pluggable
//! annealing samplers.
//!
//! The pipeline is [`graph`] → [`similarity`] → [`qubo`] → [`solver`] →
//! [`eval`]. Products of binary variables are linearised through auxiliary
//! variables whose consistency is enforced either by a fixed penalty or by
//! an augmented-Lagrangian loop ([`alm`]). The [`harness`] module runs
//! parameter sweeps over graphs, dimensions, similarity kinds and
//! constraint-handling methods, writing deterministic CSV results and
//! plot scripts.

pub mod alm;
pub mod error;
pub mod eval;
pub mod graph;
pub mod harness;
pub mod qubo;
pub mod similarity;
pub mod solver;

pub use alm::{AlmIteration, AlmOptions, AlmVariant, ConstraintValues, LagrangeState};
pub use error::Error;
pub use eval::{Embedding, EmbeddingResult, ErrorMetrics};
pub use graph::{Graph, GraphFormat};
pub use harness::{ExperimentConfig, ExperimentRow, Method, PlotSummary, SolverKind};
pub use qubo::{BuilderParams, Qubo, QuboStats, VarIndexer};
pub use similarity::{SimilarityKind, SimilarityMap};
pub use solver::{Sample, SampleSet, Sampler, SolverMeta};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
