//! Error type shared across the library.

use std::time::Duration;
use thiserror::Error;

/// Errors produced by graph I/O, builders, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid graph (bad node count, edge range, self-loop, ...).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Text parse failure in an edge-list graph file; `line` is 1-based.
    #[error("graph parse error at line {line}: {msg}")]
    GraphParse { line: usize, msg: String },

    /// Node id outside `0..n`.
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    /// Rejected parameter value (non-finite, out of domain, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Malformed structured file (QUBO, samples, similarity, embedding, config).
    #[error("malformed file: {0}")]
    Malformed(String),

    /// A QUBO file carried the same coefficient key twice.
    #[error("duplicate key in QUBO file: {0}")]
    DuplicateKey(String),

    /// Exhaustive enumeration refused because the instance is too large.
    #[error("{what} is limited to {limit} variables, got {got}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// An assignment's bit count does not match the QUBO it is paired with.
    #[error("sample has {got} bits but the QUBO has {expected} variables")]
    SampleShape { expected: usize, got: usize },

    /// Multiplier state or indexer does not match the similarity map / dimension.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// No samples file appeared in the exchange directory in time.
    #[error("timed out after {0:?} waiting for a samples file")]
    ExternalTimeout(Duration),

    /// A results CSV is missing a required column.
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
