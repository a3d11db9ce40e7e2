//! Shared fixtures for the pipeline benchmarks.

use binembed::graph::{generate_random_graph, Graph};
use binembed::qubo::{build_qubo_penalty, default_penalty_mu, BuilderParams, Qubo, VarIndexer};
use binembed::similarity::{build_similarity, SimilarityKind, SimilarityMap};

/// The benchmark workload: a fixed random graph of the given density.
pub fn graph(n: usize, avg_degree: f64) -> Graph {
    generate_random_graph(n, avg_degree, 17).expect("benchmark graph generates")
}

pub fn scores(g: &Graph, kind: SimilarityKind) -> SimilarityMap {
    build_similarity(g, kind)
}

pub fn params(k: usize) -> BuilderParams {
    BuilderParams {
        mu: default_penalty_mu(k),
        alpha: 1.0,
        beta: 1.0,
        weights: None,
    }
}

/// A compiled penalty instance for the given sizes.
pub fn instance(n: usize, avg_degree: f64, k: usize, kind: SimilarityKind) -> (Qubo, VarIndexer) {
    let g = graph(n, avg_degree);
    let sim = scores(&g, kind);
    build_qubo_penalty(&sim, k, &params(k)).expect("benchmark instance compiles")
}
