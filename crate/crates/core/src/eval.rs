//! Decoding solver samples into embeddings and measuring their error.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::qubo::{BuilderParams, VarIndexer};
use crate::similarity::SimilarityMap;
use crate::{Error, Result};

/// Binary node vectors: node `v`'s coordinates are `bits[v·k .. (v+1)·k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    k: usize,
    bits: Vec<bool>,
}

impl Embedding {
    pub fn new(k: usize, bits: Vec<bool>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParam(
                "embedding dimension must be >= 1".into(),
            ));
        }
        if bits.len() % k != 0 || bits.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} bits do not form whole {k}-dimensional vectors",
                bits.len()
            )));
        }
        Ok(Self { k, bits })
    }

    pub fn n(&self) -> usize {
        self.bits.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bit(&self, node: usize, dim: usize) -> bool {
        self.bits[node * self.k + dim]
    }

    /// One node's coordinate vector.
    pub fn vector(&self, node: usize) -> &[bool] {
        &self.bits[node * self.k..(node + 1) * self.k]
    }

    /// Inner product of two node vectors.
    pub fn dot(&self, x: usize, y: usize) -> usize {
        (0..self.k)
            .filter(|&i| self.bit(x, i) && self.bit(y, i))
            .count()
    }

    pub fn to_json(&self) -> String {
        let vectors: BTreeMap<String, String> = (0..self.n())
            .map(|v| {
                let word: String = self
                    .vector(v)
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                (v.to_string(), word)
            })
            .collect();
        let file = EmbeddingFile { k: self.k, vectors };
        let mut text = serde_json::to_string_pretty(&file).expect("embedding serializes");
        text.push('\n');
        text
    }

    pub fn from_json(content: &str) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_str(content)?;
        if file.k == 0 {
            return Err(Error::Malformed("embedding dimension must be >= 1".into()));
        }
        let n = file.vectors.len();
        if n == 0 {
            return Err(Error::Malformed("embedding has no vectors".into()));
        }
        let mut bits = vec![false; n * file.k];
        for (key, word) in &file.vectors {
            let node: usize = key
                .parse()
                .map_err(|_| Error::Malformed(format!("embedding key `{key}` is not a node id")))?;
            if node >= n {
                return Err(Error::Malformed(format!(
                    "embedding keys are not contiguous: `{key}` with {n} vectors"
                )));
            }
            if word.len() != file.k {
                return Err(Error::Malformed(format!(
                    "vector for node {node} has {} bits, expected {}",
                    word.len(),
                    file.k
                )));
            }
            for (i, c) in word.chars().enumerate() {
                bits[node * file.k + i] = match c {
                    '0' => false,
                    '1' => true,
                    other => {
                        return Err(Error::Malformed(format!(
                            "bit character `{other}` in vector for node {node}"
                        )))
                    }
                };
            }
        }
        Embedding::new(file.k, bits)
    }
}

/// On-disk form of an [`Embedding`]: `{"k": 2, "vectors": {"0": "10", ...}}`.
#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    k: usize,
    vectors: BTreeMap<String, String>,
}

/// Splits a full variable assignment into the embedding bits and the number
/// of auxiliary variables that disagree with their bit product.
pub fn decode(bits: &[bool], idx: &VarIndexer) -> Result<(Embedding, usize)> {
    if bits.len() != idx.num_vars() {
        return Err(Error::SampleShape {
            expected: idx.num_vars(),
            got: bits.len(),
        });
    }
    let embedding = Embedding::new(idx.k(), bits[..idx.num_embedding_vars()].to_vec())?;
    let mut violations = 0;
    for (pos, &(x, y)) in idx.pairs().iter().enumerate() {
        for dim in 0..idx.k() {
            let product = bits[idx.embedding_var(x, dim)] && bits[idx.embedding_var(y, dim)];
            if bits[idx.aux_var(pos, dim)] != product {
                violations += 1;
            }
        }
    }
    Ok((embedding, violations))
}

/// Unweighted residual statistics of an embedding against a similarity map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Mean squared residual over the scored pairs.
    pub mse_nonzero: f64,
    /// Mean squared residual over scored and zero-pinned pairs together.
    pub mse_all: f64,
    /// Mean absolute residual over scored and zero-pinned pairs together.
    pub mae_all: f64,
}

/// A decoded sample with its consistency and error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub embedding: Embedding,
    /// Auxiliary variables that disagree with their bit product.
    pub violations: usize,
    pub feasible: bool,
    /// Weighted squared residual over the scored pairs.
    pub objective: f64,
    /// Scaled overlap of the zero-pinned pairs.
    pub zero_error: f64,
    pub metrics: ErrorMetrics,
}

impl EmbeddingResult {
    /// The value the compiled instances minimize over consistent assignments.
    pub fn combined_objective(&self, params: &BuilderParams) -> f64 {
        params.alpha * self.objective + params.beta * self.zero_error
    }
}

fn check_embedding(embedding: &Embedding, sim: &SimilarityMap) -> Result<()> {
    if embedding.n() != sim.n() {
        return Err(Error::ShapeMismatch(format!(
            "embedding covers {} nodes, similarity map has {}",
            embedding.n(),
            sim.n()
        )));
    }
    Ok(())
}

/// Weighted objective, zero-pair overlap, and residual statistics of an
/// embedding against a similarity map.
pub fn embedding_error(
    embedding: &Embedding,
    sim: &SimilarityMap,
    params: &BuilderParams,
) -> Result<(f64, f64, ErrorMetrics)> {
    params.validate()?;
    check_embedding(embedding, sim)?;
    let kf = embedding.k() as f64;
    let mut objective = 0.0;
    let mut zero_overlap = 0.0;
    let mut sq_nonzero = 0.0;
    let mut sq_all = 0.0;
    let mut abs_all = 0.0;
    for (&(x, y), &s) in sim.nonzero() {
        let r = embedding.dot(x, y) as f64 / kf - s;
        objective += params.weight(x, y) * r * r;
        sq_nonzero += r * r;
        sq_all += r * r;
        abs_all += r.abs();
    }
    for &(x, y) in sim.zero_pairs() {
        let r = embedding.dot(x, y) as f64 / kf;
        zero_overlap += r;
        sq_all += r * r;
        abs_all += r.abs();
    }
    let nonzero = sim.nonzero().len();
    let all = nonzero + sim.zero_pairs().len();
    let metrics = ErrorMetrics {
        mse_nonzero: if nonzero > 0 {
            sq_nonzero / nonzero as f64
        } else {
            0.0
        },
        mse_all: if all > 0 { sq_all / all as f64 } else { 0.0 },
        mae_all: if all > 0 { abs_all / all as f64 } else { 0.0 },
    };
    Ok((objective, zero_overlap, metrics))
}

/// Decodes a full solver assignment and scores the embedding half.
pub fn evaluate_sample(
    bits: &[bool],
    idx: &VarIndexer,
    sim: &SimilarityMap,
    params: &BuilderParams,
) -> Result<EmbeddingResult> {
    let (embedding, violations) = decode(bits, idx)?;
    let (objective, zero_error, metrics) = embedding_error(&embedding, sim, params)?;
    Ok(EmbeddingResult {
        embedding,
        violations,
        feasible: violations == 0,
        objective,
        zero_error,
        metrics,
    })
}

/// Largest `n·k` accepted by [`brute_force_embedding`].
pub const BRUTE_FORCE_BIT_LIMIT: usize = 24;

/// Exhaustive minimizer of the weighted embedding objective, optionally
/// including the zero-pair overlap term. Ties break toward the smallest
/// encoded assignment, so the result is deterministic.
pub fn brute_force_embedding(
    sim: &SimilarityMap,
    k: usize,
    include_zeros: bool,
    params: &BuilderParams,
) -> Result<(Embedding, f64)> {
    params.validate()?;
    if k == 0 {
        return Err(Error::InvalidParam(
            "embedding dimension must be >= 1".into(),
        ));
    }
    let bits = sim.n() * k;
    if bits > BRUTE_FORCE_BIT_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force embedding bits",
            limit: BRUTE_FORCE_BIT_LIMIT,
            got: bits,
        });
    }
    let kf = k as f64;
    let mask = (1u32 << k) - 1;
    let vector = |state: u32, node: usize| (state >> (node * k)) & mask;
    let mut best_state = 0u32;
    let mut best_value = f64::INFINITY;
    for state in 0..1u32 << bits {
        let mut value = 0.0;
        for (&(x, y), &s) in sim.nonzero() {
            let dot = (vector(state, x) & vector(state, y)).count_ones() as f64;
            let r = dot / kf - s;
            value += params.alpha * params.weight(x, y) * r * r;
        }
        if include_zeros {
            for &(x, y) in sim.zero_pairs() {
                let dot = (vector(state, x) & vector(state, y)).count_ones() as f64;
                value += params.beta * dot / kf;
            }
        }
        if value < best_value {
            best_value = value;
            best_state = state;
        }
    }
    let bits: Vec<bool> = (0..bits).map(|i| best_state >> i & 1 == 1).collect();
    Ok((Embedding::new(k, bits)?, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::qubo::build_qubo_penalty;
    use crate::similarity::{build_similarity, SimilarityKind};

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn unit_params() -> BuilderParams {
        BuilderParams {
            mu: 0.0,
            alpha: 1.0,
            beta: 1.0,
            weights: None,
        }
    }

    #[test]
    fn decode_counts_disagreeing_auxiliaries() {
        let sim = build_similarity(&path(3), SimilarityKind::Jac);
        let (_, idx) = build_qubo_penalty(&sim, 2, &BuilderParams::for_dimension(2)).unwrap();
        let mut bits = vec![true; idx.num_vars()];
        let (embedding, violations) = decode(&bits, &idx).unwrap();
        assert_eq!(violations, 0);
        assert_eq!(embedding.n(), 3);
        assert_eq!(embedding.k(), 2);
        assert!(embedding.bit(2, 1));
        bits[idx.aux_var(1, 0)] = false;
        let (_, violations) = decode(&bits, &idx).unwrap();
        assert_eq!(violations, 1);
        assert!(decode(&bits[1..], &idx).is_err());
    }

    #[test]
    fn all_ones_path_embedding_has_known_mean_squared_error() {
        let sim = build_similarity(&path(3), SimilarityKind::Jac);
        let embedding = Embedding::new(1, vec![true; 3]).unwrap();
        let (objective, zero, metrics) = embedding_error(&embedding, &sim, &unit_params()).unwrap();
        assert!((metrics.mse_nonzero - 2.0 / 9.0).abs() < 1e-12);
        assert_eq!(zero, 0.0);
        assert!((objective - 3.0 * metrics.mse_nonzero).abs() < 1e-12);
        // No zero pairs: the "all" statistics cover the same three pairs.
        assert_eq!(metrics.mse_all, metrics.mse_nonzero);
        assert!((metrics.mae_all - (1.0 / 3.0 + 2.0 / 3.0 + 1.0 / 3.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_pairs_enter_overlap_and_all_pair_statistics() {
        // Path on 4 nodes: the end pair (0, 3) shares no closed neighborhood.
        let sim = build_similarity(&path(4), SimilarityKind::Jac0);
        assert_eq!(sim.zero_pairs().len(), 1);
        assert_eq!(sim.nonzero().len(), 5);
        let embedding = Embedding::new(1, vec![true; 4]).unwrap();
        let (objective, zero, metrics) = embedding_error(&embedding, &sim, &unit_params()).unwrap();
        assert_eq!(zero, 1.0);
        let sq: f64 = sim.nonzero().values().map(|s| (1.0 - s) * (1.0 - s)).sum();
        let abs: f64 = sim.nonzero().values().map(|s| 1.0 - s).sum();
        assert!((objective - sq).abs() < 1e-12);
        assert!((metrics.mse_nonzero - sq / 5.0).abs() < 1e-12);
        assert!((metrics.mse_all - (sq + 1.0) / 6.0).abs() < 1e-12);
        assert!((metrics.mae_all - (abs + 1.0) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn weights_scale_the_objective_but_not_the_statistics() {
        let sim = build_similarity(&path(3), SimilarityKind::Jac);
        let embedding = Embedding::new(1, vec![true; 3]).unwrap();
        let weighted = BuilderParams {
            weights: Some(std::collections::BTreeMap::from([((0, 1), 4.0)])),
            ..unit_params()
        };
        let (plain_obj, _, plain_metrics) =
            embedding_error(&embedding, &sim, &unit_params()).unwrap();
        let (obj, _, metrics) = embedding_error(&embedding, &sim, &weighted).unwrap();
        let r01 = 1.0 - sim.score(0, 1).unwrap();
        assert!((obj - (plain_obj + 3.0 * r01 * r01)).abs() < 1e-12);
        assert_eq!(metrics, plain_metrics);
    }

    #[test]
    fn evaluate_sample_combines_decode_and_error() {
        let sim = build_similarity(&path(3), SimilarityKind::Jac);
        let params = BuilderParams::for_dimension(1);
        let (_, idx) = build_qubo_penalty(&sim, 1, &params).unwrap();
        // Consistent all-ones assignment: 3 embedding bits + 3 auxiliaries.
        let result = evaluate_sample(&vec![true; 6], &idx, &sim, &params).unwrap();
        assert!(result.feasible);
        assert_eq!(result.violations, 0);
        assert!((result.metrics.mse_nonzero - 2.0 / 9.0).abs() < 1e-12);
        assert_eq!(
            result.combined_objective(&params),
            result.objective + result.zero_error
        );
        // Break one auxiliary: infeasible, same embedding error.
        let mut bits = vec![true; 6];
        bits[idx.aux_var(0, 0)] = false;
        let broken = evaluate_sample(&bits, &idx, &sim, &params).unwrap();
        assert!(!broken.feasible);
        assert_eq!(broken.violations, 1);
        assert_eq!(broken.objective, result.objective);
    }

    #[test]
    fn brute_force_is_no_worse_than_sampled_embeddings() {
        use rand::{RngExt, SeedableRng};
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        for kind in [
            SimilarityKind::Jac,
            SimilarityKind::Jac0,
            SimilarityKind::Adjcy,
        ] {
            let sim = build_similarity(&g, kind);
            let params = unit_params();
            let (best, value) = brute_force_embedding(&sim, 2, true, &params).unwrap();
            let (obj, zero, _) = embedding_error(&best, &sim, &params).unwrap();
            assert!((value - (obj + zero)).abs() < 1e-12);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let bits: Vec<bool> = (0..8).map(|_| rng.random_bool(0.5)).collect();
                let candidate = Embedding::new(2, bits).unwrap();
                let (obj, zero, _) = embedding_error(&candidate, &sim, &params).unwrap();
                assert!(obj + zero >= value - 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_value_is_invariant_under_node_relabeling() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        // Relabel via the cycle 0->3->1->4->2->0.
        let relabel = [3usize, 4, 0, 1, 2];
        let edges: Vec<_> = g
            .edges()
            .iter()
            .map(|&(u, v)| (relabel[u], relabel[v]))
            .collect();
        let h = Graph::new(5, edges).unwrap();
        let params = unit_params();
        for kind in [SimilarityKind::Jac, SimilarityKind::Adjcy] {
            let (_, a) =
                brute_force_embedding(&build_similarity(&g, kind), 2, true, &params).unwrap();
            let (_, b) =
                brute_force_embedding(&build_similarity(&h, kind), 2, true, &params).unwrap();
            assert!((a - b).abs() < 1e-12, "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn brute_force_rejects_oversized_instances() {
        let sim = build_similarity(&path(9), SimilarityKind::Jac);
        match brute_force_embedding(&sim, 3, true, &unit_params()) {
            Err(Error::TooLarge { limit, got, .. }) => {
                assert_eq!(limit, BRUTE_FORCE_BIT_LIMIT);
                assert_eq!(got, 27);
            }
            other => panic!("expected size guard, got {other:?}"),
        }
    }

    #[test]
    fn embedding_json_round_trips_and_rejects_malformed_input() {
        let embedding = Embedding::new(2, vec![true, false, false, true, true, true]).unwrap();
        let text = embedding.to_json();
        assert_eq!(Embedding::from_json(&text).unwrap(), embedding);
        assert!(text.contains("\"0\": \"10\""));
        assert!(Embedding::from_json("{\"k\":0,\"vectors\":{}}").is_err());
        assert!(Embedding::from_json("{\"k\":2,\"vectors\":{\"0\":\"1\"}}").is_err());
        assert!(Embedding::from_json("{\"k\":1,\"vectors\":{\"0\":\"1\",\"2\":\"0\"}}").is_err());
        assert!(Embedding::from_json("{\"k\":1,\"vectors\":{\"0\":\"x\"}}").is_err());
    }
}
