//! Sparse QUBO instances and the variable layout shared by all builders.
//!
//! A QUBO minimises `Σ_{i<j} J_ij x_i x_j + Σ_i h_i x_i + offset` over
//! binary `x`. Quadratic keys are canonical `(i, j)` with `i < j`; squares
//! are folded into linear terms (`x² = x`) and exactly-cancelled
//! coefficients are never stored.

mod build;
mod io;

pub use build::{
    build_qubo_alm, build_qubo_almq, build_qubo_penalty, default_penalty_mu, objective_terms,
    penalty_terms, penalty_values, sufficient_mu_bound, zero_pair_terms, PenaltyValues,
};
pub use io::{export_qubo, import_qubo};

use std::collections::BTreeMap;

use crate::similarity::SimilarityMap;
use crate::{Error, Result};

/// Sparse QUBO: linear terms, canonical upper-triangular quadratic terms and
/// a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// Sparse size of a QUBO.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuboStats {
    pub num_vars: usize,
    pub num_linear: usize,
    pub num_quadratic: usize,
}

impl Qubo {
    /// An empty instance over `num_vars` binary variables.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Linear coefficient of `i` (zero when absent).
    pub fn linear_coeff(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    /// Quadratic coefficient of `{i, j}` (order-insensitive, zero when absent).
    pub fn quad_coeff(&self, i: usize, j: usize) -> f64 {
        self.quadratic
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Accumulates `c` onto the linear coefficient of `i`, dropping the entry
    /// if the sum cancels to exactly zero.
    pub fn add_linear(&mut self, i: usize, c: f64) {
        assert!(i < self.num_vars, "variable {i} out of range");
        if c == 0.0 {
            return;
        }
        let entry = self.linear.entry(i).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.linear.remove(&i);
        }
    }

    /// Accumulates `c` onto the quadratic coefficient of `{i, j}`. The key is
    /// canonicalised; `i == j` folds into the linear term since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        assert!(
            i < self.num_vars && j < self.num_vars,
            "variable out of range"
        );
        if i == j {
            self.add_linear(i, c);
            return;
        }
        if c == 0.0 {
            return;
        }
        let key = (i.min(j), i.max(j));
        let entry = self.quadratic.entry(key).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.quadratic.remove(&key);
        }
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// Adds `scale` times every term of `other` into `self`.
    pub fn merge_scaled(&mut self, other: &Qubo, scale: f64) {
        assert_eq!(
            self.num_vars, other.num_vars,
            "merging unequal variable counts"
        );
        for (&i, &c) in &other.linear {
            self.add_linear(i, scale * c);
        }
        for (&(i, j), &c) in &other.quadratic {
            self.add_quadratic(i, j, scale * c);
        }
        self.add_offset(scale * other.offset);
    }

    /// Energy of an assignment, including the offset. Terms are accumulated
    /// in canonical key order, so the value is reproducible.
    pub fn energy(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.num_vars, "assignment length mismatch");
        let mut e = self.offset;
        for (&i, &c) in &self.linear {
            if bits[i] {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if bits[i] && bits[j] {
                e += c;
            }
        }
        e
    }

    /// Sparse term counts.
    pub fn stats(&self) -> QuboStats {
        QuboStats {
            num_vars: self.num_vars,
            num_linear: self.linear.len(),
            num_quadratic: self.quadratic.len(),
        }
    }
}

/// Maps embedding bits and auxiliary product bits to QUBO variable indices.
///
/// Embedding bit `i` of node `x` sits at `x·k + i`; the auxiliary variable
/// linearising `x_i · y_i` for the scored pair at position `p` sits at
/// `n·k + p·k + i`. Scored pairs are enumerated in canonical sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarIndexer {
    n: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl VarIndexer {
    /// Lays out variables for a similarity map and embedding dimension `k ≥ 1`.
    pub fn from_similarity(sim: &SimilarityMap, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParam(
                "embedding dimension k must be at least 1".into(),
            ));
        }
        Ok(Self {
            n: sim.n(),
            k,
            pairs: sim.nonzero().keys().copied().collect(),
        })
    }

    /// Rebuilds an indexer from raw parts (used by file import).
    pub(crate) fn from_parts(n: usize, k: usize, pairs: Vec<(usize, usize)>) -> Self {
        Self { n, k, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Scored pairs in layout order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Index of embedding bit `dim` of `node`.
    pub fn embedding_var(&self, node: usize, dim: usize) -> usize {
        debug_assert!(node < self.n && dim < self.k);
        node * self.k + dim
    }

    /// Index of the auxiliary product variable for pair position `pair_pos`
    /// and dimension `dim`.
    pub fn aux_var(&self, pair_pos: usize, dim: usize) -> usize {
        debug_assert!(pair_pos < self.pairs.len() && dim < self.k);
        self.n * self.k + pair_pos * self.k + dim
    }

    /// Position of a scored pair in layout order.
    pub fn pair_position(&self, x: usize, y: usize) -> Option<usize> {
        let key = (x.min(y), x.max(y));
        self.pairs.binary_search(&key).ok()
    }

    pub fn num_embedding_vars(&self) -> usize {
        self.n * self.k
    }

    pub fn num_vars(&self) -> usize {
        self.n * self.k + self.k * self.pairs.len()
    }

    /// Human-readable variable name: `x:{node}:{dim}` for embedding bits,
    /// `z:{x}:{y}:{dim}` for auxiliary bits.
    pub fn var_name(&self, var: usize) -> String {
        assert!(var < self.num_vars(), "variable {var} out of range");
        if var < self.num_embedding_vars() {
            format!("x:{}:{}", var / self.k, var % self.k)
        } else {
            let rel = var - self.num_embedding_vars();
            let (x, y) = self.pairs[rel / self.k];
            format!("z:{}:{}:{}", x, y, rel % self.k)
        }
    }
}

/// Validation and construction shared by builder inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BuilderParams {
    /// Penalty weight μ ≥ 0 (used by the fixed-penalty builder only).
    pub mu: f64,
    /// Weight on the scored-pair objective.
    pub alpha: f64,
    /// Weight on the zero-pair objective.
    pub beta: f64,
    /// Optional per-pair weights `w_xy > 0`; every weight defaults to 1.
    pub weights: Option<BTreeMap<(usize, usize), f64>>,
}

impl BuilderParams {
    /// Defaults for dimension `k`: μ just above the level that forces exact
    /// products at the optimum, unit objective weights, no per-pair weights.
    pub fn for_dimension(k: usize) -> Self {
        Self {
            mu: default_penalty_mu(k),
            alpha: 1.0,
            beta: 1.0,
            weights: None,
        }
    }

    /// Weight of a scored pair (1 unless overridden).
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights
            .as_ref()
            .and_then(|w| w.get(&(x.min(y), x.max(y))).copied())
            .unwrap_or(1.0)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::InvalidParam(format!(
                "penalty weight mu must be finite and non-negative, got {}",
                self.mu
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if let Some(weights) = &self.weights {
            for (&(x, y), &w) in weights {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "weight {w} for pair ({x}, {y}) must be finite and positive"
                    )));
                }
            }
        }
        Ok(())
    }
}
