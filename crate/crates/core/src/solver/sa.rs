//! Single-bit-flip Metropolis annealing with independent restarts.
//!
//! Each read starts from a random assignment and sweeps the variables in
//! fixed index order over a geometric inverse-temperature schedule. Reads
//! draw from per-read RNG streams derived from `(seed, read index)`, so a
//! parallel run and a serial run produce identical sample sets.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::qubo::{Qubo, VarIndexer};
use crate::solver::{SampleSet, Sampler, SolverMeta};
use crate::{Error, Result};

/// Annealing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SaParams {
    /// Independent restarts; each contributes one final assignment.
    pub num_reads: usize,
    /// Full passes over the variables per read.
    pub num_sweeps: usize,
    /// Inverse-temperature endpoints `(beta_hot, beta_cold)`; derived from
    /// the coefficient magnitudes when absent.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            num_sweeps: 1000,
            beta_range: None,
            seed: 0,
        }
    }
}

/// Per-variable bound on the magnitude of a single-flip energy change:
/// `|h_i| + Σ_j |J_ij|`.
fn flip_bounds(q: &Qubo) -> Vec<f64> {
    let mut bounds = vec![0.0f64; q.num_vars()];
    for (&i, &c) in q.linear() {
        bounds[i] += c.abs();
    }
    for (&(i, j), &c) in q.quadratic() {
        bounds[i] += c.abs();
        bounds[j] += c.abs();
    }
    bounds
}

/// Derives `(beta_hot, beta_cold)` so the hottest sweep accepts a worst-case
/// uphill flip with probability about 1/2 and the coldest accepts the
/// gentlest possible uphill flip with probability about 1/1000.
pub fn default_beta_range(q: &Qubo) -> (f64, f64) {
    let bounds = flip_bounds(q);
    let max = bounds.iter().copied().fold(0.0f64, f64::max);
    let min = bounds
        .iter()
        .copied()
        .filter(|&b| b > 0.0)
        .fold(f64::INFINITY, f64::min);
    if max <= 0.0 || !min.is_finite() {
        // No terms at all: any schedule explores a flat landscape.
        return (2.0f64.ln(), 1000.0f64.ln());
    }
    (2.0f64.ln() / max, 1000.0f64.ln() / min)
}

/// Mixes a master seed and a read index into an independent child seed.
fn read_seed(seed: u64, read: u64) -> u64 {
    // splitmix64 over the combined value; avalanches both inputs.
    let mut x = seed ^ read.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

struct Terms {
    linear: Vec<f64>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl Terms {
    fn from_qubo(q: &Qubo) -> Self {
        let n = q.num_vars();
        let mut linear = vec![0.0; n];
        for (&i, &c) in q.linear() {
            linear[i] = c;
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(i, j), &c) in q.quadratic() {
            adjacency[i].push((j as u32, c));
            adjacency[j].push((i as u32, c));
        }
        Self { linear, adjacency }
    }

    /// Energy change from flipping variable `i` under the current bits.
    #[inline]
    fn flip_delta(&self, bits: &[bool], i: usize) -> f64 {
        let mut field = self.linear[i];
        for &(j, c) in &self.adjacency[i] {
            if bits[j as usize] {
                field += c;
            }
        }
        if bits[i] {
            -field
        } else {
            field
        }
    }
}

fn run_read(terms: &Terms, betas: &[f64], seed: u64, read: u64) -> Vec<bool> {
    let n = terms.linear.len();
    let mut rng = ChaCha8Rng::seed_from_u64(read_seed(seed, read));
    let mut bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    for &beta in betas {
        for i in 0..n {
            let delta = terms.flip_delta(&bits, i);
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                bits[i] = !bits[i];
            }
        }
    }
    bits
}

/// Runs `num_reads` independent anneals and aggregates the final states.
pub fn solve_sa(q: &Qubo, params: &SaParams) -> Result<SampleSet> {
    if params.num_reads == 0 {
        return Err(Error::InvalidParam("num_reads must be at least 1".into()));
    }
    if params.num_sweeps == 0 {
        return Err(Error::InvalidParam("num_sweeps must be at least 1".into()));
    }
    let (beta_hot, beta_cold) = params.beta_range.unwrap_or_else(|| default_beta_range(q));
    if !(beta_hot.is_finite() && beta_cold.is_finite() && 0.0 < beta_hot && beta_hot < beta_cold) {
        return Err(Error::InvalidParam(format!(
            "need 0 < beta_hot < beta_cold, got ({beta_hot}, {beta_cold})"
        )));
    }
    let start = Instant::now();
    let s = params.num_sweeps;
    let betas: Vec<f64> = if s == 1 {
        vec![beta_cold]
    } else {
        let ratio = beta_cold / beta_hot;
        (0..s)
            .map(|t| beta_hot * ratio.powf(t as f64 / (s - 1) as f64))
            .collect()
    };
    let terms = Terms::from_qubo(q);
    let reads: Vec<Vec<bool>> = (0..params.num_reads as u64)
        .into_par_iter()
        .map(|r| run_read(&terms, &betas, params.seed, r))
        .collect();
    let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for bits in reads {
        *counts.entry(bits).or_insert(0) += 1;
    }
    let meta = SolverMeta {
        solver: "sa".into(),
        seed: Some(params.seed),
        params: format!(
            "num_reads={} num_sweeps={} beta_hot={} beta_cold={}",
            params.num_reads, params.num_sweeps, beta_hot, beta_cold
        ),
        wall_time: start.elapsed(),
    };
    Ok(SampleSet::from_counts(q, counts, meta))
}

/// [`Sampler`] wrapper around [`solve_sa`].
#[derive(Debug, Clone)]
pub struct SaSampler {
    pub params: SaParams,
}

impl Sampler for SaSampler {
    fn name(&self) -> String {
        "sa".into()
    }

    fn sample(&self, q: &Qubo, _idx: &VarIndexer) -> Result<SampleSet> {
        solve_sa(q, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::qubo::{build_qubo_penalty, BuilderParams};
    use crate::similarity::{build_similarity, SimilarityKind};

    #[test]
    fn single_variable_problem_lands_in_its_minimum() {
        let mut q = Qubo::new(1);
        q.add_linear(0, -1.0);
        let set = solve_sa(
            &q,
            &SaParams {
                num_reads: 20,
                num_sweeps: 50,
                ..SaParams::default()
            },
        )
        .unwrap();
        assert_eq!(set.best().unwrap().bits, vec![true]);
        assert_eq!(set.best().unwrap().energy, -1.0);
    }

    #[test]
    fn empty_problem_yields_the_empty_assignment_at_offset_energy() {
        let mut q = Qubo::new(0);
        q.add_offset(2.5);
        let set = solve_sa(&q, &SaParams::default()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.best().unwrap().bits.is_empty());
        assert_eq!(set.best().unwrap().energy, 2.5);
        assert_eq!(set.best().unwrap().occurrences, 1000);
    }

    #[test]
    fn identical_seeds_reproduce_identical_sample_sets() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let sim = build_similarity(&g, SimilarityKind::Jac);
        let (q, _) = build_qubo_penalty(&sim, 2, &BuilderParams::for_dimension(2)).unwrap();
        let params = SaParams {
            num_reads: 64,
            num_sweeps: 100,
            beta_range: None,
            seed: 99,
        };
        let a = solve_sa(&q, &params).unwrap();
        let b = solve_sa(&q, &params).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = solve_sa(
            &q,
            &SaParams {
                seed: 100,
                ..params
            },
        )
        .unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn stored_energies_match_recomputation() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let sim = build_similarity(&g, SimilarityKind::Jac0);
        let (q, _) = build_qubo_penalty(&sim, 1, &BuilderParams::for_dimension(1)).unwrap();
        let set = solve_sa(
            &q,
            &SaParams {
                num_reads: 32,
                num_sweeps: 64,
                beta_range: None,
                seed: 5,
            },
        )
        .unwrap();
        assert_eq!(set.total_occurrences(), 32);
        for s in set.samples() {
            assert_eq!(s.energy, q.energy(&s.bits));
        }
        // Sorted ascending.
        for w in set.samples().windows(2) {
            assert!(w[0].energy <= w[1].energy);
        }
    }

    #[test]
    fn beta_defaults_span_hot_to_cold() {
        let mut q = Qubo::new(3);
        q.add_linear(0, 2.0);
        q.add_linear(1, -0.5);
        q.add_quadratic(0, 1, 1.0);
        q.add_quadratic(1, 2, 0.25);
        let (hot, cold) = default_beta_range(&q);
        // Largest per-variable bound: |2| + |1| = 3; smallest nonzero: 0.25.
        assert_eq!(hot, 2.0f64.ln() / 3.0);
        assert_eq!(cold, 1000.0f64.ln() / 0.25);
        assert!(hot < cold);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let q = Qubo::new(2);
        assert!(solve_sa(
            &q,
            &SaParams {
                num_reads: 0,
                ..SaParams::default()
            }
        )
        .is_err());
        assert!(solve_sa(
            &q,
            &SaParams {
                num_sweeps: 0,
                ..SaParams::default()
            }
        )
        .is_err());
        assert!(solve_sa(
            &q,
            &SaParams {
                beta_range: Some((2.0, 1.0)),
                ..SaParams::default()
            }
        )
        .is_err());
    }
}
