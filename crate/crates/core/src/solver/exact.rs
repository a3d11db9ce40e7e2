//! Exhaustive enumeration over all assignments of small instances.
//!
//! Walks the assignments in Gray-code order so each step flips one bit and
//! updates the energy incrementally, keeping every candidate within a small
//! tolerance band of the running minimum; candidates are then re-evaluated
//! from scratch and filtered to the exact minimum, so accumulated rounding
//! drift cannot drop a tied optimum.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::qubo::{Qubo, VarIndexer};
use crate::solver::{SampleSet, Sampler, SolverMeta};
use crate::{Error, Result};

/// Hard cap on exhaustive enumeration (2^26 assignments).
pub const EXACT_VAR_LIMIT: usize = 26;

/// Returns every optimal assignment of `q` with its exact energy.
pub fn solve_exact(q: &Qubo) -> Result<SampleSet> {
    let n = q.num_vars();
    if n > EXACT_VAR_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive enumeration",
            limit: EXACT_VAR_LIMIT,
            got: n,
        });
    }
    let start = Instant::now();
    let mut linear = vec![0.0f64; n];
    for (&i, &c) in q.linear() {
        linear[i] = c;
    }
    let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &c) in q.quadratic() {
        adjacency[i].push((j as u32, c));
        adjacency[j].push((i as u32, c));
    }

    // Collect near-optimal states generously; exact filtering happens below.
    let mut state: u64 = 0;
    let mut energy = q.offset();
    let mut best = energy;
    let mut candidates: Vec<u64> = vec![0];
    for step in 1..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let mut field = linear[i];
        for &(j, c) in &adjacency[i] {
            if state >> j & 1 == 1 {
                field += c;
            }
        }
        let on = state >> i & 1 == 1;
        energy += if on { -field } else { field };
        state ^= 1 << i;
        if energy < best {
            best = energy;
        }
        if energy <= best + tolerance(best) {
            candidates.push(state);
        }
        if candidates.len() >= 1 << 22 {
            // Memory backstop: discard shortlisted states that no longer sit
            // within the band around the best energy seen so far.
            let cutoff = best + tolerance(best);
            candidates.retain(|&cand| exact_energy(q, cand, n) <= cutoff);
        }
    }

    // Exact re-evaluation of the shortlisted states.
    let mut exact: Vec<(u64, f64)> = candidates
        .into_iter()
        .map(|cand| (cand, exact_energy(q, cand, n)))
        .collect();
    let min = exact.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    exact.retain(|&(_, e)| e == min);
    exact.sort_unstable_by_key(|&(cand, _)| cand);
    exact.dedup_by_key(|&mut (cand, _)| cand);

    let mut counts = BTreeMap::new();
    for (cand, _) in exact {
        counts.insert(unpack(cand, n), 1usize);
    }
    let meta = SolverMeta {
        solver: "exact".into(),
        seed: None,
        params: format!("num_vars={n}"),
        wall_time: start.elapsed(),
    };
    Ok(SampleSet::from_counts(q, counts, meta))
}

fn tolerance(best: f64) -> f64 {
    1e-6 * best.abs().max(1.0)
}

fn exact_energy(q: &Qubo, state: u64, n: usize) -> f64 {
    q.energy(&unpack(state, n))
}

fn unpack(state: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| state >> i & 1 == 1).collect()
}

/// [`Sampler`] wrapper around [`solve_exact`].
#[derive(Debug, Clone, Default)]
pub struct ExactSampler;

impl Sampler for ExactSampler {
    fn name(&self) -> String {
        "exact".into()
    }

    fn sample(&self, q: &Qubo, _idx: &VarIndexer) -> Result<SampleSet> {
        solve_exact(q)
    }
}
