//! QUBO samplers: simulated annealing, exhaustive enumeration, and a
//! file-exchange bridge to external solvers.
//!
//! Every sampler returns a [`SampleSet`] whose energies are recomputed from
//! the QUBO — never trusted from the producing side — and whose samples are
//! sorted ascending by energy with a deterministic tie-break on the bits.

mod exact;
mod external;
mod sa;

pub use exact::{solve_exact, ExactSampler, EXACT_VAR_LIMIT};
pub use external::{
    read_samples_file, solve_external, write_samples_file, ExternalSampler, QUBO_FILE_NAME,
    SAMPLES_FILE_NAME,
};
pub use sa::{default_beta_range, solve_sa, SaParams, SaSampler};

use std::collections::BTreeMap;
use std::time::Duration;

use crate::qubo::{Qubo, VarIndexer};
use crate::Result;

/// One distinct assignment with its exact energy and multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub occurrences: usize,
}

/// Provenance of a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverMeta {
    pub solver: String,
    pub seed: Option<u64>,
    /// Free-form parameter record, e.g. `"num_reads=1000 num_sweeps=1000"`.
    pub params: String,
    pub wall_time: Duration,
}

/// Deduplicated samples sorted ascending by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    pub meta: SolverMeta,
}

impl SampleSet {
    /// Builds a set from assignment counts, recomputing each energy from the
    /// QUBO and sorting by `(energy, bits)`.
    pub fn from_counts(q: &Qubo, counts: BTreeMap<Vec<bool>, usize>, meta: SolverMeta) -> Self {
        let mut samples: Vec<Sample> = counts
            .into_iter()
            .map(|(bits, occurrences)| Sample {
                energy: q.energy(&bits),
                bits,
                occurrences,
            })
            .collect();
        samples.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.bits.cmp(&b.bits))
        });
        Self { samples, meta }
    }

    /// Lowest-energy sample, if any.
    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total occurrences across all samples.
    pub fn total_occurrences(&self) -> usize {
        self.samples.iter().map(|s| s.occurrences).sum()
    }
}

/// A pluggable QUBO solver. The indexer travels along so file-exchange
/// samplers can emit variable names; in-process samplers ignore it.
pub trait Sampler {
    fn name(&self) -> String;
    fn sample(&self, q: &Qubo, idx: &VarIndexer) -> Result<SampleSet>;
}
