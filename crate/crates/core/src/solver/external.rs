//! File-exchange bridge to out-of-process solvers.
//!
//! The instance is written to `qubo.json` in an exchange directory; the
//! responder (for example a wrapper around annealing hardware) writes
//! `samples.json` with `{"num_vars", "samples": [{"bits", "energy",
//! "occurrences"}, ...]}`. Returned energies are recomputed here — a
//! disagreement is logged and the recomputed value wins.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::qubo::{export_qubo, Qubo, VarIndexer};
use crate::solver::{SampleSet, Sampler, SolverMeta};
use crate::{Error, Result};

/// Instance file name inside an exchange directory.
pub const QUBO_FILE_NAME: &str = "qubo.json";
/// Response file name inside an exchange directory.
pub const SAMPLES_FILE_NAME: &str = "samples.json";

#[derive(Serialize, Deserialize)]
struct SamplesFile {
    num_vars: usize,
    samples: Vec<SampleRecord>,
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    /// Assignment as a `0`/`1` string in variable-index order.
    bits: String,
    energy: f64,
    occurrences: usize,
}

/// Writes a sample set in the exchange format.
pub fn write_samples_file(set: &SampleSet, num_vars: usize, path: &Path) -> Result<()> {
    let file = SamplesFile {
        num_vars,
        samples: set
            .samples()
            .iter()
            .map(|s| SampleRecord {
                bits: s.bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                energy: s.energy,
                occurrences: s.occurrences,
            })
            .collect(),
    };
    let mut text = serde_json::to_string(&file)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads and validates a samples file against `q`, recomputing energies.
pub fn read_samples_file(q: &Qubo, path: &Path) -> Result<SampleSet> {
    let content = fs::read_to_string(path)?;
    parse_samples(q, &content, "external")
}

fn parse_samples(q: &Qubo, content: &str, solver: &str) -> Result<SampleSet> {
    let start = Instant::now();
    let file: SamplesFile = serde_json::from_str(content)
        .map_err(|e| Error::Malformed(format!("samples file: {e}")))?;
    if file.num_vars != q.num_vars() {
        return Err(Error::SampleShape {
            expected: q.num_vars(),
            got: file.num_vars,
        });
    }
    if file.samples.is_empty() {
        return Err(Error::Malformed("samples file contains no samples".into()));
    }
    let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut disagreements = 0usize;
    for record in &file.samples {
        if record.bits.len() != q.num_vars() {
            return Err(Error::SampleShape {
                expected: q.num_vars(),
                got: record.bits.len(),
            });
        }
        let bits: Vec<bool> = record
            .bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!(
                    "bit character `{other}` in samples file"
                ))),
            })
            .collect::<Result<_>>()?;
        if record.occurrences == 0 {
            return Err(Error::Malformed("sample with zero occurrences".into()));
        }
        if (q.energy(&bits) - record.energy).abs() > 1e-9 {
            disagreements += 1;
        }
        *counts.entry(bits).or_insert(0) += record.occurrences;
    }
    if disagreements > 0 {
        log::warn!(
            "{disagreements} of {} external energies disagree with recomputation; \
             recomputed values are used",
            file.samples.len()
        );
    }
    let meta = SolverMeta {
        solver: solver.into(),
        seed: None,
        params: String::new(),
        wall_time: start.elapsed(),
    };
    Ok(SampleSet::from_counts(q, counts, meta))
}

/// Writes the instance into `dir` and waits for a samples file.
///
/// A stale response file is removed first. While waiting, unparsable
/// content is treated as a partial write and polling continues; a parsed
/// but shape-invalid response fails immediately.
pub fn solve_external(
    q: &Qubo,
    idx: &VarIndexer,
    dir: &Path,
    timeout: Duration,
    poll_interval: Duration,
) -> Result<SampleSet> {
    fs::create_dir_all(dir)?;
    let samples_path = dir.join(SAMPLES_FILE_NAME);
    if samples_path.exists() {
        log::warn!("removing stale {}", samples_path.display());
        fs::remove_file(&samples_path)?;
    }
    let qubo_path = dir.join(QUBO_FILE_NAME);
    let tmp_path = dir.join(format!("{QUBO_FILE_NAME}.tmp"));
    {
        let mut buf = Vec::new();
        export_qubo(q, idx, &mut buf)?;
        fs::write(&tmp_path, buf)?;
        fs::rename(&tmp_path, &qubo_path)?;
    }
    let deadline = Instant::now() + timeout;
    loop {
        if samples_path.exists() {
            match fs::read_to_string(&samples_path) {
                Ok(content) => match parse_samples(q, &content, "external") {
                    Ok(set) => return Ok(set),
                    Err(Error::Malformed(_)) if Instant::now() < deadline => {
                        // Possibly a partial write; keep polling.
                    }
                    Err(e) => return Err(e),
                },
                Err(_) if Instant::now() < deadline => {}
                Err(e) => return Err(e.into()),
            }
        }
        if Instant::now() >= deadline {
            return Err(Error::ExternalTimeout(timeout));
        }
        std::thread::sleep(poll_interval);
    }
}

/// [`Sampler`] that round-trips through an exchange directory.
#[derive(Debug, Clone)]
pub struct ExternalSampler {
    pub dir: PathBuf,
    pub timeout: Duration,
    pub poll_interval: Duration,
}

impl ExternalSampler {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            timeout: Duration::from_secs(60),
            poll_interval: Duration::from_millis(25),
        }
    }
}

impl Sampler for ExternalSampler {
    fn name(&self) -> String {
        "external".into()
    }

    fn sample(&self, q: &Qubo, idx: &VarIndexer) -> Result<SampleSet> {
        solve_external(q, idx, &self.dir, self.timeout, self.poll_interval)
    }
}
