//! Pairwise node similarities derived from closed neighborhoods.
//!
//! All three kinds score a pair by the Jaccard coefficient of the closed
//! neighborhoods `N(x) ∪ {x}`; they differ in which pairs enter the
//! embedding objective and which are pinned to zero:
//!
//! * `jac` — pairs with positive Jaccard only; nothing is pinned.
//! * `jac0` — like `jac`, plus every remaining pair as an explicit zero.
//! * `adjcy` — edges only (their Jaccard score); every non-edge is a zero.
//!
//! Whether a pair is "zero" is decided set-wise (empty intersection), never
//! by comparing floating-point scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, Result};

/// Which pairs carry scores and which are pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimilarityKind {
    /// Positive-Jaccard pairs only.
    #[serde(rename = "jac")]
    Jac,
    /// Positive-Jaccard pairs plus all remaining pairs as zeros.
    #[serde(rename = "jac0")]
    Jac0,
    /// Edges (Jaccard-scored) plus all non-edges as zeros.
    #[serde(rename = "adjcy")]
    Adjcy,
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityKind::Jac => "jac",
            SimilarityKind::Jac0 => "jac0",
            SimilarityKind::Adjcy => "adjcy",
        })
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jac" => Ok(SimilarityKind::Jac),
            "jac0" => Ok(SimilarityKind::Jac0),
            "adjcy" => Ok(SimilarityKind::Adjcy),
            other => Err(Error::InvalidParam(format!(
                "unknown similarity `{other}` (expected jac, jac0 or adjcy)"
            ))),
        }
    }
}

/// Scored pairs `D` and zero-pinned pairs `D0` of one graph.
///
/// Pairs are canonical `(x, y)` with `x < y`; the two sets never overlap and
/// self-pairs are excluded. Scores lie in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    kind: SimilarityKind,
    n: usize,
    nonzero: BTreeMap<(usize, usize), f64>,
    zero_pairs: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct SimilarityFile {
    kind: SimilarityKind,
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
    zero_pairs: Vec<(usize, usize)>,
}

impl SimilarityMap {
    /// Assembles a map, validating canonical order, ranges, score domain and
    /// disjointness of the scored and zero sets.
    pub fn new(
        kind: SimilarityKind,
        n: usize,
        nonzero: BTreeMap<(usize, usize), f64>,
        zero_pairs: BTreeSet<(usize, usize)>,
    ) -> Result<Self> {
        for &(x, y) in nonzero.keys().chain(zero_pairs.iter()) {
            if x >= y {
                return Err(Error::Malformed(format!(
                    "pair ({x}, {y}) is not in canonical x < y order"
                )));
            }
            if y >= n {
                return Err(Error::NodeOutOfRange { node: y, n });
            }
        }
        for (&(x, y), &s) in &nonzero {
            if !s.is_finite() || s <= 0.0 || s > 1.0 {
                return Err(Error::Malformed(format!(
                    "score {s} for pair ({x}, {y}) is outside (0, 1]"
                )));
            }
            if zero_pairs.contains(&(x, y)) {
                return Err(Error::Malformed(format!(
                    "pair ({x}, {y}) appears both scored and zero-pinned"
                )));
            }
        }
        Ok(Self {
            kind,
            n,
            nonzero,
            zero_pairs,
        })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    /// Number of nodes in the underlying graph.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Scored pairs `D` in canonical order.
    pub fn nonzero(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.nonzero
    }

    /// Zero-pinned pairs `D0` in canonical order.
    pub fn zero_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.zero_pairs
    }

    /// Score of a pair if it is in `D` (order-insensitive lookup).
    pub fn score(&self, x: usize, y: usize) -> Option<f64> {
        self.nonzero.get(&(x.min(y), x.max(y))).copied()
    }

    /// Serialises to the audit format
    /// `{"kind", "n", "pairs": [[x, y, s], ...], "zero_pairs": [[x, y], ...]}`.
    pub fn to_json(&self) -> String {
        let file = SimilarityFile {
            kind: self.kind,
            n: self.n,
            pairs: self.nonzero.iter().map(|(&(x, y), &s)| (x, y, s)).collect(),
            zero_pairs: self.zero_pairs.iter().copied().collect(),
        };
        let mut s = serde_json::to_string(&file).expect("similarity map serialises");
        s.push('\n');
        s
    }

    /// Parses the audit format back, re-validating every invariant.
    pub fn from_json(content: &str) -> Result<Self> {
        let file: SimilarityFile = serde_json::from_str(content)
            .map_err(|e| Error::Malformed(format!("similarity map: {e}")))?;
        let mut nonzero = BTreeMap::new();
        for (x, y, s) in file.pairs {
            if nonzero.insert((x, y), s).is_some() {
                return Err(Error::Malformed(format!("duplicate pair ({x}, {y})")));
            }
        }
        let mut zero_pairs = BTreeSet::new();
        for (x, y) in file.zero_pairs {
            if !zero_pairs.insert((x, y)) {
                return Err(Error::Malformed(format!("duplicate zero pair ({x}, {y})")));
            }
        }
        Self::new(file.kind, file.n, nonzero, zero_pairs)
    }
}

/// Sorted closed neighborhood `N(x) ∪ {x}`.
pub fn closed_neighborhood(g: &Graph, x: usize) -> Result<Vec<usize>> {
    if x >= g.n() {
        return Err(Error::NodeOutOfRange { node: x, n: g.n() });
    }
    let mut set: Vec<usize> = g.neighbors(x).to_vec();
    match set.binary_search(&x) {
        Ok(_) => {}
        Err(pos) => set.insert(pos, x),
    }
    Ok(set)
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Jaccard coefficient of the closed neighborhoods of two distinct nodes.
pub fn jaccard(g: &Graph, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(Error::InvalidParam(format!(
            "jaccard requires two distinct nodes, got {x} twice"
        )));
    }
    let a = closed_neighborhood(g, x)?;
    let b = closed_neighborhood(g, y)?;
    let inter = intersection_size(&a, &b);
    let union = a.len() + b.len() - inter;
    Ok(inter as f64 / union as f64)
}

/// Computes the similarity map of a graph under the given kind.
pub fn build_similarity(g: &Graph, kind: SimilarityKind) -> SimilarityMap {
    let n = g.n();
    let closed: Vec<Vec<usize>> = (0..n)
        .map(|x| closed_neighborhood(g, x).expect("node in range"))
        .collect();
    let mut nonzero = BTreeMap::new();
    let mut zero_pairs = BTreeSet::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let inter = intersection_size(&closed[x], &closed[y]);
            let scored = match kind {
                SimilarityKind::Jac | SimilarityKind::Jac0 => inter > 0,
                SimilarityKind::Adjcy => g.has_edge(x, y),
            };
            if scored {
                let union = closed[x].len() + closed[y].len() - inter;
                nonzero.insert((x, y), inter as f64 / union as f64);
            } else if kind != SimilarityKind::Jac {
                zero_pairs.insert((x, y));
            }
        }
    }
    SimilarityMap::new(kind, n, nonzero, zero_pairs).expect("construction is canonical")
}
