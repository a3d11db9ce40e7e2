//! Undirected simple graphs: generation, text/structured I/O.
//!
//! Edges are stored canonically as `(u, v)` with `u < v`; node ids are
//! `0..n`. Two file formats are supported: a plain edge list (`"u v"` per
//! line, `#` starts a comment) and a structured JSON form
//! `{"n": ..., "edges": [[u, v], ...]}`. The edge list cannot represent
//! isolated nodes, so [`write_graph`] refuses it for such graphs.

use std::collections::BTreeSet;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Serialization format for [`read_graph`] / [`write_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// One `"u v"` line per edge; `#` comments; node count is `1 + max id`.
    EdgeList,
    /// JSON `{"n": ..., "edges": [[u, v], ...]}`; represents isolated nodes.
    Structured,
}

/// An undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from a node count and an edge iterator.
    ///
    /// Edges are canonicalised to `u < v` and deduplicated. Self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Self { n, edges, adj })
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical sorted order, each `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `x`.
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    /// Degree of `x`.
    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    /// Whether `{u, v}` is an edge.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj
            .get(u)
            .is_some_and(|nb| nb.binary_search(&v).is_ok())
    }

    /// Whether some node has degree zero.
    pub fn has_isolated_nodes(&self) -> bool {
        self.adj.iter().any(|nb| nb.is_empty())
    }
}

/// Samples a graph with `n` nodes and exactly `round(n * avg_degree / 2)`
/// distinct edges, uniformly over all such edge sets.
pub fn generate_random_graph(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!(
            "need at least 2 nodes to place edges, got {n}"
        )));
    }
    if !avg_degree.is_finite() || avg_degree <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "avg_degree must be a positive finite number, got {avg_degree}"
        )));
    }
    let m = (n as f64 * avg_degree / 2.0).round() as usize;
    let max_edges = n * (n - 1) / 2;
    if m > max_edges {
        return Err(Error::InvalidGraph(format!(
            "{m} edges requested but a graph on {n} nodes has at most {max_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    while set.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    Graph::new(n, set)
}

/// Parses a graph from either supported format, sniffing JSON by a leading `{`.
pub fn read_graph(content: &str) -> Result<Graph> {
    if content.trim_start().starts_with('{') {
        read_graph_as(content, GraphFormat::Structured)
    } else {
        read_graph_as(content, GraphFormat::EdgeList)
    }
}

/// Parses a graph from an explicit format.
pub fn read_graph_as(content: &str, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::Structured => {
            let file: GraphFile = serde_json::from_str(content)
                .map_err(|e| Error::Malformed(format!("graph: {e}")))?;
            Graph::new(file.n, file.edges)
        }
        GraphFormat::EdgeList => {
            let mut edges = Vec::new();
            let mut max_node = 0usize;
            for (idx, raw) in content.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let mut parts = line.split_whitespace();
                let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(a), Some(b), None) => (a, b),
                    _ => {
                        return Err(Error::GraphParse {
                            line: idx + 1,
                            msg: format!("expected two node ids, got `{line}`"),
                        })
                    }
                };
                let parse = |tok: &str| {
                    tok.parse::<usize>().map_err(|_| Error::GraphParse {
                        line: idx + 1,
                        msg: format!("`{tok}` is not a non-negative integer"),
                    })
                };
                let (u, v) = (parse(a)?, parse(b)?);
                if u == v {
                    return Err(Error::GraphParse {
                        line: idx + 1,
                        msg: format!("self-loop at node {u}"),
                    });
                }
                max_node = max_node.max(u).max(v);
                edges.push((u, v));
            }
            if edges.is_empty() {
                return Err(Error::Malformed(
                    "edge list contains no edges; use the structured format for edgeless graphs"
                        .into(),
                ));
            }
            Graph::new(max_node + 1, edges)
        }
    }
}

/// Serialises a graph.
///
/// The edge-list format is refused when the graph has isolated nodes, since
/// node count could not survive a round-trip; use [`GraphFormat::Structured`].
pub fn write_graph(g: &Graph, format: GraphFormat) -> Result<String> {
    match format {
        GraphFormat::EdgeList => {
            if g.has_isolated_nodes() {
                return Err(Error::InvalidGraph(
                    "graph has isolated nodes, which the edge-list format cannot represent; \
                     use the structured format"
                        .into(),
                ));
            }
            let mut out = String::new();
            for &(u, v) in g.edges() {
                out.push_str(&format!("{u} {v}\n"));
            }
            Ok(out)
        }
        GraphFormat::Structured => {
            let file = GraphFile {
                n: g.n(),
                edges: g.edges().to_vec(),
            };
            let mut s = serde_json::to_string(&file)?;
            s.push('\n');
            Ok(s)
        }
    }
}
