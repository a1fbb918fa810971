//! Chimera topology and random path embeddings.
//!
//! A graph has `M × N` unit cells, each a complete bipartite `K_{t,t}`.
//! Node ids are `((row·N + col)·2 + shore)·t + k`. Shore 0 qubits couple
//! to the same qubit in the cell below, shore 1 qubits to the cell on the
//! right.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_SHORE: usize = 4;
pub const DEFAULT_RESTARTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    shore: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Site {
    row: usize,
    col: usize,
    side: usize,
    k: usize,
}

impl ChimeraGraph {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || shore == 0 {
            return Err(Error::invalid(
                "chimera",
                format!("sizes must be positive, got M={rows} N={cols} t={shore}"),
            ));
        }
        Ok(ChimeraGraph { rows, cols, shore })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    pub fn node_count(&self) -> usize {
        self.rows * self.cols * 2 * self.shore
    }

    /// `M·N·t² + (M−1)·N·t + M·(N−1)·t`.
    pub fn edge_count(&self) -> usize {
        let (m, n, t) = (self.rows, self.cols, self.shore);
        m * n * t * t + (m - 1) * n * t + m * (n - 1) * t
    }

    fn site(&self, node: usize) -> Site {
        let k = node % self.shore;
        let rest = node / self.shore;
        let side = rest % 2;
        let cell = rest / 2;
        Site {
            row: cell / self.cols,
            col: cell % self.cols,
            side,
            k,
        }
    }

    fn node(&self, s: Site) -> usize {
        ((s.row * self.cols + s.col) * 2 + s.side) * self.shore + s.k
    }

    pub fn contains(&self, node: usize) -> bool {
        node < self.node_count()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if !self.contains(a) || !self.contains(b) || a == b {
            return false;
        }
        let (p, q) = (self.site(a), self.site(b));
        if p.row == q.row && p.col == q.col {
            return p.side != q.side;
        }
        if p.side != q.side || p.k != q.k {
            return false;
        }
        match p.side {
            0 => p.col == q.col && p.row.abs_diff(q.row) == 1,
            _ => p.row == q.row && p.col.abs_diff(q.col) == 1,
        }
    }

    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        if !self.contains(node) {
            return Vec::new();
        }
        let s = self.site(node);
        let mut out: Vec<usize> = (0..self.shore)
            .map(|k| self.node(Site { side: 1 - s.side, k, ..s }))
            .collect();
        let (along, limit) = if s.side == 0 { (s.row, self.rows) } else { (s.col, self.cols) };
        let shifted = |v: usize| if s.side == 0 { Site { row: v, ..s } } else { Site { col: v, ..s } };
        if along > 0 {
            out.push(self.node(shifted(along - 1)));
        }
        if along + 1 < limit {
            out.push(self.node(shifted(along + 1)));
        }
        out
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors(node).len()
    }

    /// Every edge once, as `(low, high)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count())
            .flat_map(|a| self.neighbors(a).into_iter().filter(move |&b| b > a).map(move |b| (a, b)))
            .collect()
    }
}

/// An ordered simple path of qubits carrying a 1D chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEmbedding {
    pub nodes: Vec<usize>,
}

impl ChainEmbedding {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn couplers(&self) -> Vec<(usize, usize)> {
        self.nodes.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    UnknownNode { position: usize, node: usize },
    RepeatedNode { position: usize, node: usize },
    MissingEdge { position: usize, from: usize, to: usize },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::UnknownNode { position, node } => write!(f, "node {node} at position {position} is not in the graph"),
            Violation::RepeatedNode { position, node } => write!(f, "node {node} repeats at position {position}"),
            Violation::MissingEdge { position, from, to } => {
                write!(f, "hop {from} -> {to} at position {position} is not a coupler")
            }
        }
    }
}

/// First problem with `chain` as a simple path on `graph`, if any.
pub fn validate_embedding(graph: &ChimeraGraph, chain: &ChainEmbedding) -> Option<Violation> {
    let mut seen = BTreeSet::new();
    for (position, &node) in chain.nodes.iter().enumerate() {
        if !graph.contains(node) {
            return Some(Violation::UnknownNode { position, node });
        }
        if !seen.insert(node) {
            return Some(Violation::RepeatedNode { position, node });
        }
        if position > 0 {
            let from = chain.nodes[position - 1];
            if !graph.has_edge(from, node) {
                return Some(Violation::MissingEdge { position, from, to: node });
            }
        }
    }
    None
}

/// Seeded self-avoiding walk of `length` nodes, restarting from a fresh
/// random start whenever it gets stuck.
pub fn random_chain(graph: &ChimeraGraph, length: usize, seed: u64, max_restarts: usize) -> Result<ChainEmbedding> {
    let total = graph.node_count();
    if length < 2 || length > total {
        return Err(Error::invalid(
            "chain",
            format!("length {length} outside 2..={total}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut longest = 0;
    let mut visited = alloc::vec![false; total];
    for _ in 0..=max_restarts {
        visited.iter_mut().for_each(|v| *v = false);
        let start = rng.random_range(0..total);
        let mut path = alloc::vec![start];
        visited[start] = true;
        while path.len() < length {
            let here = *path.last().unwrap_or(&start);
            let open: Vec<usize> = graph.neighbors(here).into_iter().filter(|&n| !visited[n]).collect();
            match open.choose(&mut rng) {
                Some(&next) => {
                    visited[next] = true;
                    path.push(next);
                }
                None => break,
            }
        }
        longest = longest.max(path.len());
        if path.len() == length {
            return Ok(ChainEmbedding { nodes: path });
        }
    }
    Err(Error::EmbeddingFailed {
        length,
        restarts: max_restarts,
        longest,
    })
}

/// Human-readable diagnostics for a failed validation.
pub fn describe(v: &Option<Violation>) -> String {
    match v {
        None => String::from("ok"),
        Some(v) => format!("{v}"),
    }
}
