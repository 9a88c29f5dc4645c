//! Dense SBM realizations.
//!
//! A loop `{v, v}` contributes 1 to the degree of `v` and counts as a single
//! element of the edge set, so `sum_v d_v = 2|E| - |L|`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{BlockModelConfig, DerivedParams};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    n_blocks: usize,
    block_of: Vec<usize>,
    adjacency: Vec<u8>,
    degrees: Vec<usize>,
    edge_count: usize,
    loop_count: usize,
}

impl Graph {
    fn empty(n: usize, block_of: Vec<usize>, n_blocks: usize) -> Self {
        Self {
            n,
            n_blocks,
            block_of,
            adjacency: vec![0; n * n],
            degrees: vec![0; n],
            edge_count: 0,
            loop_count: 0,
        }
    }

    fn insert(&mut self, v: usize, w: usize) -> bool {
        if self.adjacency[v * self.n + w] == 1 {
            return false;
        }
        self.adjacency[v * self.n + w] = 1;
        self.adjacency[w * self.n + v] = 1;
        self.degrees[v] += 1;
        if v != w {
            self.degrees[w] += 1;
        } else {
            self.loop_count += 1;
        }
        self.edge_count += 1;
        true
    }

    /// Builds a graph whose vertices are split into `n_blocks` contiguous
    /// blocks of equal size. Edges are zero-based pairs; `(v, v)` is a loop.
    pub fn from_edges(n: usize, n_blocks: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || n_blocks == 0 || n_blocks > n || n % n_blocks != 0 {
            return Err(Error::InvalidArgument(format!(
                "{n} vertices cannot be split into {n_blocks} equal blocks"
            )));
        }
        let size = n / n_blocks;
        let block_of = (0..n).map(|v| v / size).collect();
        Self::from_parts(n_blocks, block_of, edges)
    }

    /// Builds a graph from an explicit block assignment.
    pub fn from_parts(n_blocks: usize, block_of: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = block_of.len();
        if n == 0 || n_blocks == 0 || n % n_blocks != 0 {
            return Err(Error::InvalidArgument(format!(
                "{n} vertices cannot be split into {n_blocks} equal blocks"
            )));
        }
        let mut sizes = vec![0usize; n_blocks];
        for (v, &b) in block_of.iter().enumerate() {
            if b >= n_blocks {
                return Err(Error::InvalidArgument(format!(
                    "vertex {} assigned to block {} but there are {} blocks",
                    v + 1,
                    b + 1,
                    n_blocks
                )));
            }
            sizes[b] += 1;
        }
        if sizes.iter().any(|&s| s != n / n_blocks) {
            return Err(Error::InvalidArgument("blocks must all have n / m vertices".into()));
        }
        let mut g = Self::empty(n, block_of, n_blocks);
        for &(v, w) in edges {
            if v >= n || w >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) references a vertex outside 1..={}",
                    v + 1,
                    w + 1,
                    n
                )));
            }
            if !g.insert(v, w) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) listed twice",
                    v + 1,
                    w + 1
                )));
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    pub fn blocks(&self) -> &[usize] {
        &self.block_of
    }

    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.adjacency[v * self.n + w] == 1
    }

    /// Row `v` of the 0/1 adjacency matrix.
    pub fn row(&self, v: usize) -> &[u8] {
        &self.adjacency[v * self.n..(v + 1) * self.n]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v)
            .iter()
            .enumerate()
            .filter_map(|(w, &a)| (a == 1).then_some(w))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// `|E|`: unordered pairs plus loops.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn loop_count(&self) -> usize {
        self.loop_count
    }

    /// `2|E| - |L|`, the normalisation of the stationary distribution.
    pub fn volume(&self) -> usize {
        2 * self.edge_count - self.loop_count
    }

    /// Edges `(v, w)` with `v <= w`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |v| {
            self.row(v)[v..]
                .iter()
                .enumerate()
                .filter_map(move |(off, &a)| (a == 1).then_some((v, v + off)))
        })
    }

    /// Canonical edge-list text: a `n m_blocks` header, one `block v` line per
    /// vertex, then one `v w` line per edge with `v <= w`. Indices are 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * (self.n + self.edge_count));
        let _ = writeln!(out, "{} {}", self.n, self.n_blocks);
        for (v, &b) in self.block_of.iter().enumerate() {
            let _ = writeln!(out, "{} {}", b + 1, v + 1);
        }
        for (v, w) in self.edges() {
            let _ = writeln!(out, "{} {}", v + 1, w + 1);
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_pair = |line: usize, l: &str| -> Result<(usize, usize)> {
            let mut it = l.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: "expected two integers".into(),
                    })?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse {
                        line,
                        message: e.to_string(),
                    })
            };
            let pair = (next()?, next()?);
            if it.next().is_some() {
                return Err(Error::Parse {
                    line,
                    message: "expected exactly two integers".into(),
                });
            }
            Ok(pair)
        };
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `n m_blocks` header".into(),
        })?;
        let (n, n_blocks) = parse_pair(line, header)?;
        if n == 0 || n_blocks == 0 {
            return Err(Error::Parse {
                line,
                message: "n and m_blocks must be positive".into(),
            });
        }
        let mut block_of = vec![usize::MAX; n];
        for _ in 0..n {
            let (line, l) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("expected {n} `block v` lines"),
            })?;
            let (b, v) = parse_pair(line, l)?;
            if v == 0 || v > n || b == 0 || b > n_blocks {
                return Err(Error::Parse {
                    line,
                    message: format!("block line `{l}` out of range"),
                });
            }
            if block_of[v - 1] != usize::MAX {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex {v} assigned twice"),
                });
            }
            block_of[v - 1] = b - 1;
        }
        let mut edges = Vec::new();
        for (line, l) in lines {
            let (v, w) = parse_pair(line, l)?;
            if v == 0 || w == 0 {
                return Err(Error::Parse {
                    line,
                    message: "vertices are numbered from 1".into(),
                });
            }
            edges.push((v.min(w) - 1, v.max(w) - 1));
        }
        Self::from_parts(n_blocks, block_of, &edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_edge_list(&text)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

/// Draws one realization. Pairs are visited in the order `(v, w)`, `v <= w`,
/// row by row; every pair, loops included, consumes one uniform draw so that
/// the loop-free graph for a seed is the looped graph for the same seed with
/// its loops deleted.
pub fn sample(config: &BlockModelConfig) -> Result<Graph> {
    config.validate()?;
    let n = config.n;
    let block_of: Vec<usize> = (0..n).map(|v| config.block_of(v)).collect();
    let mut g = Graph::empty(n, block_of, config.m);
    let mut rng = rng_from_seed(config.seed);
    for v in 0..n {
        let bv = g.block_of[v];
        for w in v..n {
            let prob = if g.block_of[w] == bv { config.p[bv] } else { config.q };
            let hit = rng.gen::<f64>() < prob;
            if hit && (v != w || config.allow_loops) {
                g.insert(v, w);
            }
        }
    }
    Ok(g)
}

/// One component spans every vertex; loops are irrelevant.
pub fn is_connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == g.n
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeConcentration {
    pub c: f64,
    pub violations: usize,
    pub fraction: f64,
    /// Largest two-sided Chernoff tail over blocks; the expected violation
    /// fraction should not exceed it.
    pub tail_bound: f64,
}

/// Counts vertices with `|d_v - gamma_{B(v)}| > c sqrt(gamma_{B(v)})`.
pub fn degree_concentration(g: &Graph, params: &DerivedParams, c: f64) -> Result<DegreeConcentration> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive (got {c})")));
    }
    if g.n != params.n() || g.n_blocks != params.m() {
        return Err(Error::InvalidArgument("graph and parameters disagree on n or m".into()));
    }
    let violations = (0..g.n)
        .filter(|&v| {
            let gamma = params.gamma[g.block_of[v]];
            (g.degrees[v] as f64 - gamma).abs() > c * gamma.sqrt()
        })
        .count();
    let tail_bound = params
        .gamma
        .iter()
        .map(|&gamma| {
            let lower = (-c * c / 2.0).exp();
            let upper = (-c * c / (2.0 * (1.0 + c / (3.0 * gamma.sqrt())))).exp();
            (lower + upper).min(1.0)
        })
        .fold(0.0, f64::max);
    Ok(DegreeConcentration {
        c,
        violations,
        fraction: violations as f64 / g.n as f64,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;

    fn config(n: usize, m: usize, p: Vec<f64>, q: f64) -> BlockModelConfig {
        BlockModelConfig::new(n, m, p, q).unwrap()
    }

    #[test]
    fn complete_graph_with_loops() {
        let g = sample(&config(10, 2, vec![1.0, 1.0], 1.0)).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 10));
        assert_eq!(g.loop_count(), 10);
        assert_eq!(g.edge_count(), 55);
        assert!(is_connected(&g));
    }

    #[test]
    fn empty_graph() {
        let g = sample(&config(10, 2, vec![0.0, 0.0], 0.0)).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(!is_connected(&g));
    }

    #[test]
    fn two_cliques_are_disconnected() {
        let g = sample(&config(8, 2, vec![1.0, 1.0], 0.0)).unwrap();
        assert!(!is_connected(&g));
    }

    #[test]
    fn single_vertex_is_connected() {
        let g = Graph::from_edges(1, 1, &[]).unwrap();
        assert!(is_connected(&g));
    }

    #[test]
    fn loops_flag_removes_only_loops() {
        let base = config(60, 3, vec![0.4, 0.3, 0.2], 0.1).with_seed(5);
        let with = sample(&base).unwrap();
        let without = sample(&base.clone().with_loops(false)).unwrap();
        assert_eq!(without.loop_count(), 0);
        assert_eq!(with.edge_count() - with.loop_count(), without.edge_count());
        for v in 0..60 {
            for w in 0..60 {
                if v != w {
                    assert_eq!(with.has_edge(v, w), without.has_edge(v, w));
                }
            }
        }
    }

    #[test]
    fn degree_sum_identity_and_symmetry() {
        let g = sample(&config(90, 3, vec![0.5, 0.4, 0.1], 0.2).with_seed(11)).unwrap();
        let sum: usize = g.degrees().iter().sum();
        assert_eq!(sum, g.volume());
        for v in 0..90 {
            assert_eq!(g.degree(v), g.row(v).iter().map(|&a| a as usize).sum::<usize>());
            for w in 0..90 {
                assert_eq!(g.has_edge(v, w), g.has_edge(w, v));
            }
        }
    }

    #[test]
    fn same_seed_same_graph() {
        let c = config(50, 2, vec![0.3, 0.2], 0.1).with_seed(99);
        assert_eq!(sample(&c).unwrap(), sample(&c).unwrap());
        assert_ne!(sample(&c).unwrap(), sample(&c.clone().with_seed(100)).unwrap());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = sample(&config(12, 3, vec![0.6, 0.5, 0.4], 0.2).with_seed(3)).unwrap();
        let text = g.to_edge_list();
        let back = Graph::from_edge_list(&text).unwrap();
        assert_eq!(g, back);
        assert_eq!(back.to_edge_list(), text);
        assert!(text.starts_with("12 3\n1 1\n"));
    }

    #[test]
    fn edge_list_rejects_garbage() {
        assert!(Graph::from_edge_list("").is_err());
        assert!(Graph::from_edge_list("2 1\n1 1\n").is_err());
        assert!(Graph::from_edge_list("2 1\n1 1\n1 2\n1 3\n").is_err());
        assert!(Graph::from_edge_list("2 1\n1 1\n1 2\n1 2\n2 1\n").is_err());
        assert!(Graph::from_edge_list("2 1\n1 1\n1 2\nx 2\n").is_err());
        let two = Graph::from_edge_list("2 1\n1 1\n1 2\n2 1\n").unwrap();
        assert!(two.has_edge(0, 1) && two.edge_count() == 1);
    }

    #[test]
    fn deterministic_concentration() {
        let c = config(20, 2, vec![1.0, 1.0], 1.0);
        let g = sample(&c).unwrap();
        let d = derive(&c).unwrap();
        for cc in [0.01, 1.0, 5.0] {
            assert_eq!(degree_concentration(&g, &d, cc).unwrap().violations, 0);
        }
        assert!(degree_concentration(&g, &d, 0.0).is_err());
    }

    #[test]
    fn erdos_renyi_concentration_c3() {
        // N=500, p=0.5, c=3: violation fraction stays at or below 2% on each of 50 draws.
        let base = config(500, 1, vec![0.5], 0.0);
        let d = derive(&base).unwrap();
        for seed in 0..50 {
            let g = sample(&base.clone().with_seed(seed)).unwrap();
            let r = degree_concentration(&g, &d, 3.0).unwrap();
            assert!(r.fraction <= 0.02, "seed {seed}: {}", r.fraction);
        }
    }
}
