//! Undirected communication topologies.
//!
//! A [`Graph`] stores one sorted neighbor list per node. The velocity update of
//! a fully informed particle draws its random gains in ascending neighbor
//! order, so the sort order is part of the reproducibility contract.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::graph_stream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list, validating indices and
    /// rejecting self-loops and repeated edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::NodeOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            if !sets[i].insert(j) || !sets[j].insert(i) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Self::from_sets(sets))
    }

    fn from_sets(sets: Vec<BTreeSet<usize>>) -> Self {
        Self {
            n: sets.len(),
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors of `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.adjacency
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::NodeOutOfRange { index: i, n: self.n })
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / self.n as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|nb| nb.binary_search(&j).is_ok())
    }

    /// Edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    stack.push(v);
                }
            }
        }
        visited == self.n
    }

    /// Checks symmetry, absence of self-loops and duplicates, index range and
    /// sortedness of every neighbor list.
    pub fn check_invariants(&self) -> Result<()> {
        if self.adjacency.len() != self.n {
            return Err(Error::InvalidGraph("adjacency length differs from node count".into()));
        }
        for (i, nb) in self.adjacency.iter().enumerate() {
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "neighbors of {i} not strictly ascending"
                    )));
                }
            }
            for &j in nb {
                if j >= self.n {
                    return Err(Error::NodeOutOfRange { index: j, n: self.n });
                }
                if j == i {
                    return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
                }
                if self.adjacency[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidGraph(format!("edge ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Edge-list text: a `n=<count>` header followed by one `i j` line per
    /// edge with `i < j`, ascending.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EdgeList {
            line: 1,
            reason: "missing header".into(),
        })?;
        let n = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or(Error::EdgeList {
                line: 1,
                reason: format!("expected `n=<count>`, found `{header}`"),
            })?;
        let mut edges = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (idx, line) in lines {
            let bad = |reason: String| Error::EdgeList { line: idx + 1, reason };
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected `i j`, found `{line}`")));
            };
            let i: usize = a.parse().map_err(|_| bad(format!("bad index `{a}`")))?;
            let j: usize = b.parse().map_err(|_| bad(format!("bad index `{b}`")))?;
            if i >= j {
                return Err(bad(format!("edge ({i}, {j}) must satisfy i < j")));
            }
            if last.is_some_and(|prev| prev >= (i, j)) {
                return Err(bad("edges must be ascending".into()));
            }
            last = Some((i, j));
            edges.push((i, j));
        }
        Self::from_edges(n, edges)
    }
}

fn check_lattice(n: usize, k: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidGraph(format!("ring needs n >= 3, got {n}")));
    }
    if k % 2 != 0 {
        return Err(Error::InvalidGraph(format!("ring degree must be even, got {k}")));
    }
    if k < 2 || k >= n {
        return Err(Error::InvalidGraph(format!(
            "ring degree must satisfy 2 <= k <= n - 1, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

fn ring_sets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let t = (i + j) % n;
            sets[i].insert(t);
            sets[t].insert(i);
        }
    }
    sets
}

/// Ring lattice: node `i` is joined to `i ± 1, …, i ± k/2` (mod `n`).
pub fn ring(n: usize, k: usize) -> Result<Graph> {
    check_lattice(n, k)?;
    Ok(Graph::from_sets(ring_sets(n, k)))
}

/// Barabási–Albert preferential attachment grown from a complete graph on
/// `m + 1` nodes.
pub fn scale_free(n: usize, m: usize, seed: u64) -> Result<Graph> {
    scale_free_with(n, m, &mut graph_stream(seed))
}

pub fn scale_free_with<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m < 1 || m >= n {
        return Err(Error::InvalidGraph(format!(
            "scale-free needs 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let mut sets = vec![BTreeSet::new(); n];
    // Each endpoint appears once per incident edge, so a uniform pick from
    // this list is a degree-proportional pick.
    let mut endpoints = Vec::with_capacity(2 * (m * (m + 1) / 2 + m * (n - m - 1)));
    for i in 0..=m {
        for j in (i + 1)..=m {
            sets[i].insert(j);
            sets[j].insert(i);
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            sets[v].insert(t);
            sets[t].insert(v);
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(Graph::from_sets(sets))
}

/// Watts–Strogatz rewiring of `ring(n, k)`.
///
/// Each clockwise lattice edge `(i, i + j)` is visited for `j = 1..=k/2`, then
/// `i = 0..n`, and with probability `beta` its far endpoint is moved to a
/// uniformly drawn node. Draws that would create a self-loop or duplicate are
/// repeated; after `n` consecutive rejections the original edge is kept.
pub fn small_world(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph> {
    small_world_with(n, k, beta, &mut graph_stream(seed))
}

pub fn small_world_with<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    beta: f64,
    rng: &mut R,
) -> Result<Graph> {
    check_lattice(n, k)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidGraph(format!(
            "rewiring probability must lie in [0, 1], got {beta}"
        )));
    }
    let mut sets = ring_sets(n, k);
    for j in 1..=k / 2 {
        for i in 0..n {
            if rng.random::<f64>() >= beta {
                continue;
            }
            let old = (i + j) % n;
            let mut rejections = 0;
            while rejections < n {
                let w = rng.random_range(0..n);
                if w == i || sets[i].contains(&w) {
                    rejections += 1;
                    continue;
                }
                sets[i].remove(&old);
                sets[old].remove(&i);
                sets[i].insert(w);
                sets[w].insert(i);
                break;
            }
        }
    }
    Ok(Graph::from_sets(sets))
}
