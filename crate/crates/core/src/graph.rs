//! Interaction topologies and the matrices derived from them.
//!
//! Node indices are 0-based internally. Every edge is stored once as `(i, j)`
//! with `i < j`; the smaller index is the tail when an orientation is needed.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Undirected graph with 0/1 adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from an edge list. Self-loops and duplicates are ignored; indices
    /// must be `< n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![false; n * n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::validation(
                    format!("edges[{k}]"),
                    format!("node index out of range for {n} nodes"),
                ));
            }
            if i != j {
                adjacency[i * n + j] = true;
                adjacency[j * n + i] = true;
            }
        }
        Ok(Self::from_adjacency(n, adjacency))
    }

    fn from_adjacency(n: usize, adjacency: Vec<bool>) -> Self {
        let mut edges = Vec::new();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if adjacency[i * n + j] {
                    neighbors[i].push(j);
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        Graph {
            n,
            adjacency,
            edges,
            neighbors,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_adjacency(n, vec![false; n * n])
    }

    pub fn ring(n: usize) -> Self {
        let mut adjacency = vec![false; n * n];
        if n >= 2 {
            for i in 0..n {
                let j = (i + 1) % n;
                if i != j {
                    adjacency[i * n + j] = true;
                    adjacency[j * n + i] = true;
                }
            }
        }
        Self::from_adjacency(n, adjacency)
    }

    pub fn path(n: usize) -> Self {
        let mut adjacency = vec![false; n * n];
        for i in 1..n {
            adjacency[i * n + i - 1] = true;
            adjacency[(i - 1) * n + i] = true;
        }
        Self::from_adjacency(n, adjacency)
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n * n).map(|k| k / n != k % n).collect();
        Self::from_adjacency(n, adjacency)
    }

    /// Edge `(i, j)` iff `‖x_i − x_j‖₂ < radius`.
    pub fn proximity(positions: &[DVector<f64>], radius: f64) -> Self {
        let n = positions.len();
        let mut adjacency = vec![false; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                if (&positions[i] - &positions[j]).norm() < radius {
                    adjacency[i * n + j] = true;
                    adjacency[j * n + i] = true;
                }
            }
        }
        Self::from_adjacency(n, adjacency)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut l = DMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
            l[(i, j)] = -1.0;
            l[(j, i)] = -1.0;
        }
        l
    }

    /// Oriented incidence matrix: column `k` holds −1 at the tail and +1 at the
    /// head of edge `k`.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            d[(i, k)] = -1.0;
            d[(j, k)] = 1.0;
        }
        d
    }

    /// Gain-weighted incidence `D′` (entries ±β_ij) together with
    /// `L′ = D′·D′ᵀ`, whose off-diagonal entries are `−β_ij²`.
    pub fn weighted_incidence(&self, gains: &EdgeGains) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let mut d = DMatrix::zeros(self.n, self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            let beta = gains
                .get(i, j)
                .ok_or(Error::MissingEdgeGain(i + 1, j + 1))?;
            d[(i, k)] = -beta;
            d[(j, k)] = beta;
        }
        let l = &d * d.transpose();
        Ok((d, l))
    }

    /// Second-smallest Laplacian eigenvalue (algebraic connectivity).
    pub fn lambda2(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::TooFewNodes(self.n));
        }
        Ok(symmetric_eigen(&self.laplacian()).values[1])
    }

    /// Structural connectivity by breadth-first search from node 0.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Same graph with node `k` renamed to `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let edges: Vec<_> = self.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        Self::from_edges(self.n, &edges).expect("permutation keeps indices in range")
    }
}

/// Per-edge nonnegative gains `β_ij = β_ji`, keyed by the undirected edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeGains {
    values: BTreeMap<(usize, usize), f64>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl EdgeGains {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(graph: &Graph, value: f64) -> Self {
        Self::from_values(graph, std::iter::repeat(value))
    }

    /// Gains in the graph's edge order.
    pub fn from_values(graph: &Graph, values: impl IntoIterator<Item = f64>) -> Self {
        let values = graph.edges().iter().copied().zip(values).collect();
        EdgeGains { values }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values.get(&key(i, j)).copied()
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values.insert(key(i, j), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.values().copied().collect()
    }

    /// `self + h · rate`, edge by edge. Edges missing from `rate` are unchanged.
    pub fn add_scaled(&self, h: f64, rate: &EdgeGains) -> EdgeGains {
        let mut out = self.clone();
        for (k, r) in &rate.values {
            *out.values.entry(*k).or_insert(0.0) += h * r;
        }
        out
    }

    /// Relabel the endpoints of every edge through `perm`.
    pub fn relabeled(&self, perm: &[usize]) -> EdgeGains {
        let values = self
            .values
            .iter()
            .map(|(&(i, j), &v)| (key(perm[i], perm[j]), v))
            .collect();
        EdgeGains { values }
    }
}
