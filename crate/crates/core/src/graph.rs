//! Interaction graphs, Laplacian spectra and node certainty indices.
//!
//! Node ids are 0-indexed throughout the library. Graphs are validated on
//! construction (no self-loops, no duplicates, connected), so every
//! [`Graph`] value is usable by the downstream spectral formulas.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: &'static str },
    #[error("edge ({u}, {v}) has non-positive or non-finite weight {w}")]
    InvalidWeight { u: usize, v: usize, w: f64 },
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,
    #[error("no connected graph after {0} attempts")]
    GenerationFailure(usize),
    #[error("edge probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A weighted undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Connected undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Unit-weight graph from an edge list.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::with_weights(n, &weighted)
    }

    pub fn with_weights(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "node id out of range" });
            }
            if a == b {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "self-loop" });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::InvalidWeight { u: a, v: b, w });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(GraphError::InvalidEdge { u: a, v: b, reason: "duplicate edge" });
            }
            out.push(Edge { u, v, weight: w });
        }
        let g = Graph { n, edges: out };
        if !g.is_connected() {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(g)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Self::new(n, &e)
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::new(n, &e)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.n;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }

    /// Weighted Laplacian `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.u, e.u)] += e.weight;
            l[(e.v, e.v)] += e.weight;
            l[(e.u, e.v)] -= e.weight;
            l[(e.v, e.u)] -= e.weight;
        }
        l
    }

    /// Parse the edge-list text format: a header line `n <count>` followed
    /// by `u v [w]` lines. `#` starts a comment.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let perr = |msg: String| GraphError::Parse { line, msg };
            match n {
                None => {
                    if fields.len() != 2 || fields[0] != "n" {
                        return Err(perr("expected header `n <count>`".into()));
                    }
                    n = Some(fields[1].parse::<usize>().map_err(|e| perr(e.to_string()))?);
                }
                Some(_) => {
                    if !(2..=3).contains(&fields.len()) {
                        return Err(perr(format!("expected `u v [w]`, got {} fields", fields.len())));
                    }
                    let u = fields[0].parse::<usize>().map_err(|e| perr(e.to_string()))?;
                    let v = fields[1].parse::<usize>().map_err(|e| perr(e.to_string()))?;
                    let w = match fields.get(2) {
                        Some(s) => s.parse::<f64>().map_err(|e| perr(e.to_string()))?,
                        None => 1.0,
                    };
                    edges.push((u, v, w));
                }
            }
        }
        let n = n.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
        Self::with_weights(n, &edges)
    }

    /// Render in the edge-list text format. Unit weights are omitted.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for e in &self.edges {
            if e.weight == 1.0 {
                let _ = writeln!(s, "{} {}", e.u, e.v);
            } else {
                let _ = writeln!(s, "{} {} {:?}", e.u, e.v, e.weight);
            }
        }
        s
    }
}

/// Ascending Laplacian eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn node_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `p` (0-based) is the eigenvector of `eigenvalues()[p]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Algebraic connectivity (smallest positive eigenvalue).
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Entry `k` of eigenvector `p`.
    pub fn component(&self, k: usize, p: usize) -> f64 {
        self.eigenvectors[(k, p)]
    }
}

/// Symmetric eigen-solve of an arbitrary symmetric matrix, sorted ascending
/// with the sign of each eigenvector fixed so its largest-magnitude entry is
/// positive.
pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), GraphError> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000).ok_or(GraphError::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() + 1e-12 {
                pivot = r;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, col)] = sign * v[r];
        }
    }
    Ok((values, vectors))
}

/// Laplacian spectral decomposition.
pub fn spectrum(g: &Graph) -> Result<Spectrum, GraphError> {
    let (mut eigenvalues, eigenvectors) = sorted_symmetric_eigen(g.laplacian())?;
    let scale = eigenvalues[eigenvalues.len() - 1].abs().max(1.0);
    if eigenvalues[0].abs() > 1e-9 * scale || eigenvalues[1] <= 1e-9 * scale {
        return Err(GraphError::EigenFailure);
    }
    // The zero eigenvalue is exact for a Laplacian.
    eigenvalues[0] = 0.0;
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Per-node certainty indices `mu_k`, the inverse steady-state variance of
/// the consensus error at node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertaintyIndex(pub Vec<f64>);

impl CertaintyIndex {
    pub fn from_spectrum(s: &Spectrum) -> Self {
        CertaintyIndex((0..s.node_count()).map(|k| certainty_index_unchecked(s, k)).collect())
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn certainty_index_unchecked(s: &Spectrum, k: usize) -> f64 {
    let inv: f64 = (1..s.node_count()).map(|p| s.component(k, p).powi(2) / (2.0 * s.eigenvalues[p])).sum();
    1.0 / inv
}

pub fn certainty_index(s: &Spectrum, k: usize) -> Result<f64, GraphError> {
    if k >= s.node_count() {
        return Err(GraphError::NodeOutOfRange { node: k, n: s.node_count() });
    }
    Ok(certainty_index_unchecked(s, k))
}

/// Lower bound `2 n lambda_2 / (n - 1)` satisfied by every certainty index.
pub fn certainty_lower_bound(s: &Spectrum) -> f64 {
    let n = s.node_count() as f64;
    2.0 * n * s.lambda2() / (n - 1.0)
}

pub const ER_MAX_RETRIES: usize = 1000;

/// G(n, p) random graph, resampled until connected.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ER_MAX_RETRIES {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        match Graph::new(n, &edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::DisconnectedGraph) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::GenerationFailure(ER_MAX_RETRIES))
}

/// Edge probability `1.1 log(n) / n` of the random-graph ensemble used for
/// the threshold-correction study, capped at 1.
pub fn ensemble_edge_probability(n: usize) -> f64 {
    (1.1 * (n as f64).ln() / n as f64).min(1.0)
}

/// Draw one graph of the threshold-correction ensemble: `n` uniform in
/// `3..=10` and edge probability [`ensemble_edge_probability`].
pub fn ensemble_graph(seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=10);
    erdos_renyi(n, ensemble_edge_probability(n), rng.random())
}

/// The nine-node benchmark network.
///
/// Node 0 is the hub, nodes 1-4 are its neighbours (paired 1-2 and 3-4), and
/// nodes 5-8 are leaves hanging off 1-4 respectively. Certainty indices are
/// 8.1 for the hub, about 4.26 for the middle tier and about 1.60 for the
/// leaves.
pub fn benchmark_graph() -> Graph {
    const EDGES: [(usize, usize); 10] =
        [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4), (1, 5), (2, 6), (3, 7), (4, 8)];
    Graph::new(9, &EDGES).expect("benchmark graph is connected")
}
