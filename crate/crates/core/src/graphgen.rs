//! Graph generators for the rank-1 kernels.
//!
//! The Poissonian graph is generated as a Poisson multigraph (one total count,
//! endpoints drawn from the mark law conditioned on distinctness) and then
//! collapsed to simple adjacency; Bernoulli kernels use skip sampling over
//! capacity-sorted rows. Both run in expected `O(N + E)`.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::capacities::CapacitySequence;
use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Edge-probability kernel `h` in `p_ij = h(λ_i λ_j / l_N)`.
#[derive(Clone)]
pub enum ConnectionKernel {
    /// `h(x) = 1 - e^{-x}` (edge present iff a Poisson(x) count is positive).
    Poissonian,
    /// `h(x) = x ∧ 1`.
    ExpectedDegree,
    /// `h(x) = x / (1 + x)`.
    Generalized,
    /// A caller-supplied non-decreasing map with `h(0) = 0` and
    /// `h(x) - x = O(x²)` near zero, certified at construction.
    Custom {
        name: String,
        h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ConnectionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionKernel::Poissonian => write!(f, "Poissonian"),
            ConnectionKernel::ExpectedDegree => write!(f, "ExpectedDegree"),
            ConnectionKernel::Generalized => write!(f, "Generalized"),
            ConnectionKernel::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl ConnectionKernel {
    /// Builds a custom kernel after checking the certificate numerically:
    /// `h(0) = 0`, non-decreasing on a grid up to 10, `|h(x) - x| ≤ C·x²` on
    /// `x ∈ [1e-8, 1e-2]` for a finite constant.
    pub fn custom(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if h(0.0).abs() > 1e-12 {
            return Err(Error::construction("custom kernel must satisfy h(0) = 0"));
        }
        let grid: Vec<f64> = (0..=400).map(|k| 10.0 * k as f64 / 400.0).collect();
        let mut prev = h(0.0);
        for &x in &grid[1..] {
            let v = h(x);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::construction("custom kernel must map into [0, 1]"));
            }
            if v < prev - 1e-12 {
                return Err(Error::construction("custom kernel must be non-decreasing"));
            }
            prev = v;
        }
        let mut c_max = 0.0f64;
        let mut x = 1e-8;
        while x <= 1e-2 {
            let dev = (h(x) - x).abs() / (x * x);
            if !dev.is_finite() {
                return Err(Error::construction(
                    "custom kernel deviation |h(x)-x|/x² diverges",
                ));
            }
            c_max = c_max.max(dev);
            x *= 1.3;
        }
        if c_max > 1e6 {
            return Err(Error::construction(format!(
                "custom kernel fails h(x)-x = O(x²) certificate (C ≈ {c_max:.3e})"
            )));
        }
        Ok(ConnectionKernel::Custom {
            name: name.into(),
            h: Arc::new(h),
        })
    }

    /// Evaluates `h(x)`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ConnectionKernel::Poissonian => -(-x).exp_m1(),
            ConnectionKernel::ExpectedDegree => x.min(1.0),
            ConnectionKernel::Generalized => x / (1.0 + x),
            ConnectionKernel::Custom { h, .. } => h(x),
        }
    }
}

/// Undirected simple graph over nodes `0..N` (0-based internally; the CSV
/// layer is 1-based).
#[derive(Debug, Clone)]
pub struct SparseGraph {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl SparseGraph {
    /// Builds from an edge list; parallel edges collapse, self-loops are
    /// rejected.
    pub fn from_edges(n: usize, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::construction("self-loop in edge list"));
            }
            if e.0 as usize >= n || e.1 as usize >= n {
                return Err(Error::construction("edge endpoint out of range"));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Ok(SparseGraph {
            adjacency,
            edge_count: edges.len(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    /// Checks the structural invariants (symmetry, no loops, no duplicates).
    pub fn validate(&self) -> Result<()> {
        let mut half_sum = 0usize;
        for (u, list) in self.adjacency.iter().enumerate() {
            half_sum += list.len();
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::construction("neighbor list not strictly sorted"));
                }
            }
            for &v in list {
                if v as usize == u {
                    return Err(Error::construction("self-loop"));
                }
                if !self.has_edge(v as usize, u) {
                    return Err(Error::construction("asymmetric adjacency"));
                }
            }
        }
        if half_sum != 2 * self.edge_count {
            return Err(Error::construction("edge count mismatch"));
        }
        Ok(())
    }

    /// Edge-list CSV `u,v` with `u < v`, 1-based, sorted lexicographically.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("u,v\n");
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if (v as usize) > u {
                    let _ = writeln!(out, "{},{}", u + 1, v + 1);
                }
            }
        }
        out
    }
}

/// `p_ij = h(λ_i λ_j / l_N)` for a distinct node pair (0-based).
pub fn edge_probability(
    kernel: &ConnectionKernel,
    seq: &CapacitySequence,
    i: usize,
    j: usize,
) -> Result<f64> {
    if i == j {
        return Err(Error::domain("self-pairs have no edge probability"));
    }
    if i >= seq.len() || j >= seq.len() {
        return Err(Error::domain("node index out of range"));
    }
    Ok(kernel.eval(seq.lambda(i) * seq.lambda(j) / seq.total()))
}

/// Poissonian random graph: pairwise multi-edge counts are independent
/// Poisson(λ_i λ_j / l_N); realized by one total Poisson count with mean
/// `(l_N² - Σλ_i²)/(2 l_N)` whose endpoints are mark-law draws conditioned on
/// distinctness, then collapsed to simple adjacency.
pub fn generate_prg(seq: &CapacitySequence, seed: u64) -> Result<SparseGraph> {
    Ok(generate_prg_counted(seq, seed)?.0)
}

/// As [`generate_prg`], also returning the realized multigraph edge count
/// before the collapse to simple adjacency.
pub fn generate_prg_counted(seq: &CapacitySequence, seed: u64) -> Result<(SparseGraph, u64)> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    let (l, _, nu) = seq.moments();
    let sum_sq = nu * l;
    let mean_total = (l * l - sum_sq) / (2.0 * l);
    let mut rng = rng::stream(seed, &[streams::PRG, n as u64]);
    let total = if mean_total > 0.0 {
        Poisson::new(mean_total)
            .map_err(|e| Error::domain(format!("invalid Poisson mean: {e}")))?
            .sample(&mut rng) as u64
    } else {
        0
    };
    let mark = seq.mark_law();
    let mut edges = Vec::with_capacity(total as usize);
    for _ in 0..total {
        // resample on coincident endpoints; P(i = j) = Σλ² / l² is small
        loop {
            let i = mark.sample_index(&mut rng);
            let j = mark.sample_index(&mut rng);
            if i != j {
                edges.push((i as u32, j as u32));
                break;
            }
        }
    }
    Ok((SparseGraph::from_edges(n, edges)?, total))
}

/// Bernoulli graph for a non-Poissonian kernel: each pair `i < j` present
/// independently with probability `h(λ_i λ_j / l_N)`.
///
/// Rows are processed in capacity-sorted order with geometric skip sampling
/// under a running envelope, expected `O(N + E)`; the result is mapped back
/// to the caller's node order.
pub fn generate_bernoulli(
    seq: &CapacitySequence,
    kernel: &ConnectionKernel,
    seed: u64,
) -> Result<SparseGraph> {
    if matches!(kernel, ConnectionKernel::Poissonian) {
        return Err(Error::domain(
            "Poissonian kernel uses generate_prg, not Bernoulli generation",
        ));
    }
    let n = seq.len();
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    let order = sorted_order(seq);
    let l = seq.total();
    let mut edges = Vec::new();
    for row in 0..n - 1 {
        let mut rng = rng::stream(seed, &[streams::BERNOULLI, n as u64, row as u64]);
        let lam_i = seq.lambda(order[row]);
        skip_sample_row(
            &mut rng,
            row,
            n,
            |col| kernel.eval(lam_i * seq.lambda(order[col]) / l),
            |col| edges.push((order[row] as u32, order[col] as u32)),
        );
    }
    SparseGraph::from_edges(n, edges)
}

/// Indices sorted by capacity descending (stable on ties).
pub(crate) fn sorted_order(seq: &CapacitySequence) -> Vec<usize> {
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by(|&a, &b| {
        seq.lambda(b)
            .partial_cmp(&seq.lambda(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

/// Walks columns `row+1..n` with geometric jumps under the running upper
/// bound `p̄` (valid because `p` is non-increasing along the sorted row),
/// accepting each landed candidate with `p/p̄`.
pub(crate) fn skip_sample_row<R: Rng + ?Sized>(
    rng: &mut R,
    row: usize,
    n: usize,
    prob: impl Fn(usize) -> f64,
    mut emit: impl FnMut(usize),
) {
    let mut col = row + 1;
    if col >= n {
        return;
    }
    let mut bound = prob(col).min(1.0);
    while col < n {
        if bound <= 0.0 {
            break;
        }
        if bound < 1.0 {
            // jump to the next candidate under Bernoulli(bound) trials
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            let skip = (u.ln() / (1.0 - bound).ln()).floor() as usize;
            col = col.saturating_add(skip);
            if col >= n {
                break;
            }
        }
        let p = prob(col).min(1.0);
        debug_assert!(p <= bound + 1e-12);
        if rng.random::<f64>() * bound < p {
            emit(col);
        }
        bound = p;
        col += 1;
    }
}

/// Expected degree of node `i`: `Σ_{j≠i} h(λ_i λ_j / l_N)`.
pub fn expected_degree(seq: &CapacitySequence, kernel: &ConnectionKernel, i: usize) -> Result<f64> {
    if i >= seq.len() {
        return Err(Error::domain("node index out of range"));
    }
    let l = seq.total();
    let lam_i = seq.lambda(i);
    let mut sum = 0.0;
    for j in 0..seq.len() {
        if j != i {
            sum += kernel.eval(lam_i * seq.lambda(j) / l);
        }
    }
    Ok(sum)
}
