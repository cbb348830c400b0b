//! BFS shells, hopcount sampling and empirical survival curves.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;

use crate::capacities::CapacitySequence;
use crate::error::{Error, Result};
use crate::graphgen::SparseGraph;
use crate::rng::{self, streams};

/// Result of a distance query. Censoring (search stopped at the hop cap) is
/// reported separately from true disconnection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Finite(u32),
    Disconnected,
    /// Distance exceeds the cap that was in force.
    Censored {
        cap: u32,
    },
}

impl Distance {
    pub fn is_finite(&self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn finite(&self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(*d),
            _ => None,
        }
    }

    /// True when the (possibly censored) distance exceeds `t`.
    pub fn exceeds(&self, t: u32) -> bool {
        match self {
            Distance::Finite(d) => *d > t,
            _ => true,
        }
    }
}

/// Exact graph distance between two distinct nodes, up to `cap` hops,
/// computed by bidirectional BFS expanding the smaller frontier.
pub fn bfs_distance(g: &SparseGraph, a1: usize, a2: usize, cap: u32) -> Result<Distance> {
    if a1 == a2 {
        return Err(Error::domain("distance requires distinct nodes"));
    }
    let n = g.node_count();
    if a1 >= n || a2 >= n {
        return Err(Error::domain("node index out of range"));
    }
    const UNSET: u32 = u32::MAX;
    let mut dist1 = vec![UNSET; n];
    let mut dist2 = vec![UNSET; n];
    dist1[a1] = 0;
    dist2[a2] = 0;
    let mut frontier1 = vec![a1 as u32];
    let mut frontier2 = vec![a2 as u32];
    let mut d1 = 0u32;
    let mut d2 = 0u32;

    while !frontier1.is_empty() && !frontier2.is_empty() {
        if d1 + d2 >= cap {
            return Ok(Distance::Censored { cap });
        }
        let expand_first = frontier1.len() <= frontier2.len();
        let (frontier, dist_own, dist_other, d_own) = if expand_first {
            (&mut frontier1, &mut dist1, &dist2, &mut d1)
        } else {
            (&mut frontier2, &mut dist2, &dist1, &mut d2)
        };
        let mut next = Vec::new();
        let mut best = u32::MAX;
        for &u in frontier.iter() {
            for &v in g.neighbors(u as usize) {
                let v = v as usize;
                if dist_own[v] == UNSET {
                    dist_own[v] = *d_own + 1;
                    next.push(v as u32);
                    if dist_other[v] != UNSET {
                        best = best.min(*d_own + 1 + dist_other[v]);
                    }
                }
            }
        }
        *d_own += 1;
        if best != u32::MAX {
            return Ok(Distance::Finite(best));
        }
        *frontier = next;
    }
    Ok(Distance::Disconnected)
}

/// Default censoring cap: far beyond the tight fluctuation window.
pub fn default_cap(n: usize, nu: f64) -> u32 {
    if nu > 1.0 {
        let log_nu = (n as f64).ln() / nu.ln();
        (3.0 * log_nu.ceil() + 20.0) as u32
    } else {
        n as u32
    }
}

/// BFS layering around a root with per-shell capacities.
#[derive(Debug, Clone)]
pub struct ShellDecomposition {
    pub root: usize,
    /// `shells[k]` is the set of nodes at distance exactly `k`; trailing
    /// shells are empty once the component is exhausted.
    pub shells: Vec<Vec<u32>>,
    /// Total capacity of each shell.
    pub shell_capacities: Vec<f64>,
}

impl ShellDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.shells.iter().map(|s| s.len()).collect()
    }
}

/// Exact neighborhood shells `∂N_0..∂N_{t_max}` of `root`.
pub fn shells(
    g: &SparseGraph,
    root: usize,
    t_max: usize,
    seq: &CapacitySequence,
) -> Result<ShellDecomposition> {
    if root >= g.node_count() {
        return Err(Error::domain("root out of range"));
    }
    if seq.len() != g.node_count() {
        return Err(Error::domain("capacity sequence does not match graph size"));
    }
    let mut visited = vec![false; g.node_count()];
    visited[root] = true;
    let mut shells_out: Vec<Vec<u32>> = Vec::with_capacity(t_max + 1);
    shells_out.push(vec![root as u32]);
    for _ in 0..t_max {
        let frontier = shells_out.last().unwrap();
        let mut next = Vec::new();
        for &u in frontier {
            for &v in g.neighbors(u as usize) {
                if !visited[v as usize] {
                    visited[v as usize] = true;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        shells_out.push(next);
    }
    let shell_capacities = shells_out
        .iter()
        .map(|shell| shell.iter().map(|&v| seq.lambda(v as usize)).sum())
        .collect();
    Ok(ShellDecomposition {
        root,
        shells: shells_out,
        shell_capacities,
    })
}

/// One sampled node pair with its distance.
#[derive(Debug, Clone, Copy)]
pub struct HopcountEntry {
    pub graph_index: usize,
    pub a1: u32,
    pub a2: u32,
    pub distance: Distance,
}

/// Hopcounts sampled over graph replicates.
#[derive(Debug, Clone)]
pub struct HopcountSample {
    pub entries: Vec<HopcountEntry>,
    pub n: usize,
    pub nu_used: f64,
}

/// Samples `pairs_per_graph` uniform ordered distinct pairs per replicate
/// (without pair repetition inside a replicate) and records their distances.
/// The censoring cap is `3⌈log_ν N⌉ + 20` when `ν > 1`.
pub fn sample_hopcounts<I>(
    graphs: I,
    pairs_per_graph: usize,
    seed: u64,
    nu: f64,
) -> Result<HopcountSample>
where
    I: IntoIterator<Item = SparseGraph>,
{
    if pairs_per_graph == 0 {
        return Err(Error::domain("need at least one pair per graph"));
    }
    let mut entries = Vec::new();
    let mut n = 0usize;
    for (graph_index, g) in graphs.into_iter().enumerate() {
        n = g.node_count();
        if n < 2 {
            return Err(Error::domain("graphs must have at least two nodes"));
        }
        if pairs_per_graph > n * (n - 1) {
            return Err(Error::domain(format!(
                "cannot draw {pairs_per_graph} distinct ordered pairs from {n} nodes"
            )));
        }
        let cap = default_cap(n, nu);
        let mut rng = rng::stream(seed, &[streams::PAIRS, graph_index as u64]);
        let mut used: HashSet<(u32, u32)> = HashSet::with_capacity(pairs_per_graph);
        while used.len() < pairs_per_graph {
            let a1 = rng.random_range(0..n) as u32;
            let a2 = rng.random_range(0..n) as u32;
            if a1 == a2 || used.contains(&(a1, a2)) {
                continue;
            }
            used.insert((a1, a2));
            let distance = bfs_distance(&g, a1 as usize, a2 as usize, cap)?;
            entries.push(HopcountEntry {
                graph_index,
                a1,
                a2,
                distance,
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::domain("no graphs supplied"));
    }
    Ok(HopcountSample {
        entries,
        n,
        nu_used: nu,
    })
}

/// `σ_N = ⌊log_ν N⌋` and its fractional defect `a_N = σ_N - log_ν N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaA {
    pub sigma: i64,
    pub a: f64,
}

/// Computes `σ_N` and `a_N ∈ (-1, 0]`.
pub fn sigma_a(n: usize, nu: f64) -> Result<SigmaA> {
    if n < 2 {
        return Err(Error::domain("need N ≥ 2"));
    }
    if !(nu > 1.0) {
        return Err(Error::domain(format!(
            "sigma/a defined only in the supercritical regime nu > 1, got {nu}"
        )));
    }
    let x = (n as f64).ln() / nu.ln();
    // snap to an integer when N = ν^k up to floating noise, so a = 0 exactly
    let rounded = x.round();
    let x = if (x - rounded).abs() < 1e-9 {
        rounded
    } else {
        x
    };
    let sigma = x.floor();
    Ok(SigmaA {
        sigma: sigma as i64,
        a: sigma - x,
    })
}

/// The size ladder `N_k = round(M ν^{2k})`, along which `a_{N_k}` is constant
/// up to rounding.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub sizes: Vec<u64>,
    pub a_values: Vec<f64>,
    /// Max minus min of the `a_{N_k}`.
    pub a_spread: f64,
}

pub fn ladder(m: usize, nu: f64, k_max: usize) -> Result<Ladder> {
    if m < 2 {
        return Err(Error::domain("ladder base must be at least 2"));
    }
    if !(nu > 1.0) {
        return Err(Error::domain("ladder needs nu > 1"));
    }
    let mut sizes = Vec::with_capacity(k_max + 1);
    let mut a_values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let exact = m as f64 * nu.powi(2 * k as i32);
        if !(exact < 9.0e15) {
            return Err(Error::Range(format!("ladder size overflows at k = {k}")));
        }
        let n_k = exact.round() as u64;
        sizes.push(n_k);
        a_values.push(sigma_a(n_k as usize, nu)?.a);
    }
    let max = a_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = a_values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Ladder {
        sizes,
        a_values,
        a_spread: max - min,
    })
}

/// Empirical survival function of the hopcount, with cluster-robust standard
/// errors (clustered by graph replicate).
#[derive(Debug, Clone)]
pub struct EmpiricalSurvival {
    /// Count of finite entries at each distance value.
    pub counts: Vec<u64>,
    pub total: u64,
    pub infinite_count: u64,
    /// Per-graph `(finite distances, infinite count)` used for clustering.
    clusters: Vec<(Vec<u32>, u64)>,
}

impl EmpiricalSurvival {
    /// Largest observed finite distance.
    pub fn max_finite(&self) -> Option<u32> {
        if self.counts.is_empty() {
            None
        } else {
            Some(self.counts.len() as u32 - 1)
        }
    }

    pub fn n_finite(&self) -> u64 {
        self.total - self.infinite_count
    }

    /// Unconditional `P(H > t)`; censored and disconnected entries count as
    /// exceeding every finite `t`.
    pub fn survival(&self, t: u32) -> f64 {
        let gt = self.count_finite_above(t) + self.infinite_count;
        gt as f64 / self.total as f64
    }

    /// `P(H > t | H finite)`; `None` when every entry is infinite.
    pub fn conditional_survival(&self, t: u32) -> Option<f64> {
        let nf = self.n_finite();
        if nf == 0 {
            return None;
        }
        Some(self.count_finite_above(t) as f64 / nf as f64)
    }

    fn count_finite_above(&self, t: u32) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(d, _)| d as u32 > t)
            .map(|(_, &c)| c)
            .sum()
    }

    /// Cluster-robust standard error of the survival estimate at `t`.
    pub fn survival_se(&self, t: u32, conditional: bool) -> f64 {
        let mut cluster_sums = Vec::with_capacity(self.clusters.len());
        let mut cluster_sizes = Vec::with_capacity(self.clusters.len());
        for (finite, inf) in &self.clusters {
            let mut hits = finite.iter().filter(|&&d| d > t).count() as f64;
            let mut size = finite.len() as f64;
            if !conditional {
                hits += *inf as f64;
                size += *inf as f64;
            }
            if size > 0.0 || !conditional {
                cluster_sums.push(hits);
                cluster_sizes.push(size);
            }
        }
        let n: f64 = cluster_sizes.iter().sum();
        if n == 0.0 {
            return f64::NAN;
        }
        let p = cluster_sums.iter().sum::<f64>() / n;
        let g = cluster_sums.len() as f64;
        if g < 2.0 {
            return (p * (1.0 - p) / n).sqrt();
        }
        let ss: f64 = cluster_sums
            .iter()
            .zip(&cluster_sizes)
            .map(|(&s, &m)| (s - m * p) * (s - m * p))
            .sum();
        (g / (g - 1.0) * ss).sqrt() / n
    }

    /// CSV `t,survival,se,n_finite,n_total` for `t = 0..=max_finite`.
    pub fn to_csv(&self, conditional: bool) -> String {
        let mut out = String::from("t,survival,se,n_finite,n_total\n");
        let t_end = self.max_finite().unwrap_or(0);
        for t in 0..=t_end {
            let s = if conditional {
                self.conditional_survival(t).unwrap_or(f64::NAN)
            } else {
                self.survival(t)
            };
            let se = self.survival_se(t, conditional);
            let _ = writeln!(out, "{},{},{},{},{}", t, s, se, self.n_finite(), self.total);
        }
        out
    }
}

/// Builds the empirical survival curves from a hopcount sample.
pub fn survival(sample: &HopcountSample) -> Result<EmpiricalSurvival> {
    if sample.entries.is_empty() {
        return Err(Error::domain("empty hopcount sample"));
    }
    let mut counts: Vec<u64> = Vec::new();
    let mut infinite_count = 0u64;
    let n_graphs = sample.entries.iter().map(|e| e.graph_index).max().unwrap() + 1;
    let mut clusters: Vec<(Vec<u32>, u64)> = vec![(Vec::new(), 0); n_graphs];
    for e in &sample.entries {
        match e.distance {
            Distance::Finite(d) => {
                if counts.len() <= d as usize {
                    counts.resize(d as usize + 1, 0);
                }
                counts[d as usize] += 1;
                clusters[e.graph_index].0.push(d);
            }
            _ => {
                infinite_count += 1;
                clusters[e.graph_index].1 += 1;
            }
        }
    }
    Ok(EmpiricalSurvival {
        counts,
        total: sample.entries.len() as u64,
        infinite_count,
        clusters,
    })
}
