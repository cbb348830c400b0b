//! Per-edge coupling of the Poissonian graph with any other rank-1 kernel.
//!
//! Both graphs are generated from shared randomness so that each pair
//! disagrees with probability exactly `|p_ij - p'_ij|`. The joint outcome per
//! pair is decided by one uniform keyed on `(seed, i, j)`, so the coupling is
//! independent of enumeration order; pairs are enumerated by skip sampling
//! under the envelope `max(p_ij, p'_ij)`.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::capacities::CapacitySequence;
use crate::distances::bfs_distance;
use crate::error::{Error, Result};
use crate::graphgen::{skip_sample_row, sorted_order, ConnectionKernel, SparseGraph};
use crate::rng::{self, streams};
use crate::stats;

/// Default threshold exponent in `c_N = N^ξ` for the high-capacity coupling
/// event.
pub const DEFAULT_XI: f64 = 0.1;

/// Joint outcome of one coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledEdge {
    /// Edge indicator in the Poissonian graph.
    pub x: bool,
    /// Edge indicator in the comparison graph.
    pub x_prime: bool,
    /// Mismatch indicator, `1` exactly when the two differ.
    pub k: bool,
}

/// Classical maximal coupling of two Bernoulli variables from one uniform:
/// `u < min(p, p')` gives both edges, `min ≤ u < max` gives only the graph
/// with the larger probability (a mismatch), `u ≥ max` gives neither.
pub fn couple_edge(p: f64, p_prime: f64, u: f64) -> Result<CoupledEdge> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&p_prime) {
        return Err(Error::domain("probabilities must lie in [0, 1]"));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain("coupling uniform must lie in [0, 1)"));
    }
    let q = p.min(p_prime);
    let big = p.max(p_prime);
    Ok(if u < q {
        CoupledEdge {
            x: true,
            x_prime: true,
            k: false,
        }
    } else if u < big {
        CoupledEdge {
            x: p >= p_prime,
            x_prime: p_prime > p,
            k: true,
        }
    } else {
        CoupledEdge {
            x: false,
            x_prime: false,
            k: false,
        }
    })
}

/// Mismatch bookkeeping for one coupled generation.
#[derive(Debug, Clone)]
pub struct MismatchReport {
    /// Per-node mismatch counts `K_i = Σ_{j≠i} K_ij`.
    pub k_i: Vec<u64>,
    pub total_mismatches: u64,
    /// Indicator that no node above the capacity threshold was miscoupled.
    pub a_n: bool,
    pub c_n: f64,
    pub xi: f64,
}

impl MismatchReport {
    /// CSV `node,lambda,k_i` (1-based nodes).
    pub fn to_csv(&self, seq: &CapacitySequence) -> String {
        let mut out = String::from("node,lambda,k_i\n");
        for (i, &k) in self.k_i.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, seq.lambda(i), k);
        }
        out
    }
}

/// Generates the Poissonian graph and a comparison graph jointly, with the
/// default capacity threshold exponent.
pub fn coupled_generate(
    seq: &CapacitySequence,
    kernel_prime: &ConnectionKernel,
    seed: u64,
) -> Result<(SparseGraph, SparseGraph, MismatchReport)> {
    coupled_generate_with_xi(seq, kernel_prime, seed, DEFAULT_XI)
}

/// As [`coupled_generate`] with an explicit `ξ` in `c_N = N^ξ`.
pub fn coupled_generate_with_xi(
    seq: &CapacitySequence,
    kernel_prime: &ConnectionKernel,
    seed: u64,
    xi: f64,
) -> Result<(SparseGraph, SparseGraph, MismatchReport)> {
    if matches!(kernel_prime, ConnectionKernel::Poissonian) {
        return Err(Error::domain(
            "comparison kernel must differ from the Poissonian reference",
        ));
    }
    if !(xi > 0.0) {
        return Err(Error::domain("xi must be positive"));
    }
    let n = seq.len();
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    let l = seq.total();
    let order = sorted_order(seq);
    let h_p = ConnectionKernel::Poissonian;

    let mut edges_p: Vec<(u32, u32)> = Vec::new();
    let mut edges_prime: Vec<(u32, u32)> = Vec::new();
    let mut k_i = vec![0u64; n];
    let mut total_mismatches = 0u64;

    for row in 0..n - 1 {
        let mut row_rng = rng::stream(seed, &[streams::COUPLE_ROW, n as u64, row as u64]);
        let lam_i = seq.lambda(order[row]);
        let mut hits: Vec<usize> = Vec::new();
        skip_sample_row(
            &mut row_rng,
            row,
            n,
            |col| {
                let x = lam_i * seq.lambda(order[col]) / l;
                h_p.eval(x).max(kernel_prime.eval(x))
            },
            |col| hits.push(col),
        );
        for col in hits {
            let (i, j) = (order[row], order[col]);
            let x = lam_i * seq.lambda(j) / l;
            let p = h_p.eval(x);
            let p_prime = kernel_prime.eval(x);
            let envelope = p.max(p_prime);
            // one uniform per pair decides the outcome inside the envelope
            let u = rng::pair_uniform(seed, i, j) * envelope;
            let outcome = couple_edge(p, p_prime, u)?;
            if outcome.x {
                edges_p.push((i as u32, j as u32));
            }
            if outcome.x_prime {
                edges_prime.push((i as u32, j as u32));
            }
            if outcome.k {
                k_i[i] += 1;
                k_i[j] += 1;
                total_mismatches += 1;
            }
        }
    }

    let c_n = (n as f64).powf(xi);
    let a_n = (0..n).all(|i| seq.lambda(i) <= c_n || k_i[i] == 0);
    let report = MismatchReport {
        k_i,
        total_mismatches,
        a_n,
        c_n,
        xi,
    };
    Ok((
        SparseGraph::from_edges(n, edges_p)?,
        SparseGraph::from_edges(n, edges_prime)?,
        report,
    ))
}

/// Estimates `P(H_N ≠ H'_N)` over coupled replicates; infinite distances on
/// both sides count as equal. Returns `(estimate, se)`.
pub fn estimate_coupling_failure(
    seq: &CapacitySequence,
    kernel_prime: &ConnectionKernel,
    reps: usize,
    pairs_per_rep: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps == 0 || pairs_per_rep == 0 {
        return Err(Error::domain("need at least one replicate and pair"));
    }
    let n = seq.len();
    let cap = n as u32; // distances cannot exceed N - 1, so nothing censors
    let mismatched: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<u64> {
            let (g, g_prime, _) =
                coupled_generate(seq, kernel_prime, rng::derive(seed, &[31, rep as u64]))?;
            let mut rng = rng::stream(seed, &[streams::ROOT, 79, rep as u64]);
            let mut bad = 0u64;
            for _ in 0..pairs_per_rep {
                let a1 = rng.random_range(0..n);
                let a2 = loop {
                    let x = rng.random_range(0..n);
                    if x != a1 {
                        break x;
                    }
                };
                let h = bfs_distance(&g, a1, a2, cap)?;
                let h_prime = bfs_distance(&g_prime, a1, a2, cap)?;
                let equal = match (h.finite(), h_prime.finite()) {
                    (Some(a), Some(b)) => a == b,
                    (None, None) => true,
                    _ => false,
                };
                if !equal {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let total = (reps * pairs_per_rep) as u64;
    let p = mismatched as f64 / total as f64;
    Ok((p, stats::se_proportion(mismatched, total)))
}

/// Empirical constant `C' = max over pairs of |p_ij - p'_ij| · l_N² / (λ_i² λ_j²)`,
/// finite for any pair of kernels with the quadratic small-`x` certificate.
pub fn mismatch_bound_check(
    seq: &CapacitySequence,
    kernel_prime: &ConnectionKernel,
) -> Result<f64> {
    let n = seq.len();
    let l = seq.total();
    let h_p = ConnectionKernel::Poissonian;
    let mut c_max = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = seq.lambda(i) * seq.lambda(j) / l;
            if x == 0.0 {
                return Err(Error::domain("zero capacity product in mismatch bound"));
            }
            let dev = (h_p.eval(x) - kernel_prime.eval(x)).abs() / (x * x);
            c_max = c_max.max(dev);
        }
    }
    Ok(c_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacities::CapacitySequence;

    #[test]
    fn couple_edge_examples() {
        // equal probabilities never mismatch
        for u in [0.0, 0.3, 0.9] {
            let e = couple_edge(0.4, 0.4, u).unwrap();
            assert!(!e.k);
            assert_eq!(e.x, e.x_prime);
        }
        // p = 1, p' = 0: always (1, 0, 1)
        for u in [0.0, 0.5, 0.99] {
            let e = couple_edge(1.0, 0.0, u).unwrap();
            assert_eq!(
                e,
                CoupledEdge {
                    x: true,
                    x_prime: false,
                    k: true
                }
            );
        }
        // region structure for p = 0.3, p' = 0.5
        assert_eq!(
            couple_edge(0.3, 0.5, 0.1).unwrap(),
            CoupledEdge {
                x: true,
                x_prime: true,
                k: false
            }
        );
        assert_eq!(
            couple_edge(0.3, 0.5, 0.4).unwrap(),
            CoupledEdge {
                x: false,
                x_prime: true,
                k: true
            }
        );
        assert_eq!(
            couple_edge(0.3, 0.5, 0.7).unwrap(),
            CoupledEdge {
                x: false,
                x_prime: false,
                k: false
            }
        );
        assert!(couple_edge(1.2, 0.5, 0.1).is_err());
        assert!(couple_edge(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn couple_edge_grid_frequencies() {
        // exhaustive midpoint grid of 1e6 points reproduces the marginals
        // and the mismatch frequency |p - p'| to 1e-6
        let (p, p_prime) = (0.3, 0.5);
        let grid = 1_000_000u64;
        let (mut x_cnt, mut xp_cnt, mut k_cnt) = (0u64, 0u64, 0u64);
        for g in 0..grid {
            let u = (g as f64 + 0.5) / grid as f64;
            let e = couple_edge(p, p_prime, u).unwrap();
            x_cnt += e.x as u64;
            xp_cnt += e.x_prime as u64;
            k_cnt += e.k as u64;
        }
        let gf = grid as f64;
        assert!((x_cnt as f64 / gf - p).abs() <= 1e-6);
        assert!((xp_cnt as f64 / gf - p_prime).abs() <= 1e-6);
        assert!((k_cnt as f64 / gf - 0.2).abs() <= 1e-6);
    }

    #[test]
    fn identical_kernel_coupling_never_mismatches() {
        let seq = CapacitySequence::new(vec![2.0; 200]).unwrap();
        let poisson_like =
            ConnectionKernel::custom("poisson-equivalent", |x: f64| -(-x).exp_m1()).unwrap();
        let (g, g_prime, report) = coupled_generate(&seq, &poisson_like, 17).unwrap();
        assert_eq!(report.total_mismatches, 0);
        assert!(report.a_n);
        assert_eq!(g.to_edge_csv(), g_prime.to_edge_csv());
    }

    #[test]
    fn mismatch_report_recounts_structurally() {
        let seq = CapacitySequence::new(vec![3.0, 0.5, 1.0, 2.0, 1.5, 2.5, 0.75, 1.2]).unwrap();
        let (g, g_prime, report) =
            coupled_generate(&seq, &ConnectionKernel::Generalized, 23).unwrap();
        let n = seq.len();
        let mut recount = vec![0u64; n];
        let mut total = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                if g.has_edge(i, j) != g_prime.has_edge(i, j) {
                    recount[i] += 1;
                    recount[j] += 1;
                    total += 1;
                }
            }
        }
        assert_eq!(recount, report.k_i);
        assert_eq!(total, report.total_mismatches);
    }

    #[test]
    fn coupling_failure_zero_for_identical_kernels() {
        let seq = CapacitySequence::new(vec![2.0; 100]).unwrap();
        let poisson_like =
            ConnectionKernel::custom("poisson-equivalent", |x: f64| -(-x).exp_m1()).unwrap();
        let (p, _) = estimate_coupling_failure(&seq, &poisson_like, 20, 2, 3).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn kernel_deviation_ratios_on_grid() {
        // |1-e^{-x} - x/(1+x)| / x² ≤ 1 on (0, 10]
        let hp = ConnectionKernel::Poissonian;
        let hg = ConnectionKernel::Generalized;
        let he = ConnectionKernel::ExpectedDegree;
        let mut x = 1e-4;
        while x <= 10.0 {
            let grg = (hp.eval(x) - hg.eval(x)).abs() / (x * x);
            assert!(grg <= 1.0, "x={x}: ratio {grg}");
            if x <= 1.0 {
                let edrg = (he.eval(x) - hp.eval(x)).abs() / (x * x);
                assert!(edrg <= 0.5 + 1e-12, "x={x}: ratio {edrg}");
            }
            x *= 1.1;
        }
    }

    #[test]
    fn mismatch_bound_finite_and_zero_cases() {
        let seq = CapacitySequence::new(vec![0.5, 1.0, 2.0, 4.0]).unwrap();
        let c = mismatch_bound_check(&seq, &ConnectionKernel::Generalized).unwrap();
        assert!(c.is_finite() && c > 0.0 && c <= 1.0);
        let poisson_like =
            ConnectionKernel::custom("poisson-equivalent", |x: f64| -(-x).exp_m1()).unwrap();
        let c = mismatch_bound_check(&seq, &poisson_like).unwrap();
        assert!(c < 1e-12);
    }

    #[test]
    fn coupled_generation_is_deterministic() {
        let seq = CapacitySequence::new(vec![1.0, 2.0, 3.0, 0.5, 1.5, 2.5]).unwrap();
        let (a1, b1, r1) = coupled_generate(&seq, &ConnectionKernel::Generalized, 99).unwrap();
        let (a2, b2, r2) = coupled_generate(&seq, &ConnectionKernel::Generalized, 99).unwrap();
        assert_eq!(a1.to_edge_csv(), a2.to_edge_csv());
        assert_eq!(b1.to_edge_csv(), b2.to_edge_csv());
        assert_eq!(r1.k_i, r2.k_i);
    }
}
