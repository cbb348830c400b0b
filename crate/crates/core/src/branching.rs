//! The delayed branching process, the marked process with thinning, the
//! martingale limit `W`, and the hopcount fluctuation law.
//!
//! The marked process starts from a uniformly chosen mark; an individual with
//! mark `m` begets `Poisson(λ_m)` children whose marks are i.i.d. mark-law
//! draws. Thinning discards every individual (with its descendants) whose
//! mark already appeared among the surviving individuals in breadth-first
//! order; the surviving generations have the law of the graph's neighborhood
//! shells.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::alias::AliasTable;
use crate::capacities::{CapacitySequence, MixedPoissonLaw};
use crate::distances::{self, shells};
use crate::error::{Error, Result};
use crate::graphgen::{generate_prg, SparseGraph};
use crate::rng::{self, streams};
use crate::stats::{self, ChiSquareResult};

/// Total births allowed in one trajectory before it is flagged as capped.
pub const POPULATION_CAP: u64 = 10_000_000;

/// Positive-`W` tolerance band: smaller values count as extinction.
pub const W_ZERO_TOLERANCE: f64 = 1e-9;

/// Realized sizes `Z_0..Z_t` of a delayed branching process.
#[derive(Debug, Clone)]
pub struct BPTrajectory {
    pub sizes: Vec<u64>,
    /// True when the population cap interrupted the trajectory.
    pub capped: bool,
}

/// Simulates the delayed process: `Z_0 = 1`, the first generation is one draw
/// from `f`, later individuals reproduce i.i.d. according to `g`.
pub fn simulate_delayed_bp(
    f: &MixedPoissonLaw,
    g: &MixedPoissonLaw,
    t: usize,
    seed: u64,
) -> Result<BPTrajectory> {
    let f_sampler = f.alias_sampler()?;
    let g_sampler = g.alias_sampler()?;
    let mut rng = rng::stream(seed, &[streams::BP]);
    Ok(run_bp(&f_sampler, &g_sampler, t, &mut rng))
}

fn run_bp<R: Rng + ?Sized>(
    f_sampler: &AliasTable,
    g_sampler: &AliasTable,
    t: usize,
    rng: &mut R,
) -> BPTrajectory {
    let mut sizes = Vec::with_capacity(t + 1);
    sizes.push(1u64);
    let mut born = 1u64;
    let mut current = 1u64;
    for gen in 1..=t {
        if current == 0 {
            sizes.push(0);
            continue;
        }
        let mut next = 0u64;
        for _ in 0..current {
            let children = if gen == 1 {
                f_sampler.sample(rng) as u64
            } else {
                g_sampler.sample(rng) as u64
            };
            next += children;
            born += children;
            if born > POPULATION_CAP {
                sizes.push(next);
                return BPTrajectory {
                    sizes,
                    capped: true,
                };
            }
        }
        sizes.push(next);
        current = next;
    }
    BPTrajectory {
        sizes,
        capped: false,
    }
}

/// Approximate martingale-limit samples `Z_t / (μ ν^{t-1})`.
#[derive(Debug, Clone)]
pub struct WSamples {
    pub samples: Vec<f64>,
    /// Trajectories that hit the population cap and were re-drawn.
    pub resampled: usize,
}

impl WSamples {
    /// Fraction of samples in the extinction band `W ≤ 1e-9`.
    pub fn extinction_fraction(&self) -> f64 {
        let zero = self
            .samples
            .iter()
            .filter(|&&w| w <= W_ZERO_TOLERANCE)
            .count();
        zero as f64 / self.samples.len() as f64
    }

    pub fn positive(&self) -> Vec<f64> {
        self.samples
            .iter()
            .copied()
            .filter(|&w| w > W_ZERO_TOLERANCE)
            .collect()
    }

    /// CSV `replicate,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replicate,w\n");
        for (i, w) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i, w);
        }
        out
    }
}

/// Smallest depth `t` with `μ ν^{t-1} ≥ 10³`.
pub fn w_depth(mu: f64, nu: f64) -> usize {
    let mut t = 1usize;
    let mut scale = mu;
    while scale < 1e3 && t < 200 {
        scale *= nu;
        t += 1;
    }
    t
}

/// Draws `reps` samples of `Z_t / (μ ν^{t-1})` where `μ` is the mean of `f`
/// and `ν` the mean of `g`. Requires a supercritical `g` and a depth deep
/// enough that `μ ν^{t-1} ≥ 10³`.
pub fn estimate_w(
    f: &MixedPoissonLaw,
    g: &MixedPoissonLaw,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<WSamples> {
    let mu = f.mean();
    let nu = g.mean();
    if !(nu > 1.0) {
        return Err(Error::domain(format!(
            "martingale limit needs supercritical offspring (mean of g = {nu} ≤ 1)"
        )));
    }
    let scale = mu * nu.powi(t as i32 - 1);
    if scale < 1e3 {
        return Err(Error::domain(format!(
            "depth {t} too shallow: μν^(t-1) = {scale:.1} < 1e3"
        )));
    }
    let f_sampler = f.alias_sampler()?;
    let g_sampler = g.alias_sampler()?;
    let per_rep: Vec<(f64, usize)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut attempt = 0u64;
            loop {
                let mut rng = rng::stream(seed, &[streams::BP, rep as u64, attempt]);
                let traj = run_bp(&f_sampler, &g_sampler, t, &mut rng);
                if !traj.capped {
                    return (traj.sizes[t] as f64 / scale, attempt as usize);
                }
                attempt += 1;
            }
        })
        .collect();
    let samples = per_rep.iter().map(|&(w, _)| w).collect();
    let resampled = per_rep.iter().map(|&(_, r)| r).sum();
    Ok(WSamples { samples, resampled })
}

/// Extinction probability of the delayed process: the fixed point `s*` of the
/// `g` generating function, passed through the first-generation law `f`.
pub fn extinction_probability(f: &MixedPoissonLaw, g: &MixedPoissonLaw) -> f64 {
    let gen_fn = |law: &MixedPoissonLaw, s: f64| -> f64 {
        let mut acc = 0.0;
        let mut power = 1.0;
        for &p in law.pmf() {
            acc += p * power;
            power *= s;
        }
        acc + law.tail_mass() * power
    };
    let mut s = 0.0;
    for _ in 0..100_000 {
        let next = gen_fn(g, s);
        if (next - s).abs() < 1e-14 {
            s = next;
            break;
        }
        s = next;
    }
    gen_fn(f, s)
}

/// Limit parameters and realized `W` samples for the fluctuation law.
#[derive(Debug, Clone)]
pub struct LimitLawConfig {
    pub mu: f64,
    pub nu: f64,
    /// `κ = μ / (ν - 1)`.
    pub kappa: f64,
    pub w_samples: Vec<f64>,
}

impl LimitLawConfig {
    pub fn new(mu: f64, nu: f64, w_samples: Vec<f64>) -> Result<Self> {
        if !(nu > 1.0) {
            return Err(Error::domain(format!("limit law needs nu > 1, got {nu}")));
        }
        if !(mu > 0.0) {
            return Err(Error::domain("limit law needs mu > 0"));
        }
        if w_samples.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::domain("W samples must be non-negative"));
        }
        let kappa = mu / (nu - 1.0);
        Ok(LimitLawConfig {
            mu,
            nu,
            kappa,
            w_samples,
        })
    }

    /// Estimated survival probability `q`: the fraction of positive samples.
    pub fn survival_fraction(&self) -> f64 {
        if self.w_samples.is_empty() {
            return 0.0;
        }
        let pos = self
            .w_samples
            .iter()
            .filter(|&&w| w > W_ZERO_TOLERANCE)
            .count();
        pos as f64 / self.w_samples.len() as f64
    }

    fn positive_pairs(&self) -> Result<Vec<(f64, f64)>> {
        let pos: Vec<f64> = self
            .w_samples
            .iter()
            .copied()
            .filter(|&w| w > W_ZERO_TOLERANCE)
            .collect();
        if pos.len() < 2 {
            return Err(Error::domain(
                "no positive W samples: extinct regime has no conditional limit law",
            ));
        }
        Ok(pos.chunks_exact(2).map(|c| (c[0], c[1])).collect())
    }
}

/// `P(R_a > j) = E[exp(-κ ν^{a+j} W₁W₂) | W₁W₂ > 0]`, Monte Carlo over
/// disjoint pairs of positive `W` samples. Returns `(estimate, se)`.
pub fn limit_law_survival(cfg: &LimitLawConfig, a: f64, j: i64) -> Result<(f64, f64)> {
    if !(-1.0 < a && a <= 0.0) {
        return Err(Error::domain(format!("a must lie in (-1, 0], got {a}")));
    }
    let factor = cfg.kappa * cfg.nu.powf(a + j as f64);
    survival_average(cfg, factor)
}

fn survival_average(cfg: &LimitLawConfig, factor: f64) -> Result<(f64, f64)> {
    let pairs = cfg.positive_pairs()?;
    let values: Vec<f64> = pairs
        .iter()
        .map(|&(w1, w2)| (-factor * w1 * w2).exp())
        .collect();
    Ok((stats::mean(&values), stats::se_mean(&values)))
}

/// The theoretical conditional survival curve `t ↦ P(H_N > t | H_N finite)`
/// evaluated at integer `t`, using `σ_N` and `a_N` for this `N`.
pub fn model_survival_curve(
    cfg: &LimitLawConfig,
    n: usize,
    t_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<(u32, f64, f64)>> {
    let sa = distances::sigma_a(n, cfg.nu)?;
    let mut out = Vec::new();
    for t in t_range {
        // κ ν^{a_N + (t - σ_N)} = κ ν^t / N
        let expo = sa.a + (t as i64 - sa.sigma) as f64;
        let factor = cfg.kappa * cfg.nu.powf(expo);
        let (value, se) = survival_average(cfg, factor)?;
        out.push((t, value, se));
    }
    Ok(out)
}

/// CSV `t,survival_model` for a model curve.
pub fn model_curve_csv(curve: &[(u32, f64, f64)]) -> String {
    let mut out = String::from("t,survival_model\n");
    for &(t, v, _) in curve {
        let _ = writeln!(out, "{},{}", t, v);
    }
    out
}

/// One individual of the marked process.
#[derive(Debug, Clone, Copy)]
pub struct NrIndividual {
    pub mark: u32,
    /// Mark already seen among surviving individuals (root of a pruned
    /// subtree).
    pub duplicate: bool,
    /// Survives thinning: not a duplicate and no ancestor was.
    pub alive: bool,
}

/// A realized marked process with thinning bookkeeping.
#[derive(Debug, Clone)]
pub struct NrState {
    pub generations: Vec<Vec<NrIndividual>>,
    /// Raw generation sizes `Z̄_t`.
    pub raw_sizes: Vec<u64>,
    /// Thinned generation sizes `Z̲_t`.
    pub thinned_sizes: Vec<u64>,
    /// Total capacity of generation `t`'s raw individuals. In the survival
    /// formula this quantity enters as `C_{t+1}`, shifted by one.
    pub raw_capacity: Vec<f64>,
    /// Same, restricted to surviving individuals.
    pub thinned_capacity: Vec<f64>,
    /// Duplicates flagged inside each generation.
    pub duplicates_per_generation: Vec<u64>,
    pub capped: bool,
}

impl NrState {
    /// `|Dup_t|`: duplicates over the first `t` generations.
    pub fn duplicates_up_to(&self, t: usize) -> u64 {
        self.duplicates_per_generation.iter().take(t + 1).sum()
    }
}

/// Simulates the marked process for `t` generations. Every raw individual
/// reproduces; thinning flags are tracked alongside.
///
/// Thinning follows breadth-first order (parents in generation order, then
/// birth order): a child of a surviving parent whose mark has been taken by
/// an earlier surviving individual becomes a duplicate, and descendants of
/// non-surviving individuals stay dead. Marks occurring only inside pruned
/// subtrees do not block later individuals, which is what makes the surviving
/// generations agree in law with the graph's shells.
pub fn simulate_nr(
    seq: &CapacitySequence,
    t: usize,
    seed: u64,
    root: Option<usize>,
) -> Result<NrState> {
    let n = seq.len();
    let mut rng = rng::stream(seed, &[streams::NR]);
    let root_mark = match root {
        Some(r) => {
            if r >= n {
                return Err(Error::domain("root mark out of range"));
            }
            r
        }
        None => rng.random_range(0..n),
    };
    let mark_law = seq.mark_law();
    let mut seen = vec![false; n];
    seen[root_mark] = true;

    let mut generations: Vec<Vec<NrIndividual>> = Vec::with_capacity(t + 1);
    generations.push(vec![NrIndividual {
        mark: root_mark as u32,
        duplicate: false,
        alive: true,
    }]);
    let mut born = 1u64;
    let mut capped = false;

    'outer: for _gen in 1..=t {
        let prev = generations.last().unwrap().clone();
        let mut next: Vec<NrIndividual> = Vec::new();
        for parent in &prev {
            let lam = seq.lambda(parent.mark as usize);
            let children = Poisson::new(lam)
                .map_err(|e| Error::domain(format!("invalid Poisson rate: {e}")))?
                .sample(&mut rng) as u64;
            for _ in 0..children {
                let mark = mark_law.sample_index(&mut rng) as u32;
                let (duplicate, alive) = if parent.alive {
                    if seen[mark as usize] {
                        (true, false)
                    } else {
                        seen[mark as usize] = true;
                        (false, true)
                    }
                } else {
                    (false, false)
                };
                next.push(NrIndividual {
                    mark,
                    duplicate,
                    alive,
                });
                born += 1;
                if born > POPULATION_CAP {
                    capped = true;
                    generations.push(next);
                    break 'outer;
                }
            }
        }
        generations.push(next);
    }

    let raw_sizes: Vec<u64> = generations.iter().map(|g| g.len() as u64).collect();
    let thinned_sizes: Vec<u64> = generations
        .iter()
        .map(|g| g.iter().filter(|v| v.alive).count() as u64)
        .collect();
    let raw_capacity: Vec<f64> = generations
        .iter()
        .map(|g| g.iter().map(|v| seq.lambda(v.mark as usize)).sum())
        .collect();
    let thinned_capacity: Vec<f64> = generations
        .iter()
        .map(|g| {
            g.iter()
                .filter(|v| v.alive)
                .map(|v| seq.lambda(v.mark as usize))
                .sum()
        })
        .collect();
    let duplicates_per_generation: Vec<u64> = generations
        .iter()
        .map(|g| g.iter().filter(|v| v.duplicate).count() as u64)
        .collect();

    Ok(NrState {
        generations,
        raw_sizes,
        thinned_sizes,
        raw_capacity,
        thinned_capacity,
        duplicates_per_generation,
        capped,
    })
}

/// Per-marginal comparison of thinned generation sizes against BFS shell
/// sizes on fresh Poissonian graphs.
#[derive(Debug, Clone)]
pub struct TwoSampleReport {
    /// Chi-square result for each generation `1..=t`.
    pub marginals: Vec<ChiSquareResult>,
    pub replicates: usize,
    /// Set when the replicate count is too small for the test to have power.
    pub power_warning: bool,
}

impl TwoSampleReport {
    pub fn min_p_value(&self) -> f64 {
        self.marginals
            .iter()
            .map(|m| m.p_value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compares `(Z̲_1..Z̲_t)` marginals from the thinned process against
/// `(|∂N_1|..|∂N_t|)` from fresh Poissonian graphs, via two-sample chi-square
/// tests per generation.
pub fn shells_vs_thinned_nr(
    seq: &CapacitySequence,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<TwoSampleReport> {
    shells_vs_nr_impl(seq, t, reps, seed, true)
}

/// Negative control: the same comparison with thinning disabled on the
/// process side (raw sizes). Expected to fail decisively.
#[doc(hidden)]
pub fn shells_vs_unthinned_nr(
    seq: &CapacitySequence,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<TwoSampleReport> {
    shells_vs_nr_impl(seq, t, reps, seed, false)
}

fn shells_vs_nr_impl(
    seq: &CapacitySequence,
    t: usize,
    reps: usize,
    seed: u64,
    thinned: bool,
) -> Result<TwoSampleReport> {
    if t == 0 {
        return Err(Error::domain("need at least one generation"));
    }
    let n = seq.len();
    let per_rep: Vec<(Vec<u64>, Vec<usize>)> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<u64>, Vec<usize>)> {
            let state = simulate_nr(seq, t, rng::derive(seed, &[11, rep as u64]), None)?;
            let nr_sizes: Vec<u64> = (1..=t)
                .map(|k| {
                    if thinned {
                        state.thinned_sizes.get(k).copied().unwrap_or(0)
                    } else {
                        state.raw_sizes.get(k).copied().unwrap_or(0)
                    }
                })
                .collect();
            // a single node has only the root shell; the generator needs two
            let g = if n == 1 {
                SparseGraph::from_edges(1, Vec::new())?
            } else {
                generate_prg(seq, rng::derive(seed, &[12, rep as u64]))?
            };
            let mut root_rng = rng::stream(seed, &[streams::ROOT, rep as u64]);
            let root = root_rng.random_range(0..n);
            let sd = shells(&g, root, t, seq)?;
            let shell_sizes: Vec<usize> = (1..=t).map(|k| sd.shells[k].len()).collect();
            Ok((nr_sizes, shell_sizes))
        })
        .collect::<Result<_>>()?;

    let mut nr_counts: Vec<Vec<u64>> = vec![Vec::new(); t];
    let mut shell_counts: Vec<Vec<u64>> = vec![Vec::new(); t];
    let bump = |table: &mut Vec<u64>, value: usize| {
        if table.len() <= value {
            table.resize(value + 1, 0);
        }
        table[value] += 1;
    };
    for (nr_sizes, shell_sizes) in &per_rep {
        for k in 0..t {
            bump(&mut nr_counts[k], nr_sizes[k] as usize);
            bump(&mut shell_counts[k], shell_sizes[k]);
        }
    }
    let marginals: Vec<ChiSquareResult> = (0..t)
        .map(|k| stats::chi_square_two_sample(&nr_counts[k], &shell_counts[k], 5.0))
        .collect();
    Ok(TwoSampleReport {
        marginals,
        replicates: reps,
        power_warning: reps < 1000,
    })
}

/// Monte Carlo estimate of `P(H_N > t)` by direct BFS on fresh Poissonian
/// graphs; the baseline the capacity-formula estimator is checked against.
pub fn direct_survival_probability(
    seq: &CapacitySequence,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<u64> {
            let g = generate_prg(seq, rng::derive(seed, &[21, rep as u64]))?;
            let mut rng = rng::stream(seed, &[streams::ROOT, 77, rep as u64]);
            let a1 = rng.random_range(0..n);
            let a2 = loop {
                let x = rng.random_range(0..n);
                if x != a1 {
                    break x;
                }
            };
            // cap t+1: we only need to know whether H exceeds t
            let d = distances::bfs_distance(&g, a1, a2, t as u32 + 1)?;
            Ok(d.exceeds(t as u32) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = hits as f64 / reps as f64;
    Ok((p, stats::se_proportion(hits, reps as u64)))
}

/// Estimates `P(H_N > t)` through the capacity formula
/// `E[exp(-Σ_{k=2}^{t+1} C̲⁽¹⁾_{⌈k/2⌉} C̲⁽²⁾_{⌊k/2⌋} / l_N)]`.
///
/// `t = 1` is the exact double sum over ordered distinct pairs. For `t ≥ 2`
/// the two shell systems grow alternately on a realized graph under the
/// disjointness conditioning: every cross edge between the systems is
/// conditioned away exactly when its factor enters the product, so the
/// product of the exponential factors is an unbiased conditional Monte Carlo
/// estimate.
pub fn survival_via_capacity_formula(
    seq: &CapacitySequence,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if t == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    let n = seq.len();
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    let l = seq.total();
    if t == 1 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += (-seq.lambda(i) * seq.lambda(j) / l).exp();
                }
            }
        }
        return Ok((acc / (n as f64 * (n as f64 - 1.0)), 0.0));
    }

    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let g = generate_prg(seq, rng::derive(seed, &[22, rep as u64]))?;
            let mut rng = rng::stream(seed, &[streams::ROOT, 78, rep as u64]);
            let a1 = rng.random_range(0..n);
            let a2 = loop {
                let x = rng.random_range(0..n);
                if x != a1 {
                    break x;
                }
            };
            Ok(capacity_formula_replicate(seq, &g, a1, a2, t))
        })
        .collect::<Result<_>>()?;
    Ok((stats::mean(&values), stats::se_mean(&values)))
}

/// One conditional Monte Carlo replicate of the capacity formula.
fn capacity_formula_replicate(
    seq: &CapacitySequence,
    g: &SparseGraph,
    a1: usize,
    a2: usize,
    t: usize,
) -> f64 {
    let l = seq.total();
    let n = g.node_count();
    // membership flags for both shell systems
    let mut in_sys = vec![0u8; n];
    in_sys[a1] |= 1;
    in_sys[a2] |= 2;
    let mut frontier1 = vec![a1 as u32];
    let mut frontier2 = vec![a2 as u32];
    let mut cap1: f64 = seq.lambda(a1);
    let mut cap2: f64 = seq.lambda(a2);
    let mut log_sum = -cap1 * cap2 / l; // k = 2 factor

    for k in 3..=(t + 1) {
        let grow_first = k % 2 == 1;
        let (frontier, own_bit) = if grow_first {
            (&mut frontier1, 1u8)
        } else {
            (&mut frontier2, 2u8)
        };
        let mut next = Vec::new();
        for &u in frontier.iter() {
            for &v in g.neighbors(u as usize) {
                // skipping nodes of either system implements the
                // no-cross-edge conditioning of the earlier factors
                if in_sys[v as usize] == 0 {
                    in_sys[v as usize] |= own_bit;
                    next.push(v);
                }
            }
        }
        let cap_new: f64 = next.iter().map(|&v| seq.lambda(v as usize)).sum();
        *frontier = next;
        if grow_first {
            cap1 = cap_new;
        } else {
            cap2 = cap_new;
        }
        log_sum -= cap1 * cap2 / l;
    }
    log_sum.exp()
}

/// Mean duplicate counts and empty-probability per horizon.
#[derive(Debug, Clone, Copy)]
pub struct DuplicateStats {
    /// Horizon `t` the row refers to (duplicates within generations `0..=t`).
    pub t: usize,
    pub mean_count: f64,
    pub p_empty: f64,
}

/// Monte Carlo estimates of `|Dup_t|` and `P(Dup_t = ∅)` for `t = 1..=t_max`.
pub fn duplicate_stats(
    seq: &CapacitySequence,
    t_max: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<DuplicateStats>> {
    if t_max == 0 {
        return Err(Error::domain("need at least one generation"));
    }
    let per_rep: Vec<Vec<u64>> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<u64>> {
            let state = simulate_nr(seq, t_max, rng::derive(seed, &[23, rep as u64]), None)?;
            Ok((1..=t_max).map(|t| state.duplicates_up_to(t)).collect())
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![0.0f64; t_max + 1];
    let mut empties = vec![0u64; t_max + 1];
    for dups in &per_rep {
        for t in 1..=t_max {
            let d = dups[t - 1];
            sums[t] += d as f64;
            if d == 0 {
                empties[t] += 1;
            }
        }
    }
    Ok((1..=t_max)
        .map(|t| DuplicateStats {
            t,
            mean_count: sums[t] / reps as f64,
            p_empty: empties[t] as f64 / reps as f64,
        })
        .collect())
}
