//! Capacity sequences, their derived mixed-Poisson laws, and the
//! convergence-condition checkers.
//!
//! A capacity sequence assigns a positive weight `λ_i` to every node. From it
//! we derive the mark law `P(M = m) = λ_m / l_N`, the first-generation
//! offspring law `f` and the size-biased later-generation law `g`, and check
//! how close the finite-`N` quantities are to their model limits.

use std::fmt::Write as _;

use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{self, streams};

/// Tail mass allowed in a truncated law when the caller picked `n_max`
/// explicitly.
pub const TAIL_CEILING: f64 = 1e-8;

/// Target tail mass for adaptive truncation.
pub const ADAPTIVE_TAIL_TARGET: f64 = 1e-10;

/// A survival function `F̄(x) = 1 - F(x)` for positive capacities.
#[derive(Debug, Clone, PartialEq)]
pub enum SurvivalModel {
    /// `F̄(x) = min(1, c·x^{1-τ})`, a pure power tail with support minimum
    /// `c^{1/(τ-1)}`. Requires `τ > 3` so capacities have finite variance.
    Pareto { tau: f64, c: f64 },
    /// All mass at a single point `λ > 0`.
    Constant { lambda: f64 },
    /// A right-continuous step survival function given as `(x, F̄(x))` points.
    Table { points: Vec<(f64, f64)> },
}

impl SurvivalModel {
    pub fn pareto(tau: f64, c: f64) -> Result<Self> {
        if !(tau > 3.0) {
            return Err(Error::construction(format!(
                "pareto needs tau > 3, got {tau}"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::construction(format!("pareto needs c > 0, got {c}")));
        }
        Ok(SurvivalModel::Pareto { tau, c })
    }

    /// Pareto parameterized by its support minimum: `c = x_min^{τ-1}`.
    pub fn pareto_from_support_min(tau: f64, x_min: f64) -> Result<Self> {
        if !(x_min > 0.0) {
            return Err(Error::construction("support minimum must be positive"));
        }
        Self::pareto(tau, x_min.powf(tau - 1.0))
    }

    pub fn constant(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::construction(format!(
                "constant capacity must be positive and finite, got {lambda}"
            )));
        }
        Ok(SurvivalModel::Constant { lambda })
    }

    /// Step survival function. The first point must have `F̄ = 1`, values must
    /// be non-increasing in `[0, 1]`, abscissae strictly increasing, and the
    /// last value must be `0` so that the distribution is proper.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::construction("table needs at least two points"));
        }
        if points[0].1 != 1.0 {
            return Err(Error::construction("table survival must start at 1"));
        }
        if points[points.len() - 1].1 != 0.0 {
            return Err(Error::construction("table survival must end at 0"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::construction(
                    "table x-values must be strictly increasing",
                ));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::construction("table survival must be non-increasing"));
            }
        }
        if points
            .iter()
            .any(|&(x, v)| !(0.0..=1.0).contains(&v) || !x.is_finite() || x < 0.0)
        {
            return Err(Error::construction("table entries out of range"));
        }
        Ok(SurvivalModel::Table { points })
    }

    /// Generalized inverse `F̄^{-1}(u) = inf{s : F̄(s) ≤ u}` for `u ∈ (0, 1]`.
    ///
    /// For the Pareto variant this is `(c/u)^{1/(τ-1)}`, which self-clips at
    /// the support minimum when `u = 1`.
    pub fn inverse_survival(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!(
                "inverse survival needs u in (0, 1], got {u}"
            )));
        }
        Ok(match self {
            SurvivalModel::Pareto { tau, c } => (c / u).powf(1.0 / (tau - 1.0)),
            SurvivalModel::Constant { lambda } => *lambda,
            SurvivalModel::Table { points } => {
                // first abscissa whose survival value drops to ≤ u
                points
                    .iter()
                    .find(|&&(_, v)| v <= u)
                    .map(|&(x, _)| x)
                    .expect("table ends at survival 0")
            }
        })
    }

    /// `F̄(x)` for `x ≥ 0`.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            SurvivalModel::Pareto { tau, c } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (c * x.powf(1.0 - tau)).min(1.0)
                }
            }
            SurvivalModel::Constant { lambda } => {
                if x < *lambda {
                    1.0
                } else {
                    0.0
                }
            }
            SurvivalModel::Table { points } => {
                let mut v = 1.0;
                for &(px, pv) in points {
                    if px <= x {
                        v = pv;
                    } else {
                        break;
                    }
                }
                v
            }
        }
    }

    /// Smallest capacity the model can produce (via `F̄^{-1}` on `(0, 1]`).
    pub fn support_min(&self) -> f64 {
        match self {
            SurvivalModel::Pareto { tau, c } => c.powf(1.0 / (tau - 1.0)),
            SurvivalModel::Constant { lambda } => *lambda,
            SurvivalModel::Table { points } => points
                .iter()
                .find(|&&(_, v)| v < 1.0)
                .map(|&(x, _)| x)
                .expect("table ends at survival 0"),
        }
    }

    /// Point masses `(x, p)` for the discrete variants; `None` for Pareto.
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SurvivalModel::Constant { lambda } => Some(vec![(*lambda, 1.0)]),
            SurvivalModel::Table { points } => {
                let mut out = Vec::new();
                for w in points.windows(2) {
                    let mass = w[0].1 - w[1].1;
                    if mass > 0.0 {
                        out.push((w[1].0, mass));
                    }
                }
                Some(out)
            }
            SurvivalModel::Pareto { .. } => None,
        }
    }

    /// Limit mean and second-moment ratio `(μ, ν)` of the model.
    ///
    /// Closed forms for Pareto and the discrete variants; these are the
    /// limits that deterministic capacity grids converge to.
    pub fn limit_mu_nu(&self) -> Result<(f64, f64)> {
        match self {
            SurvivalModel::Pareto { tau, c } => {
                let alpha = tau - 1.0;
                let x_min = c.powf(1.0 / alpha);
                let mean = alpha * x_min / (alpha - 1.0);
                let second = alpha * x_min * x_min / (alpha - 2.0);
                Ok((mean, second / mean))
            }
            _ => {
                let atoms = self.atoms().expect("discrete model");
                let mean: f64 = atoms.iter().map(|&(x, p)| x * p).sum();
                if !(mean > 0.0) {
                    return Err(Error::domain("model has zero mean"));
                }
                let second: f64 = atoms.iter().map(|&(x, p)| x * x * p).sum();
                Ok((mean, second / mean))
            }
        }
    }

    /// Limit offspring laws `(f, g)` of the model, truncated at `n_max`.
    ///
    /// `f_n = E[e^{-Λ} Λ^n / n!]` is evaluated analytically for the discrete
    /// variants and by quadrature over the density for Pareto;
    /// `g_n = (n+1) f_{n+1} / μ` throughout. A Pareto limit law has a
    /// polynomial tail, so no tail ceiling is enforced here; the recorded
    /// tail mass folds into total-variation distances conservatively.
    pub fn limit_offspring(&self, n_max: usize) -> Result<OffspringPair> {
        let (mu, _) = self.limit_mu_nu()?;
        // f computed one slot longer so that g_{n_max} is available.
        let f_ext = match self {
            SurvivalModel::Pareto { tau, c } => pareto_mixed_poisson(*tau, *c, n_max + 1)?,
            _ => {
                let atoms = self.atoms().expect("discrete model");
                let mut f = vec![0.0; n_max + 2];
                for &(x, p) in &atoms {
                    let row = poisson_pmf_row(x, n_max + 1);
                    for (fn_, r) in f.iter_mut().zip(row.iter()) {
                        *fn_ += p * r;
                    }
                }
                f
            }
        };
        pair_from_extended_f_ceiling(&f_ext, mu, n_max, 1.0)
    }

    /// Abscissae where the survival function is non-smooth.
    fn survival_breakpoints(&self) -> Vec<f64> {
        match self {
            SurvivalModel::Pareto { .. } => vec![self.support_min()],
            SurvivalModel::Constant { lambda } => vec![*lambda],
            SurvivalModel::Table { points } => points.iter().map(|&(x, _)| x).collect(),
        }
    }

    /// Survival values where the quantile function jumps.
    fn quantile_breakpoints(&self) -> Vec<f64> {
        match self {
            SurvivalModel::Table { points } => points.iter().map(|&(_, v)| v).collect(),
            _ => Vec::new(),
        }
    }

    /// `x` beyond which `F̄(x) ≤ bound` (for integral truncation).
    fn survival_tail_cutoff(&self, bound: f64) -> f64 {
        match self {
            SurvivalModel::Pareto { tau, c } => {
                // ∫_X^∞ c x^{1-τ} dx = c X^{2-τ}/(τ-2) ≤ bound
                (c / ((tau - 2.0) * bound)).powf(1.0 / (tau - 2.0))
            }
            SurvivalModel::Constant { lambda } => *lambda,
            SurvivalModel::Table { points } => points[points.len() - 1].0,
        }
    }
}

/// Node weights `λ_1..λ_N` with cached totals.
#[derive(Debug, Clone)]
pub struct CapacitySequence {
    values: Vec<f64>,
    l_n: f64,
    mu_n: f64,
    nu_n: f64,
}

impl CapacitySequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("capacity sequence must be non-empty"));
        }
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::construction(
                "capacities must be positive and finite",
            ));
        }
        let l_n: f64 = values.iter().sum();
        let sum_sq: f64 = values.iter().map(|v| v * v).sum();
        let mu_n = l_n / values.len() as f64;
        let nu_n = sum_sq / l_n;
        Ok(CapacitySequence {
            values,
            l_n,
            mu_n,
            nu_n,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Capacity of node `i` (0-based).
    #[inline]
    pub fn lambda(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(l_N, μ_N, ν_N)`.
    pub fn moments(&self) -> (f64, f64, f64) {
        (self.l_n, self.mu_n, self.nu_n)
    }

    pub fn total(&self) -> f64 {
        self.l_n
    }

    pub fn mean(&self) -> f64 {
        self.mu_n
    }

    /// `ν_N = Σλ_i² / Σλ_i`, the supercriticality parameter.
    pub fn nu(&self) -> f64 {
        self.nu_n
    }

    pub fn max_capacity(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The mark law `P(M = m) = λ_m / l_N` with an alias table for O(1)
    /// sampling.
    pub fn mark_law(&self) -> MixingLaw {
        let atoms: Vec<(f64, f64)> = self.values.iter().map(|&l| (l, l / self.l_n)).collect();
        MixingLaw::new(atoms).expect("mark law weights are valid by construction")
    }

    /// `S_{N,q} = (1/N) Σ λ_i^q`.
    pub fn s_nq(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::domain(format!("s_nq needs q > 0, got {q}")));
        }
        Ok(self.values.iter().map(|&l| l.powf(q)).sum::<f64>() / self.len() as f64)
    }

    /// Empirical offspring laws truncated at `n_max`:
    /// `f_n = (1/N) Σ e^{-λ_i} λ_i^n / n!` and `g_n = (n+1) f_{n+1} / μ_N`.
    pub fn offspring_laws(&self, n_max: usize) -> Result<OffspringPair> {
        self.offspring_laws_with_ceiling(n_max, TAIL_CEILING)
    }

    /// Offspring laws with `n_max` picked so the tail mass stays below the
    /// adaptive target (bounded via the Poisson tail at the largest
    /// capacity).
    pub fn offspring_laws_auto(&self) -> Result<OffspringPair> {
        let n_max = adaptive_n_max(self.max_capacity(), ADAPTIVE_TAIL_TARGET);
        self.offspring_laws_with_ceiling(n_max, ADAPTIVE_TAIL_TARGET * 10.0)
    }

    pub fn offspring_laws_with_ceiling(&self, n_max: usize, ceiling: f64) -> Result<OffspringPair> {
        let n = self.len() as f64;
        // One extra slot so g_{n_max} = (n_max+1) f_{n_max+1} / μ_N exists.
        let mut f_ext = vec![0.0; n_max + 2];
        for &lam in &self.values {
            let row = poisson_pmf_row(lam, n_max + 1);
            for (acc, r) in f_ext.iter_mut().zip(row.iter()) {
                *acc += r / n;
            }
        }
        pair_from_extended_f_ceiling(&f_ext, self.mu_n, n_max, ceiling)
    }

    /// Checks conditions C1–C3 against the configured limits.
    pub fn check_conditions(&self, cfg: &ConditionConfig, n_max: usize) -> Result<ConditionReport> {
        let empirical = self.offspring_laws_with_ceiling(n_max, 1.0)?;
        let c1_mu = (self.mu_n - cfg.mu).abs();
        let c1_nu = (self.nu_n - cfg.nu).abs();
        let c2_f = total_variation(&empirical.f, &cfg.f);
        let c2_g = total_variation(&empirical.g, &cfg.g);
        let q = cfg.tau - 1.0 - cfg.eps;
        let moment = self.s_nq(q)?;
        let max_capacity = self.max_capacity();
        let bound = (self.len() as f64).powf(cfg.gamma);
        let moment_ok = cfg.moment_bound.is_none_or(|b| moment <= b);
        let pass = max_capacity <= bound && moment_ok;
        Ok(ConditionReport {
            c1_mu,
            c1_nu,
            c2_f,
            c2_g,
            c3_moment: moment,
            c3_max_capacity: max_capacity,
            c3_bound: bound,
            c3_pass: pass,
        })
    }

    /// Serializes as CSV with header `index,lambda` (1-based indices).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda\n");
        for (i, &l) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, l);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty capacity CSV".into()))?;
        if header.trim() != "index,lambda" {
            return Err(Error::Parse(format!(
                "expected header 'index,lambda', got '{header}'"
            )));
        }
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let idx: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad index on line {}", k + 2)))?;
            let lam: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad lambda on line {}", k + 2)))?;
            if idx != k + 1 {
                return Err(Error::Parse(format!(
                    "indices must be 1-based contiguous, got {idx}"
                )));
            }
            values.push(lam);
        }
        CapacitySequence::new(values)
    }
}

/// Deterministic quantile-grid capacities `λ_i = F̄^{-1}(i/N)`, non-increasing
/// in `i`.
pub fn deterministic_capacities(model: &SurvivalModel, n: usize) -> Result<CapacitySequence> {
    if n == 0 {
        return Err(Error::domain("need at least one node"));
    }
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        values.push(model.inverse_survival(i as f64 / n as f64)?);
    }
    CapacitySequence::new(values)
}

/// I.i.d. capacities `F̄^{-1}(U_i)` from the seeded uniform stream, one draw
/// per node in index order.
pub fn iid_capacities(model: &SurvivalModel, n: usize, seed: u64) -> Result<CapacitySequence> {
    if n == 0 {
        return Err(Error::domain("need at least one node"));
    }
    let mut rng = rng::stream(seed, &[streams::CAPACITIES, n as u64]);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        // 1 - U ∈ (0, 1] keeps the inverse finite.
        let u = 1.0 - rng.random::<f64>();
        values.push(model.inverse_survival(u)?);
    }
    CapacitySequence::new(values)
}

/// A finite mixing law: atoms `(λ_i, p_i)` with weights summing to one.
#[derive(Debug, Clone)]
pub struct MixingLaw {
    atoms: Vec<(f64, f64)>,
    sampler: AliasTable,
}

impl MixingLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::construction("mixing law needs at least one atom"));
        }
        if atoms
            .iter()
            .any(|&(x, w)| !(x > 0.0) || w < 0.0 || !w.is_finite())
        {
            return Err(Error::construction(
                "atoms must be positive with non-negative weights",
            ));
        }
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::construction(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        let weights: Vec<f64> = atoms.iter().map(|&(_, w)| w).collect();
        let sampler = AliasTable::new(&weights)?;
        Ok(MixingLaw { atoms, sampler })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Index of a sampled atom, O(1) expected.
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Expectation of the atom value.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(x, w)| x * w).sum()
    }

    /// Size-biased law: atom `λ_i` reweighted to `p_i λ_i / Σ p_j λ_j`.
    pub fn size_bias(&self) -> Result<MixingLaw> {
        let norm = self.mean();
        if !(norm > 0.0) {
            return Err(Error::domain("size bias undefined: weighted mean is zero"));
        }
        let atoms = self.atoms.iter().map(|&(x, w)| (x, w * x / norm)).collect();
        MixingLaw::new(atoms)
    }
}

/// A truncated probability mass function on `0..=n_max` plus recorded tail
/// mass.
#[derive(Debug, Clone)]
pub struct MixedPoissonLaw {
    pmf: Vec<f64>,
    tail_mass: f64,
}

impl MixedPoissonLaw {
    pub fn new(pmf: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::construction("pmf must be non-empty"));
        }
        if pmf.iter().any(|&p| p < 0.0 || !p.is_finite()) || tail_mass < -1e-15 {
            return Err(Error::construction("pmf entries must be non-negative"));
        }
        let total: f64 = pmf.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::construction(format!(
                "pmf plus tail must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(MixedPoissonLaw {
            pmf,
            tail_mass: tail_mass.max(0.0),
        })
    }

    /// Poisson(λ) truncated at `n_max`.
    pub fn poisson(lambda: f64, n_max: usize) -> Result<Self> {
        let pmf = poisson_pmf_row(lambda, n_max);
        let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
        MixedPoissonLaw::new(pmf, tail)
    }

    /// Point mass at `k`.
    pub fn delta(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        MixedPoissonLaw {
            pmf,
            tail_mass: 0.0,
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// Truncated-range mean `Σ n p_n`.
    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }

    /// Samples from the truncated law; tail mass falls on `n_max`, which is
    /// immaterial when the tail is at the configured ceilings.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u = rng.random::<f64>();
        for (n, &p) in self.pmf.iter().enumerate() {
            if u < p {
                return n;
            }
            u -= p;
        }
        self.n_max()
    }

    /// Alias sampler for hot loops.
    pub fn alias_sampler(&self) -> Result<AliasTable> {
        let mut w = self.pmf.clone();
        let last = w.len() - 1;
        w[last] += self.tail_mass;
        AliasTable::new(&w)
    }
}

/// The pair `(f, g)` of first-generation and later-generation offspring laws.
#[derive(Debug, Clone)]
pub struct OffspringPair {
    pub f: MixedPoissonLaw,
    pub g: MixedPoissonLaw,
}

/// Total variation distance `½ Σ |p_j - q_j|` over the padded common support,
/// with the two tail masses folded in as one extra coordinate.
pub fn total_variation(p: &MixedPoissonLaw, q: &MixedPoissonLaw) -> f64 {
    let len = p.pmf.len().max(q.pmf.len());
    let mut sum = 0.0;
    for j in 0..len {
        let pj = p.pmf.get(j).copied().unwrap_or(0.0);
        let qj = q.pmf.get(j).copied().unwrap_or(0.0);
        sum += (pj - qj).abs();
    }
    sum += (p.tail_mass - q.tail_mass).abs();
    0.5 * sum
}

/// Limits to compare a finite capacity sequence against.
#[derive(Debug, Clone)]
pub struct ConditionConfig {
    pub tau: f64,
    pub eps: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    pub f: MixedPoissonLaw,
    pub g: MixedPoissonLaw,
    /// Optional cap `B` on `(1/N) Σ λ_i^{τ-1-ε}`; absent means report-only.
    pub moment_bound: Option<f64>,
}

impl ConditionConfig {
    /// Builds the limit laws from a survival model. `ε` must keep
    /// `γ = 1/(τ-1) + ε` below `1/2`.
    pub fn from_model(model: &SurvivalModel, tau: f64, eps: f64, n_max: usize) -> Result<Self> {
        if !(tau > 3.0) {
            return Err(Error::construction(format!("tau must exceed 3, got {tau}")));
        }
        let gamma = 1.0 / (tau - 1.0) + eps;
        if !(eps > 0.0 && gamma < 0.5) {
            return Err(Error::construction(format!(
                "need eps in (0, 1/2 - 1/(tau-1)), got eps={eps} (gamma={gamma})"
            )));
        }
        let (mu, nu) = model.limit_mu_nu()?;
        let pair = model.limit_offspring(n_max)?;
        Ok(ConditionConfig {
            tau,
            eps,
            gamma,
            mu,
            nu,
            f: pair.f,
            g: pair.g,
            moment_bound: None,
        })
    }
}

/// Discrepancies and bounds produced by `check_conditions`.
#[derive(Debug, Clone, Copy)]
pub struct ConditionReport {
    pub c1_mu: f64,
    pub c1_nu: f64,
    pub c2_f: f64,
    pub c2_g: f64,
    pub c3_moment: f64,
    pub c3_max_capacity: f64,
    pub c3_bound: f64,
    pub c3_pass: bool,
}

/// Both sides of the L1 identity between two survival models:
/// `∫_0^1 |Ḡ^{-1} - H̄^{-1}| du` and `∫_0^∞ |Ḡ - H̄| dx`.
///
/// The two integrals are mathematically equal; both are returned so callers
/// can verify agreement within quadrature tolerance.
pub fn integrated_quantile_distance(g: &SurvivalModel, h: &SurvivalModel) -> Result<(f64, f64)> {
    let tol = 1e-8;

    // Quantile side, substituted u = v^4 to tame the power singularity at 0.
    let quant = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let u = (v * v * v * v).min(1.0);
        let gi = g.inverse_survival(u).unwrap_or(0.0);
        let hi = h.inverse_survival(u).unwrap_or(0.0);
        (gi - hi).abs() * 4.0 * v * v * v
    };
    let mut v_breaks: Vec<f64> = g
        .quantile_breakpoints()
        .into_iter()
        .chain(h.quantile_breakpoints())
        .filter(|&u| u > 0.0 && u < 1.0)
        .map(|u| u.powf(0.25))
        .collect();
    v_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let via_quantiles = quad::integrate_piecewise(&quant, 0.0, 1.0, &v_breaks, tol)?;

    // Survival side, truncated where both tails are provably below 1e-9.
    let cutoff = g
        .survival_tail_cutoff(5e-10)
        .max(h.survival_tail_cutoff(5e-10));
    let surv = |x: f64| (g.survival(x) - h.survival(x)).abs();
    let mut x_breaks: Vec<f64> = g
        .survival_breakpoints()
        .into_iter()
        .chain(h.survival_breakpoints())
        .collect();
    x_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let via_survivals = quad::integrate_piecewise(&surv, 0.0, cutoff, &x_breaks, tol)?;

    Ok((via_quantiles, via_survivals))
}

/// Truncation index for which `P(Poi(λ_max) > n_max)` drops below `target`.
pub fn adaptive_n_max(lambda_max: f64, target: f64) -> usize {
    let lam = lambda_max.max(1.0);
    let mut n = (lam + 10.0 * lam.sqrt() + 20.0) as usize;
    loop {
        let row = poisson_pmf_row(lam, n);
        let tail = 1.0 - row.iter().sum::<f64>();
        if tail < target || n > 100_000 {
            return n;
        }
        n = n * 3 / 2 + 8;
    }
}

/// Poisson pmf values `e^{-λ} λ^n / n!` for `n = 0..=n_max`.
///
/// Uses the multiplicative recurrence; switches to log-space per term for
/// very large λ where `e^{-λ}` underflows.
pub fn poisson_pmf_row(lambda: f64, n_max: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n_max + 1);
    if lambda < 700.0 {
        let mut term = (-lambda).exp();
        row.push(term);
        for n in 1..=n_max {
            term *= lambda / n as f64;
            row.push(term);
        }
    } else {
        let ln_lam = lambda.ln();
        for n in 0..=n_max {
            let ln_p =
                -lambda + n as f64 * ln_lam - statrs::function::gamma::ln_gamma(n as f64 + 1.0);
            row.push(ln_p.exp());
        }
    }
    row
}

/// Builds the `(f, g)` pair from `f` computed on `0..=n_max+1`, rejecting
/// tail mass at or above `ceiling`.
fn pair_from_extended_f_ceiling(
    f_ext: &[f64],
    mu: f64,
    n_max: usize,
    ceiling: f64,
) -> Result<OffspringPair> {
    debug_assert!(f_ext.len() >= n_max + 2);
    let f_pmf: Vec<f64> = f_ext[..=n_max].to_vec();
    let g_pmf: Vec<f64> = (0..=n_max)
        .map(|n| (n as f64 + 1.0) * f_ext[n + 1] / mu)
        .collect();
    let f_tail = (1.0 - f_pmf.iter().sum::<f64>()).max(0.0);
    let g_tail = (1.0 - g_pmf.iter().sum::<f64>()).max(0.0);
    for (name, tail) in [("f", f_tail), ("g", g_tail)] {
        if tail >= ceiling {
            let _ = name;
            return Err(Error::Truncation {
                tail_mass: tail,
                ceiling,
                n_max,
            });
        }
    }
    Ok(OffspringPair {
        f: MixedPoissonLaw::new(f_pmf, f_tail)?,
        g: MixedPoissonLaw::new(g_pmf, g_tail)?,
    })
}

/// `f_n = ∫ e^{-x} x^n/n! dF(x)` for the Pareto model by composite Simpson on
/// the density `(τ-1) c x^{-τ}` over `[x_min, X]`.
fn pareto_mixed_poisson(tau: f64, c: f64, n_max: usize) -> Result<Vec<f64>> {
    let alpha = tau - 1.0;
    let x_min = c.powf(1.0 / alpha);
    let n_f = n_max as f64;
    let x_hi = (n_f + 12.0 * (n_f + 1.0).sqrt() + 60.0).max(x_min + 1.0);
    // Step small enough that the 4th-order error stays below ~1e-11.
    let steps_f = ((x_hi - x_min) / 0.005).ceil();
    let steps = (steps_f as usize).max(64) / 2 * 2;
    let h = (x_hi - x_min) / steps as f64;
    let density = |x: f64| alpha * c * x.powf(-tau);
    let mut acc = vec![0.0; n_max + 1];
    for k in 0..=steps {
        let x = x_min + k as f64 * h;
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let scale = w * density(x) * h / 3.0;
        let row = poisson_pmf_row(x, n_max);
        for (a, r) in acc.iter_mut().zip(row.iter()) {
            *a += scale * r;
        }
    }
    Ok(acc)
}
