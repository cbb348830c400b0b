//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned here; none is tuned at run time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rgdist_core::branching::{
    direct_survival_probability, estimate_w, extinction_probability, model_survival_curve,
    shells_vs_thinned_nr, shells_vs_unthinned_nr, survival_via_capacity_formula, w_depth,
    LimitLawConfig,
};
use rgdist_core::capacities::{
    deterministic_capacities, integrated_quantile_distance, total_variation, CapacitySequence,
    ConditionConfig, MixedPoissonLaw, SurvivalModel,
};
use rgdist_core::coupling::estimate_coupling_failure;
use rgdist_core::distances::{ladder, sample_hopcounts, sigma_a, survival};
use rgdist_core::graphgen::{generate_prg, ConnectionKernel};
use rgdist_core::rng::derive;
use rgdist_core::stats::{mean, se_mean, se_proportion};

/// Capacity model calibrated against the published survival-curve setup:
/// pure Pareto tail with τ = 3.5 above support minimum 0.7437937, giving
/// ν = E[Λ²]/E[Λ] = 3 · 0.7437937 ≈ 2.231381.
fn calibrated_model() -> SurvivalModel {
    SurvivalModel::pareto_from_support_min(3.5, 0.7437937).unwrap()
}

const CALIBRATED_NU: f64 = 2.2313811;

fn report(criterion: u32, name: &str, pass: bool, details: &str) {
    println!(
        "criterion {criterion:2} [{}] {name}: {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {details}");
}

#[test]
fn criterion_01_exact_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_fg = 0.0f64;
    let mut worst_mark = 0.0f64;
    for _ in 0..100 {
        let len = rng.random_range(1..=50);
        let values: Vec<f64> = (0..len)
            .map(|_| 0.05 + rng.random::<f64>() * 10.0)
            .collect();
        let seq = CapacitySequence::new(values).unwrap();
        let n_max = 50;
        let pair = seq.offspring_laws_with_ceiling(n_max, 1.0).unwrap();
        let (_, mu, nu) = seq.moments();
        for n in 0..n_max {
            let lhs = pair.g.pmf()[n] * mu;
            let rhs = (n as f64 + 1.0) * pair.f.pmf()[n + 1];
            if rhs > 0.0 {
                worst_fg = worst_fg.max((lhs - rhs).abs() / rhs);
            }
        }
        worst_mark = worst_mark.max((seq.mark_law().mean() - nu).abs() / nu);
    }

    let mut metric_ok = true;
    for _ in 0..100 {
        let draw = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            MixedPoissonLaw::new(v, 0.0).unwrap()
        };
        let (p, q, r) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let dpq = total_variation(&p, &q);
        metric_ok &= (dpq - total_variation(&q, &p)).abs() < 1e-15;
        metric_ok &= total_variation(&p, &p) == 0.0;
        metric_ok &= dpq <= total_variation(&p, &r) + total_variation(&r, &q) + 1e-12;
    }

    let pass = worst_fg <= 1e-12 && worst_mark <= 1e-12 && metric_ok;
    report(
        1,
        "exact identities",
        pass,
        &format!(
            "max rel err: g*mu vs (n+1)f {worst_fg:.2e}, E[lambda_M] vs nu {worst_mark:.2e}, metric axioms {metric_ok}"
        ),
    );
}

#[test]
fn criterion_02_quantile_survival_l1_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let model = |rng: &mut ChaCha8Rng| -> SurvivalModel {
            match rng.random_range(0..3) {
                0 => SurvivalModel::pareto(
                    3.2 + rng.random::<f64>() * 2.0,
                    0.3 + rng.random::<f64>() * 2.5,
                )
                .unwrap(),
                1 => SurvivalModel::constant(0.5 + rng.random::<f64>() * 3.5).unwrap(),
                _ => {
                    let mut points = vec![(0.0, 1.0)];
                    let mut x = 0.0;
                    let mut v = 1.0;
                    let steps = rng.random_range(2..5);
                    for s in 0..steps {
                        x += 0.3 + rng.random::<f64>() * 2.0;
                        v = if s + 1 == steps {
                            0.0
                        } else {
                            v * rng.random::<f64>()
                        };
                        points.push((x, v));
                    }
                    SurvivalModel::table(points).unwrap()
                }
            }
        };
        let g = model(&mut rng);
        let h = model(&mut rng);
        let (via_q, via_s) = integrated_quantile_distance(&g, &h)
            .unwrap_or_else(|e| panic!("pair {k} failed: {e} ({g:?} vs {h:?})"));
        worst = worst.max((via_q - via_s).abs());
    }
    report(
        2,
        "L1 quantile/survival identity",
        worst <= 1e-6,
        &format!("max |via_quantiles - via_survivals| = {worst:.2e} over 20 pairs"),
    );
}

#[test]
fn criterion_03_thinned_process_matches_shells() {
    let seq = deterministic_capacities(&calibrated_model(), 200).unwrap();
    let reps = 10_000;
    let rep = shells_vs_thinned_nr(&seq, 3, reps, 103).unwrap();
    let min_p = rep.min_p_value();
    let control = shells_vs_unthinned_nr(&seq, 3, reps, 103).unwrap();
    let control_p = control.min_p_value();
    let pass = rep.marginals.iter().all(|m| m.p_value > 0.01) && control_p < 1e-6;
    let ps: Vec<String> = rep
        .marginals
        .iter()
        .map(|m| format!("{:.3}", m.p_value))
        .collect();
    report(
        3,
        "thinned-process shells vs BFS shells",
        pass,
        &format!(
            "marginal p = [{}] (min {min_p:.3}), no-dedup control min p = {control_p:.2e}",
            ps.join(", ")
        ),
    );
}

#[test]
fn criterion_04_survival_identity_base_and_induction() {
    // base case at N = 100: exact double sum vs direct Monte Carlo
    let seq100 = deterministic_capacities(&calibrated_model(), 100).unwrap();
    let (exact, _) = survival_via_capacity_formula(&seq100, 1, 1, 104).unwrap();
    let (direct, se) = direct_survival_probability(&seq100, 1, 100_000, 105).unwrap();
    let base_ok = (exact - direct).abs() <= 3.0 * se;

    // induction at t = 3, N = 500: formula estimator vs direct BFS estimator
    let seq500 = deterministic_capacities(&calibrated_model(), 500).unwrap();
    let (formula, se_f) = survival_via_capacity_formula(&seq500, 3, 10_000, 106).unwrap();
    let (bfs, se_b) = direct_survival_probability(&seq500, 3, 10_000, 107).unwrap();
    let combined = (se_f * se_f + se_b * se_b).sqrt();
    let induction_ok = (formula - bfs).abs() <= 3.0 * combined;

    report(
        4,
        "capacity-formula survival estimators",
        base_ok && induction_ok,
        &format!(
            "t=1: exact {exact:.5} vs MC {direct:.5} (se {se:.5}); t=3: formula {formula:.5} vs BFS {bfs:.5} (combined se {combined:.5})"
        ),
    );
}

#[test]
fn criterion_05_survival_curves_parallel_at_distance_two() {
    let model = calibrated_model();
    let nu = CALIBRATED_NU;
    let m = 2000usize;
    let sizes = ladder(m, nu, 1).unwrap().sizes;
    let samples_per_n = 1000usize;

    // Deterministic quantile-grid capacities (the canonical construction for
    // these distance results); 25 pairs per graph keep the conditional curves
    // out of the noise floor, with standard errors clustered by graph.
    let pairs_per_graph = 25usize;
    let curve_for = |n: usize, tag: u64| {
        let seq = deterministic_capacities(&model, n).unwrap();
        let graphs = (0..samples_per_n)
            .map(move |r| generate_prg(&seq, derive(1060 + tag, &[n as u64, r as u64])).unwrap());
        let sample =
            sample_hopcounts(graphs, pairs_per_graph, derive(1070 + tag, &[n as u64]), nu).unwrap();
        survival(&sample).unwrap()
    };
    let s0 = curve_for(sizes[0] as usize, 0);
    let s1 = curve_for(sizes[1] as usize, 1);

    // shift the larger size left by 2 hops and compare inside the level band
    let mut sup = 0.0f64;
    let mut compared = 0;
    for t in 0..60u32 {
        let a = s0.conditional_survival(t);
        let b = s1.conditional_survival(t + 2);
        if let (Some(a), Some(b)) = (a, b) {
            let in_band = (0.05..=0.95).contains(&a) || (0.05..=0.95).contains(&b);
            if in_band {
                sup = sup.max((a - b).abs());
                compared += 1;
            }
        }
    }
    let pass = compared > 0 && sup <= 0.05;
    report(
        5,
        "ladder curves parallel at distance 2",
        pass,
        &format!(
            "N = {} vs {}, sup deviation {sup:.4} over {compared} aligned points (threshold 0.05)",
            sizes[0], sizes[1]
        ),
    );
}

#[test]
fn criterion_06_hopcount_tightness() {
    // constant λ = 2 (the Erdős–Rényi case, ν = 2) keeps the supercritical
    // component large enough that 10³ pairs give real power
    let n = 10_000usize;
    let nu = 2.0;
    let seq = CapacitySequence::new(vec![2.0; n]).unwrap();
    let graphs: Vec<_> = (0..50)
        .map(|r| generate_prg(&seq, derive(1080, &[r])).unwrap())
        .collect();
    let sample = sample_hopcounts(graphs, 20, 1081, nu).unwrap();
    let log_nu_n = (n as f64).ln() / nu.ln();
    let finite: Vec<u32> = sample
        .entries
        .iter()
        .filter_map(|e| e.distance.finite())
        .collect();
    let within = finite
        .iter()
        .filter(|&&d| (d as f64 - log_nu_n).abs() <= 8.0)
        .count();
    let frac = within as f64 / finite.len() as f64;
    report(
        6,
        "tightness window",
        frac >= 0.98,
        &format!(
            "P(|H - log_nu N| <= 8 | finite) = {frac:.4} over {} finite of {} pairs",
            finite.len(),
            sample.entries.len()
        ),
    );
}

#[test]
fn criterion_07_coupling_failure_decreases() {
    // engineering calibration: the asymptotic statement is o(1); the 0.05
    // threshold at N = 1e4 was fixed from pilot runs and is pinned here
    let mut estimates = Vec::new();
    for (i, n) in [1000usize, 3000, 10_000].into_iter().enumerate() {
        let seq = CapacitySequence::new(vec![2.0; n]).unwrap();
        // 25 pairs per coupled replicate: failures are rare events, and the
        // trend needs enough of them to be resolvable
        let (p, se) = estimate_coupling_failure(
            &seq,
            &ConnectionKernel::Generalized,
            1000,
            25,
            derive(1090, &[i as u64]),
        )
        .unwrap();
        estimates.push((n, p, se));
    }
    let decreasing = estimates.windows(2).all(|w| w[1].1 < w[0].1);
    let last_ok = estimates[2].1 <= 0.05;
    let detail: Vec<String> = estimates
        .iter()
        .map(|(n, p, se)| format!("N={n}: {p:.4}±{se:.4}"))
        .collect();
    report(
        7,
        "coupling failure trend",
        decreasing && last_ok,
        &detail.join(", "),
    );
}

#[test]
fn criterion_08_martingale_limit() {
    let pois2 = MixedPoissonLaw::poisson(2.0, 60).unwrap();
    let t = w_depth(2.0, 2.0);
    let w = estimate_w(&pois2, &pois2, t, 10_000, 108).unwrap();
    let m = mean(&w.samples);
    let se = se_mean(&w.samples);
    let mean_ok = (m - 1.0).abs() <= 3.0 * se;

    let q_hat = w.extinction_fraction();
    let q_true = extinction_probability(&pois2, &pois2);
    let se_q = se_proportion((q_hat * 10_000.0).round() as u64, 10_000);
    let ext_ok = (q_hat - q_true).abs() <= 3.0 * se_q;

    report(
        8,
        "martingale limit",
        mean_ok && ext_ok,
        &format!(
            "E[W] = {m:.4}±{se:.4} (target 1), extinction {q_hat:.4} vs fixed point {q_true:.4} (se {se_q:.4})"
        ),
    );
}

#[test]
fn criterion_09_limit_curve_shape_and_shift() {
    let model = calibrated_model();
    let (mu, nu) = model.limit_mu_nu().unwrap();
    let pair = model.limit_offspring(400).unwrap();
    let t = w_depth(mu, nu);
    let w = estimate_w(&pair.f, &pair.g, t, 10_000, 109).unwrap();
    let cfg = LimitLawConfig::new(mu, nu, w.samples).unwrap();

    let n0 = 5000usize;
    let n1 = (n0 as f64 * nu * nu).round() as usize; // 24895
    let c0 = model_survival_curve(&cfg, n0, 0..=25).unwrap();
    let c1 = model_survival_curve(&cfg, n1, 2..=27).unwrap();

    let monotone = c0.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12)
        && c1.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);

    let mut worst_gap = 0.0f64;
    let mut shift_ok = true;
    for (a, b) in c0.iter().zip(&c1) {
        assert_eq!(a.0 + 2, b.0);
        let tol = 2.0 * (a.2 * a.2 + b.2 * b.2).sqrt();
        let gap = (a.1 - b.1).abs();
        worst_gap = worst_gap.max(gap - tol);
        shift_ok &= gap <= tol.max(1e-12);
    }
    report(
        9,
        "limit-law curve shape",
        monotone && shift_ok,
        &format!("monotone {monotone}, 2-hop shift max excess {worst_gap:.2e} (N = {n0} vs {n1})"),
    );
}

#[test]
fn criterion_10_condition_checkers() {
    let model = calibrated_model();
    let tau = 3.5;
    let eps = 0.05;
    let cfg = ConditionConfig::from_model(&model, tau, eps, 300).unwrap();
    let check = |n: usize| {
        deterministic_capacities(&model, n)
            .unwrap()
            .check_conditions(&cfg, 300)
            .unwrap()
    };
    let small = check(1000);
    let large = check(100_000);
    let c1_down = large.c1_mu < small.c1_mu && large.c1_nu < small.c1_nu;
    let c2_down = large.c2_f < small.c2_f && large.c2_g < small.c2_g;
    let max_ok = small.c3_max_capacity <= small.c3_bound && large.c3_max_capacity <= large.c3_bound;
    report(
        10,
        "condition checkers",
        c1_down && c2_down && max_ok,
        &format!(
            "c1 (mu): {:.2e}->{:.2e}, c1 (nu): {:.2e}->{:.2e}, c2 (f): {:.2e}->{:.2e}, c2 (g): {:.2e}->{:.2e}, max capacity {:.2} <= N^gamma {:.2}",
            small.c1_mu, large.c1_mu, small.c1_nu, large.c1_nu,
            small.c2_f, large.c2_f, small.c2_g, large.c2_g,
            large.c3_max_capacity, large.c3_bound
        ),
    );
}

#[test]
fn calibration_nu_verified_by_integration() {
    // supporting check for the calibrated model used throughout: ν computed
    // from closed form and by quadrature both land on 2.231381
    let model = calibrated_model();
    let (_, nu) = model.limit_mu_nu().unwrap();
    assert!((nu - 2.231381).abs() < 1e-5, "nu = {nu}");
    let sa = sigma_a(5000, nu).unwrap();
    assert_eq!(sa.sigma, 10);
    assert!((sa.a.abs() - 0.6117).abs() < 1e-3);
}
