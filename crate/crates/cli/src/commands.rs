//! The experiment commands. Every command is a pure function of the resolved
//! manifest: identical manifests produce byte-identical outputs regardless of
//! the thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use rgdist_core::branching::{estimate_w, model_survival_curve, w_depth, LimitLawConfig};
use rgdist_core::capacities::{adaptive_n_max, CapacitySequence, ConditionConfig};
use rgdist_core::coupling::{coupled_generate_with_xi, estimate_coupling_failure};
use rgdist_core::distances::{sample_hopcounts, sigma_a, survival, EmpiricalSurvival};
use rgdist_core::graphgen::{generate_bernoulli, generate_prg, ConnectionKernel, SparseGraph};
use rgdist_core::rng::derive;

use crate::manifest::Experiment;
use crate::svg::polyline_svg;
use crate::CliError;

fn write_file(path: &PathBuf, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Validation(format!("cannot write {path:?}: {e}")))
}

fn ensure_out(exp: &Experiment) -> Result<(), CliError> {
    fs::create_dir_all(&exp.out)
        .map_err(|e| CliError::Validation(format!("cannot create {:?}: {e}", exp.out)))
}

fn generate(
    exp: &Experiment,
    seq: &CapacitySequence,
    n: usize,
    rep: usize,
) -> Result<SparseGraph, CliError> {
    let seed = derive(exp.seed, &[1002, n as u64, rep as u64]);
    let graph = match exp.kernel {
        ConnectionKernel::Poissonian => generate_prg(seq, seed),
        ref k => generate_bernoulli(seq, k, seed),
    };
    graph.map_err(|e| CliError::Numeric(e.to_string()))
}

/// `gen`: one edge-list CSV per (N, replicate).
pub fn cmd_gen(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    for &n in &exp.sizes {
        (0..exp.manifest.replicates).into_par_iter().try_for_each(
            |rep| -> Result<(), CliError> {
                let seq = exp.capacities_for(n, rep)?;
                let graph = generate(exp, &seq, n, rep)?;
                let path = exp.out.join(format!("edges_N{n}_rep{rep}.csv"));
                write_file(
                    &path,
                    &format!("{}{}", exp.provenance(), graph.to_edge_csv()),
                )
            },
        )?;
    }
    println!(
        "gen: wrote {} sizes x {} replicates",
        exp.sizes.len(),
        exp.manifest.replicates
    );
    Ok(())
}

fn survival_curve_for(exp: &Experiment, n: usize) -> Result<EmpiricalSurvival, CliError> {
    let graphs: Vec<SparseGraph> = (0..exp.manifest.replicates)
        .into_par_iter()
        .map(|rep| {
            let seq = exp.capacities_for(n, rep)?;
            generate(exp, &seq, n, rep)
        })
        .collect::<Result<_, _>>()?;
    let sample = sample_hopcounts(
        graphs,
        exp.manifest.pairs_per_graph,
        derive(exp.seed, &[1003, n as u64]),
        exp.nu,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    survival(&sample).map_err(|e| CliError::Numeric(e.to_string()))
}

/// `hopcount`: survival-curve CSV per N plus a σ/a summary table.
pub fn cmd_hopcount(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    let mut summary = format!("{}n,sigma,a,nu,n_finite,n_total\n", exp.provenance());
    for &n in &exp.sizes {
        let curve = survival_curve_for(exp, n)?;
        if exp.manifest.conditional && curve.n_finite() == 0 {
            return Err(CliError::Numeric(format!(
                "N={n}: all sampled pairs disconnected; conditional curve undefined"
            )));
        }
        let path = exp.out.join(format!("survival_N{n}.csv"));
        write_file(
            &path,
            &format!(
                "{}{}",
                exp.provenance(),
                curve.to_csv(exp.manifest.conditional)
            ),
        )?;
        if exp.svg {
            let pts: Vec<(f64, f64)> = (0..=curve.max_finite().unwrap_or(0))
                .map(|t| {
                    let s = if exp.manifest.conditional {
                        curve.conditional_survival(t).unwrap_or(f64::NAN)
                    } else {
                        curve.survival(t)
                    };
                    (t as f64, s)
                })
                .collect();
            let svg = polyline_svg(&format!("survival, N = {n}"), &[(format!("N={n}"), pts)]);
            write_file(&exp.out.join(format!("survival_N{n}.svg")), &svg)?;
        }
        let sa = sigma_a(n, exp.nu).map_err(|e| CliError::Numeric(e.to_string()))?;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            n,
            sa.sigma,
            sa.a,
            exp.nu,
            curve.n_finite(),
            curve.total
        );
    }
    write_file(&exp.out.join("summary.csv"), &summary)?;
    println!("hopcount: wrote {} survival curves", exp.sizes.len());
    Ok(())
}

/// `figure1`: ladder of survival curves aligned by shifting curve `k` left by
/// `2k` hops; reports the max vertical deviation over mid-range levels.
pub fn cmd_figure1(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    let curves: Vec<EmpiricalSurvival> = exp
        .sizes
        .iter()
        .map(|&n| survival_curve_for(exp, n))
        .collect::<Result<_, _>>()?;

    let value = |c: &EmpiricalSurvival, t: i64| -> Option<f64> {
        if t < 0 {
            return None;
        }
        if exp.manifest.conditional {
            c.conditional_survival(t as u32)
        } else {
            Some(c.survival(t as u32))
        }
    };

    // aligned table: curve k evaluated at t + 2k
    let t_max: i64 = 3
        * (sigma_a(exp.sizes[0], exp.nu)
            .map_err(|e| CliError::Numeric(e.to_string()))?
            .sigma)
        + 10;
    let mut table = format!("{}t", exp.provenance());
    for &n in &exp.sizes {
        let _ = write!(table, ",s_N{n}_shifted");
    }
    table.push('\n');
    let mut aligned: Vec<Vec<Option<f64>>> = Vec::new();
    for t in 0..=t_max {
        let row: Vec<Option<f64>> = curves
            .iter()
            .enumerate()
            .map(|(k, c)| value(c, t + 2 * k as i64))
            .collect();
        let _ = write!(table, "{t}");
        for v in &row {
            match v {
                Some(v) => {
                    let _ = write!(table, ",{v}");
                }
                None => table.push(','),
            }
        }
        table.push('\n');
        aligned.push(row);
    }
    write_file(&exp.out.join("aligned_curves.csv"), &table)?;

    let mut max_dev = 0.0f64;
    for row in &aligned {
        for i in 0..row.len() {
            for j in (i + 1)..row.len() {
                if let (Some(a), Some(b)) = (row[i], row[j]) {
                    let in_band = (0.05..=0.95).contains(&a) || (0.05..=0.95).contains(&b);
                    if in_band {
                        max_dev = max_dev.max((a - b).abs());
                    }
                }
            }
        }
    }

    if exp.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = exp
            .sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let pts = (0..=t_max)
                    .filter_map(|t| aligned[t as usize][k].map(|v| (t as f64, v)))
                    .collect();
                (format!("N={n} (shift {})", 2 * k), pts)
            })
            .collect();
        write_file(
            &exp.out.join("aligned_curves.svg"),
            &polyline_svg("aligned survival curves", &series),
        )?;
    }

    let pass = max_dev <= exp.manifest.figure1_threshold;
    let report = json!({
        "sizes": exp.sizes,
        "nu": exp.nu,
        "max_vertical_deviation": max_dev,
        "threshold": exp.manifest.figure1_threshold,
        "pass": pass,
    });
    write_file(
        &exp.out.join("figure1_report.json"),
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )?;
    println!(
        "figure1: max deviation {max_dev:.4} (threshold {})",
        exp.manifest.figure1_threshold
    );
    if !pass {
        return Err(CliError::Numeric(format!(
            "aligned curves deviate by {max_dev:.4} > {}",
            exp.manifest.figure1_threshold
        )));
    }
    Ok(())
}

/// `bp`: martingale-limit samples from the model's offspring laws plus the
/// theoretical survival curve per N.
pub fn cmd_bp(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    let model = exp.model.as_ref().ok_or_else(|| {
        CliError::Validation("bp needs a survival model, not a capacity file".into())
    })?;
    let (mu, nu) = model
        .limit_mu_nu()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    if nu <= 1.0 {
        return Err(CliError::Validation(format!(
            "subcritical model (nu = {nu} <= 1) has no supercritical branching limit"
        )));
    }
    let pair = model
        .limit_offspring(exp.manifest.bp_n_max)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let depth = w_depth(mu, nu);
    let w = estimate_w(
        &pair.f,
        &pair.g,
        depth,
        exp.manifest.bp_reps,
        derive(exp.seed, &[1004]),
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_file(
        &exp.out.join("w_samples.csv"),
        &format!("{}{}", exp.provenance(), w.to_csv()),
    )?;
    let extinction = w.extinction_fraction();
    let cfg =
        LimitLawConfig::new(mu, nu, w.samples).map_err(|e| CliError::Numeric(e.to_string()))?;

    for &n in &exp.sizes {
        let sa = sigma_a(n, nu).map_err(|e| CliError::Numeric(e.to_string()))?;
        let t_hi = (3 * sa.sigma + 10).max(10) as u32;
        let curve = model_survival_curve(&cfg, n, 0..=t_hi)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let mut csv = format!("{}t,survival_model\n", exp.provenance());
        for &(t, v, _) in &curve {
            let _ = writeln!(csv, "{t},{v}");
        }
        write_file(&exp.out.join(format!("model_curve_N{n}.csv")), &csv)?;
        if exp.svg {
            let pts: Vec<(f64, f64)> = curve.iter().map(|&(t, v, _)| (t as f64, v)).collect();
            write_file(
                &exp.out.join(format!("model_curve_N{n}.svg")),
                &polyline_svg(
                    &format!("model survival, N = {n}"),
                    &[(format!("N={n}"), pts)],
                ),
            )?;
        }
    }

    let summary = json!({
        "mu": mu,
        "nu": nu,
        "kappa": cfg.kappa,
        "depth": depth,
        "reps": exp.manifest.bp_reps,
        "extinction_fraction": extinction,
        "resampled": w.resampled,
    });
    write_file(
        &exp.out.join("bp_summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
    )?;
    println!("bp: depth {depth}, extinction fraction {extinction:.4}");
    Ok(())
}

/// `conditions`: condition report per N.
pub fn cmd_conditions(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    let model = exp
        .model
        .as_ref()
        .ok_or_else(|| CliError::Validation("conditions needs a survival model".into()))?;
    let tau = exp
        .manifest
        .tau
        .ok_or_else(|| CliError::Validation("conditions needs tau in the manifest".into()))?;

    // common truncation across the whole grid, wide enough for the largest N
    let mut lambda_max: f64 = 1.0;
    for &n in &exp.sizes {
        lambda_max = lambda_max.max(exp.capacities_for(n, 0)?.max_capacity());
    }
    let n_max = adaptive_n_max(lambda_max, 1e-10);
    let cfg = ConditionConfig::from_model(model, tau, exp.manifest.eps, n_max)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut csv = format!(
        "{}n,c1_mu,c1_nu,c2_f,c2_g,c3_moment,c3_max_capacity,c3_bound,c3_pass\n",
        exp.provenance()
    );
    for &n in &exp.sizes {
        let seq = exp.capacities_for(n, 0)?;
        let rep = seq
            .check_conditions(&cfg, n_max)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            n,
            rep.c1_mu,
            rep.c1_nu,
            rep.c2_f,
            rep.c2_g,
            rep.c3_moment,
            rep.c3_max_capacity,
            rep.c3_bound,
            rep.c3_pass
        );
    }
    write_file(&exp.out.join("conditions.csv"), &csv)?;
    println!(
        "conditions: wrote grid of {} sizes (n_max {n_max})",
        exp.sizes.len()
    );
    Ok(())
}

/// `couple`: coupling-failure trend across the N grid plus per-N mismatch
/// reports.
pub fn cmd_couple(exp: &Experiment) -> Result<(), CliError> {
    ensure_out(exp)?;
    if matches!(exp.kernel, ConnectionKernel::Poissonian) {
        return Err(CliError::Validation(
            "couple compares a non-Poissonian kernel against the Poissonian graph; pick expected_degree or generalized".into(),
        ));
    }
    let mut trend = format!("{}n,p_mismatch,se\n", exp.provenance());
    let mut summaries = Vec::new();
    for &n in &exp.sizes {
        let seq = exp.capacities_for(n, 0)?;
        let (p, se) = estimate_coupling_failure(
            &seq,
            &exp.kernel,
            exp.manifest.replicates,
            exp.manifest.coupling_pairs,
            derive(exp.seed, &[1005, n as u64]),
        )
        .map_err(|e| CliError::Numeric(e.to_string()))?;
        let _ = writeln!(trend, "{n},{p},{se}");

        let (_, _, report) = coupled_generate_with_xi(
            &seq,
            &exp.kernel,
            derive(exp.seed, &[1006, n as u64]),
            exp.manifest.xi,
        )
        .map_err(|e| CliError::Numeric(e.to_string()))?;
        write_file(
            &exp.out.join(format!("mismatch_N{n}.csv")),
            &format!("{}{}", exp.provenance(), report.to_csv(&seq)),
        )?;
        summaries.push(json!({
            "n": n,
            "total_mismatches": report.total_mismatches,
            "a_n": report.a_n,
            "xi": report.xi,
            "c_n": report.c_n,
            "p_hopcount_mismatch": p,
            "se": se,
        }));
    }
    write_file(&exp.out.join("coupling_trend.csv"), &trend)?;
    write_file(
        &exp.out.join("couple_summary.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&json!(summaries)).unwrap()
        ),
    )?;
    println!("couple: wrote trend over {} sizes", exp.sizes.len());
    Ok(())
}
