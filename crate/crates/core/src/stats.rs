//! Small statistics helpers shared by the Monte Carlo drivers and tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn se_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of a binomial proportion `k/n`.
pub fn se_proportion(k: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on aligned count vectors.
///
/// Cells are pooled left-to-right until each pooled cell has expected count
/// at least `min_expected` in both samples; trailing remainder folds into the
/// last cell.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquareResult {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let n1: f64 = (0..len).map(|i| get(a, i)).sum();
    let n2: f64 = (0..len).map(|i| get(b, i)).sum();
    assert!(n1 > 0.0 && n2 > 0.0, "empty sample in chi-square test");
    let total = n1 + n2;

    // Pool adjacent cells so every expected count is workable.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..len {
        acc.0 += get(a, i);
        acc.1 += get(b, i);
        let pooled = acc.0 + acc.1;
        let e1 = n1 * pooled / total;
        let e2 = n2 * pooled / total;
        if e1 >= min_expected && e2 >= min_expected {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            cells.push(acc);
        }
    }

    if cells.len() < 2 {
        // Degenerate: both samples concentrated on one pooled cell.
        return ChiSquareResult {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
        };
    }

    let mut stat = 0.0;
    for &(o1, o2) in &cells {
        let pooled = o1 + o2;
        let e1 = n1 * pooled / total;
        let e2 = n2 * pooled / total;
        stat += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
    }
    let df = cells.len() - 1;
    ChiSquareResult {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Chi-square goodness-of-fit of observed counts against equal cell
/// probabilities; used for the exchangeability check of edge indicators.
pub fn chi_square_homogeneity(observed: &[u64]) -> ChiSquareResult {
    assert!(observed.len() >= 2);
    let total: f64 = observed.iter().map(|&x| x as f64).sum();
    let e = total / observed.len() as f64;
    let stat: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = observed.len() - 1;
    ChiSquareResult {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("df > 0");
    (1.0 - dist.cdf(stat)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_high_p() {
        let a = [100u64, 200, 300, 150];
        let r = chi_square_two_sample(&a, &a, 5.0);
        assert!(r.statistic < 1e-12);
        assert!(r.p_value > 0.999);
    }

    #[test]
    fn disjoint_samples_give_tiny_p() {
        let a = [1000u64, 0, 0];
        let b = [0u64, 0, 1000];
        let r = chi_square_two_sample(&a, &b, 5.0);
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn uniform_counts_are_homogeneous() {
        let r = chi_square_homogeneity(&[500, 510, 490, 502]);
        assert!(r.p_value > 0.5);
    }

    #[test]
    fn mean_se_basics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((se_mean(&xs) - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }
}
