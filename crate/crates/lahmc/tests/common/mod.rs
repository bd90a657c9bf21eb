//! Helpers shared by the integration suites: distributional test statistics
//! kept independent of the library code they are used to check.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided Kolmogorov-Smirnov statistic of `data` against N(0, 1).
pub fn ks_statistic_standard_normal(data: &[f64]) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(*x);
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    d
}

/// Critical KS value at significance `alpha` for sample size `n`
/// (asymptotic form with the Stephens small-sample correction).
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    let k_alpha = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let sqrt_n = (n as f64).sqrt();
    k_alpha / (sqrt_n + 0.12 + 0.11 / sqrt_n)
}

/// Chi-square goodness-of-fit p-value of `data` against N(0, 1), using
/// `bins` equiprobable cells.
pub fn chi_square_standard_normal_pvalue(data: &[f64], bins: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let edges: Vec<f64> = (1..bins)
        .map(|i| normal.inverse_cdf(i as f64 / bins as f64))
        .collect();
    let mut counts = vec![0u64; bins];
    for x in data {
        let bin = edges.partition_point(|e| e < x);
        counts[bin] += 1;
    }
    let expected = data.len() as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|c| {
            let d = *c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((bins - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

pub fn mean_and_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
