//! Sample statistics: quantiles, Kolmogorov–Smirnov tests, log-log slope fits.

use crate::error::{Error, Result};

/// Linear-interpolation quantile (Hyndman–Fan type 7) of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    quantile_sorted(&sorted_copy(xs), 0.5)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimate of a central moment `E(X − EX)^k` with a delta-method standard error.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub order: u32,
    pub value: f64,
    pub se: f64,
}

/// Central moments of orders 2..=4 with standard errors.
///
/// The standard error of `m_k` uses the asymptotic variance
/// `μ_{2k} − μ_k² − 2kμ_{k−1}μ_{k+1} + k²μ_2μ_{k−1}²`.
pub fn central_moments(xs: &[f64]) -> Vec<MomentEstimate> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut mu = [0.0f64; 9];
    for &x in xs {
        let d = x - mean;
        let mut p = 1.0;
        for m in mu.iter_mut() {
            *m += p;
            p *= d;
        }
    }
    for m in mu.iter_mut() {
        *m /= n;
    }
    (2..=4u32)
        .map(|k| {
            let k_us = k as usize;
            let kf = k as f64;
            let var = mu[2 * k_us] - mu[k_us] * mu[k_us] - 2.0 * kf * mu[k_us - 1] * mu[k_us + 1]
                + kf * kf * mu[2] * mu[k_us - 1] * mu[k_us - 1];
            MomentEstimate {
                order: k,
                value: mu[k_us],
                se: (var.max(0.0) / n).sqrt(),
            }
        })
        .collect()
}

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    /// Asymptotic p-value with Stephens' small-sample correction.
    pub p_value: f64,
    pub effective_n: f64,
}

impl KsOutcome {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Kolmogorov survival function `P(K > λ) = 2 Σ (−1)^{j−1} e^{−2j²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, ne: f64) -> f64 {
    let sq = ne.sqrt();
    kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_x − F_y|` with ties handled.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsOutcome> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::usage("KS test needs two non-empty samples"));
    }
    let a = sorted_copy(xs);
    let b = sorted_copy(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    Ok(KsOutcome {
        statistic: d,
        p_value: ks_p_value(d, ne),
        effective_n: ne,
    })
}

/// One-sided two-sample statistic `sup (F_x − F_y)`; large values say `xs`
/// tends to be smaller than `ys`.
pub fn ks_one_sided(xs: &[f64], ys: &[f64]) -> Result<KsOutcome> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::usage("KS test needs two non-empty samples"));
    }
    let a = sorted_copy(xs);
    let b = sorted_copy(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max(i as f64 / n - j as f64 / m);
    }
    let ne = n * m / (n + m);
    Ok(KsOutcome {
        statistic: d,
        // Smirnov: P(D+ > d) ≈ exp(−2 n_e d²)
        p_value: (-2.0 * ne * d * d).exp().min(1.0),
        effective_n: ne,
    })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<KsOutcome> {
    if xs.is_empty() {
        return Err(Error::usage("KS test needs a non-empty sample"));
    }
    let a = sorted_copy(xs);
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max(((i + 1) as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
    }
    Ok(KsOutcome {
        statistic: d,
        p_value: ks_p_value(d, n),
        effective_n: n,
    })
}

/// Standard deviation of the two-sample KS statistic under the null, from the
/// Kolmogorov law (`sd ≈ 0.2603 / sqrt(n_e)`).
pub fn ks_null_sd(n: usize, m: usize) -> f64 {
    let mean = (std::f64::consts::PI / 2.0).sqrt() * std::f64::consts::LN_2;
    let var = std::f64::consts::PI.powi(2) / 12.0 - mean * mean;
    var.sqrt() * (1.0 / n as f64 + 1.0 / m as f64).sqrt()
}

/// Least-squares fit of `log y = intercept + slope·log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::usage("slope fit: x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::usage("slope fit needs at least 3 points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::domain("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se: (rss / (n - 2.0) / sxx).sqrt(),
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantiles_of_small_sample() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert!((quantile_sorted(&s, 0.1) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value > 0.99);
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn ks_handles_ties() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [0.0, 1.0, 1.0, 1.0];
        let r = ks_two_sample(&a, &b).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_critical_point() {
        // 1% critical value of the Kolmogorov law is 1.6276.
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn one_sided_direction() {
        let small: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let large: Vec<f64> = (0..50).map(|i| 25.0 + i as f64).collect();
        assert!((ks_one_sided(&small, &large).unwrap().statistic - 0.5).abs() < 1e-12);
        assert_eq!(ks_one_sided(&large, &small).unwrap().statistic, 0.0);
    }

    #[test]
    fn slope_needs_three_points() {
        assert!(fit_loglog_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn moments_of_symmetric_sample() {
        let xs = [-1.0, 1.0, -1.0, 1.0];
        let m = central_moments(&xs);
        assert!((m[0].value - 1.0).abs() < 1e-15);
        assert!(m[1].value.abs() < 1e-15);
        assert!((m[2].value - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn slope_recovers_power_law(s in -6.0f64..6.0, c in 0.1f64..10.0) {
            let xs = [0.2, 0.1, 0.05, 0.025, 0.0125];
            let ys: Vec<f64> = xs.iter().map(|a: &f64| c * a.powf(s)).collect();
            let fit = fit_loglog_slope(&xs, &ys).unwrap();
            prop_assert!((fit.slope - s).abs() < 1e-12);
        }
    }
}
