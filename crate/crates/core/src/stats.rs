//! Summary statistics, confidence intervals and goodness-of-fit distances.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `len − 1`).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn std_error(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Normal-approximation interval `mean ± z·se`.
pub fn normal_interval(xs: &[f64], z: f64) -> (f64, f64) {
    let (m, se) = (mean(xs), std_error(xs));
    (m - z * se, m + z * se)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and a continuous CDF. Sorts `samples` in place.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    ks_distance_from(samples, f64::NEG_INFINITY, cdf)
}

/// Kolmogorov–Smirnov distance restricted to `z ≥ lower`:
/// `sup_{z ≥ lower} |F_emp(z) − F(z)|`.
pub fn ks_distance_from<F: Fn(f64) -> f64>(samples: &mut [f64], lower: f64, cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let m = samples.len() as f64;
    let below = samples.partition_point(|&x| x < lower);
    let mut d = if lower.is_finite() {
        let at = samples.partition_point(|&x| x <= lower) as f64 / m;
        (at - cdf(lower)).abs()
    } else {
        0.0
    };
    for (i, &x) in samples.iter().enumerate().skip(below) {
        let f = cdf(x);
        let hi = (i + 1) as f64 / m;
        let lo = i as f64 / m;
        d = d.max((hi - f).abs());
        if x > lower {
            d = d.max((f - lo).abs());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 8/10 at 95%: (0.4902, 0.9433).
        let (lo, hi) = wilson_interval(8, 10, Z95);
        assert!((lo - 0.490_16).abs() < 1e-4 && (hi - 0.943_32).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson_interval(20, 20, Z95);
        assert!(hi == 1.0 && (lo - 0.838_9).abs() < 1e-3, "{lo}");
    }

    #[test]
    fn ks_of_uniform_grid() {
        let mut xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn basic_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((std_dev(&xs) - 1.290_994_448_735_805_6).abs() < 1e-12);
        let (lo, hi) = normal_interval(&xs, Z95);
        assert!(lo < 2.5 && hi > 2.5);
    }
}
