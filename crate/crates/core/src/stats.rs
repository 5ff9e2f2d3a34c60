//! Small binomial-proportion helpers for comparing Monte-Carlo rates with
//! exact values.

/// Normal quantile for the 99.7% (three-sigma) two-sided interval.
pub const Z_THREE_SIGMA: f64 = 3.0;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The bounds are exactly 0 and 1 at the extremes; the formula only
    // reaches them up to round-off.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes >= trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// `P(X >= k_min)` for `X ~ Binomial(n, p)`.
pub fn binomial_upper_tail(n: usize, p: f64, k_min: usize) -> f64 {
    if k_min == 0 {
        return 1.0;
    }
    if k_min > n {
        return 0.0;
    }
    // Dynamic programming over the count distribution avoids large binomial
    // coefficients and stays exact for p in {0, 1}.
    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    for trial in 1..=n {
        for k in (0..=trial).rev() {
            let stay = if k < trial { dist[k] * (1.0 - p) } else { 0.0 };
            let step = if k > 0 { dist[k - 1] * p } else { 0.0 };
            dist[k] = stay + step;
        }
    }
    dist[k_min..].iter().sum()
}
