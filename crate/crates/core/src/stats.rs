//! Small helpers shared by the oracles, the FCS module and the tests.

use statrs::function::factorial::ln_binomial;

/// Total-variation distance `1/2 * sum |a_i - b_i|` between two distributions
/// on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distributions must share a support");
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `Binomial(n, p)` probability mass over `0..=n`, evaluated in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let n64 = n as u64;
    (0..=n64)
        .map(|k| {
            if p <= 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            if p >= 1.0 {
                return if k == n64 { 1.0 } else { 0.0 };
            }
            (ln_binomial(n64, k) + k as f64 * p.ln() + (n64 - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}

/// Index of the largest value; the first one wins on exact ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Indices of strict local maxima whose height is at least `min_fraction`
/// of the global maximum.
pub fn local_maxima(values: &[f64], min_fraction: f64) -> Vec<usize> {
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
            let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            values[i] > left && values[i] >= right && values[i] >= min_fraction * top
        })
        .collect()
}
