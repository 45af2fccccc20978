//! Small numeric helpers shared by the explainers.

/// Left-to-right mean. The fixed summation order keeps results bit-identical
/// between sequential and parallel callers.
pub(crate) fn mean(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    s / values.len() as f64
}

/// Sample variance with the `1/(n-1)` normalisation.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    let mut s = 0.0;
    for v in values {
        s += (v - m) * (v - m);
    }
    s / (values.len() as f64 - 1.0)
}

/// Linear-interpolation quantile (the common "type 7" definition) of a
/// sorted slice.
pub(crate) fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// `count + 1` quantile edges at probabilities `m / count`, with duplicates
/// merged. The first and last edges are the sample minimum and maximum.
pub(crate) fn quantile_edges(values: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (0..=count)
        .map(|m| quantile_sorted(&sorted, m as f64 / count as f64))
        .collect();
    edges.dedup();
    edges
}

/// `count + 1` inverse-CDF quantiles at probabilities `m / count`, with
/// duplicates merged. Every edge is an observed value, so each interval
/// `(z_{m-1}, z_m]` holds at least the rows equal to `z_m`.
pub(crate) fn observed_quantile_edges(values: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = (0..=count)
        .map(|m| {
            let rank = (m * n).div_ceil(count);
            sorted[rank.saturating_sub(1)]
        })
        .collect();
    edges.dedup();
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(
            quantile_edges(&[0.0, 0.0, 0.0, 1.0], 4),
            vec![0.0, 0.25, 1.0]
        );
        assert_eq!(
            observed_quantile_edges(&[0.0, 0.0, 0.0, 1.0], 4),
            vec![0.0, 1.0]
        );
        assert_eq!(
            observed_quantile_edges(&[4.0, 1.0, 3.0, 2.0], 2),
            vec![1.0, 2.0, 4.0]
        );
        assert_eq!(
            observed_quantile_edges(&[4.0, 1.0, 3.0, 2.0], 4),
            vec![1.0, 2.0, 3.0, 4.0]
        );
    }

    #[test]
    fn variance() {
        assert_eq!(sample_variance(&[0.0, 2.0]), 2.0);
    }
}
