use super::{interpolate, CurveKind, CurveValues, ExplanationCurve, Grid, GridSource};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::predictor::{check_arity, Predictor};
use crate::stats;

/// Bin of `x` for the edges `z_0 < ... < z_K`: the interval `(z_{m-1}, z_m]`
/// holding it, with the minimum assigned to bin 1. Returns `m - 1`.
fn bin_of(edges: &[f64], x: f64) -> usize {
    edges[1..].partition_point(|&e| e < x).min(edges.len() - 2)
}

fn numeric_feature(data: &Dataset, j: usize, operation: &'static str) -> Result<()> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    data.check_feature(j)?;
    if data.kind(j).is_categorical() {
        return Err(Error::CategoricalUnsupported {
            feature: data.name(j).to_string(),
            operation,
        });
    }
    Ok(())
}

/// Accumulated local effects of feature `j` over `k` quantile intervals.
///
/// The curve holds the centred accumulated effect at every bin edge. Edges
/// that coincide are merged, so the curve may have fewer than `k + 1` points.
/// Between edges the effect is linear, and the centring constant is the mean
/// of that interpolant over the dataset rows.
pub fn ale_curve<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    k: usize,
) -> Result<ExplanationCurve> {
    numeric_feature(data, j, "ALE")?;
    check_arity(pred, data)?;
    if k == 0 {
        return Err(Error::invalid("ALE needs at least one interval"));
    }
    let col = data.column(j);
    let edges = stats::observed_quantile_edges(&col, k);
    if edges.len() < 2 {
        return Err(Error::invalid(format!(
            "feature `{}` takes a single value; ALE needs at least two distinct values",
            data.name(j)
        )));
    }
    let n_bins = edges.len() - 1;
    let bins: Vec<usize> = col.iter().map(|&x| bin_of(&edges, x)).collect();

    let p = data.n_cols();
    let mut upper = data.as_flat().to_vec();
    let mut lower = upper.clone();
    for (i, &b) in bins.iter().enumerate() {
        upper[i * p + j] = edges[b + 1];
        lower[i * p + j] = edges[b];
    }
    let (hi, lo) = rayon::join(|| pred.predict_flat(&upper), || pred.predict_flat(&lower));
    let (hi, lo) = (hi?, lo?);

    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (i, &b) in bins.iter().enumerate() {
        sums[b] += hi[i] - lo[i];
        counts[b] += 1;
    }
    let mut accumulated = Vec::with_capacity(edges.len());
    accumulated.push(0.0);
    for b in 0..n_bins {
        // An empty interval contributes no local effect.
        let step = if counts[b] > 0 {
            sums[b] / counts[b] as f64
        } else {
            0.0
        };
        accumulated.push(accumulated[b] + step);
    }

    let at_rows: Vec<f64> = col
        .iter()
        .map(|&x| interpolate(&edges, &accumulated, x))
        .collect();
    let centre = stats::mean(&at_rows);
    let values = accumulated.iter().map(|a| a - centre).collect();

    Ok(ExplanationCurve {
        kind: CurveKind::Ale,
        feature_name: data.name(j).to_string(),
        grid: Grid::with_source(j, edges, GridSource::Quantiles(k))?,
        values: CurveValues::Aggregate(values),
    })
}

/// Conditional-mean plot: per quantile bin of feature `j`, the mean
/// prediction of the rows falling in it. The grid point of a bin is the mean
/// feature value of its rows; empty bins are dropped.
pub fn mplot_curve<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    bins: usize,
) -> Result<ExplanationCurve> {
    numeric_feature(data, j, "M-plot")?;
    check_arity(pred, data)?;
    if bins == 0 {
        return Err(Error::invalid("M-plot needs at least one bin"));
    }
    let col = data.column(j);
    let edges = stats::observed_quantile_edges(&col, bins);
    let preds = pred.predict_dataset(data)?;

    let n_bins = edges.len().saturating_sub(1).max(1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_bins];
    for (i, &x) in col.iter().enumerate() {
        let b = if edges.len() < 2 {
            0
        } else {
            bin_of(&edges, x)
        };
        members[b].push(i);
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for rows in members.iter().filter(|m| !m.is_empty()) {
        points.push(stats::mean(
            &rows.iter().map(|&i| col[i]).collect::<Vec<_>>(),
        ));
        values.push(stats::mean(
            &rows.iter().map(|&i| preds[i]).collect::<Vec<_>>(),
        ));
    }
    Ok(ExplanationCurve {
        kind: CurveKind::MPlot,
        feature_name: data.name(j).to_string(),
        grid: Grid::with_source(j, points, GridSource::BinMeans(bins))?,
        values: CurveValues::Aggregate(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnKind;
    use crate::models::{GlmModel, Link};
    use crate::predictor::FnPredictor;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bin_assignment() {
        let edges = [0.0, 1.0, 2.0, 4.0];
        assert_eq!(bin_of(&edges, 0.0), 0);
        assert_eq!(bin_of(&edges, 0.5), 0);
        assert_eq!(bin_of(&edges, 1.0), 0);
        assert_eq!(bin_of(&edges, 1.5), 1);
        assert_eq!(bin_of(&edges, 2.0), 1);
        assert_eq!(bin_of(&edges, 4.0), 2);
    }

    /// Direct transcription of the accumulated-differences sum, evaluated
    /// at the edges, used as an independent check.
    fn brute_force_ale_at_edges(
        f: &dyn Fn(&[f64]) -> f64,
        rows: &[Vec<f64>],
        j: usize,
        edges: &[f64],
    ) -> Vec<f64> {
        let mut out = vec![0.0];
        for m in 1..edges.len() {
            let inside: Vec<&Vec<f64>> = rows
                .iter()
                .filter(|r| {
                    (r[j] > edges[m - 1] || (m == 1 && r[j] == edges[0])) && r[j] <= edges[m]
                })
                .collect();
            let mut s = 0.0;
            for r in &inside {
                let mut a = r.to_vec();
                let mut b = r.to_vec();
                a[j] = edges[m];
                b[j] = edges[m - 1];
                s += f(&a) - f(&b);
            }
            let step = if inside.is_empty() {
                0.0
            } else {
                s / inside.len() as f64
            };
            out.push(out[m - 1] + step);
        }
        out
    }

    fn twenty_rows() -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        (0..20)
            .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(0.0..1.0)])
            .collect()
    }

    #[test]
    fn linear_model_matches_brute_force() {
        let rows = twenty_rows();
        let data = Dataset::numeric(&["a", "b"], &rows).unwrap();
        let beta = 1.7;
        let glm = GlmModel::numeric(0.4, vec![beta, -3.0], Link::Identity);
        let curve = ale_curve(&glm, &data, 0, 5).unwrap();
        let edges = curve.grid.points();
        let f = |x: &[f64]| glm.predict_row(x).unwrap();
        let raw = brute_force_ale_at_edges(&f, &rows, 0, edges);
        let mean_x = rows.iter().map(|r| r[0]).sum::<f64>() / 20.0;
        for (m, (&z, &v)) in edges.iter().zip(curve.aggregate().unwrap()).enumerate() {
            assert!((v - beta * (z - mean_x)).abs() < 1e-9, "edge {m}");
            assert!((raw[m] - beta * (z - edges[0])).abs() < 1e-9);
        }
    }

    #[test]
    fn nonlinear_model_matches_brute_force_up_to_centring() {
        let rows = twenty_rows();
        let data = Dataset::numeric(&["a", "b"], &rows).unwrap();
        let f = |x: &[f64]| x[0] * x[0] * x[1] + (x[0] * 2.0).sin();
        let pred = FnPredictor::new(2, f);
        let curve = ale_curve(&pred, &data, 0, 4).unwrap();
        let raw = brute_force_ale_at_edges(&f, &rows, 0, curve.grid.points());
        let v = curve.aggregate().unwrap();
        let shift = raw[0] - v[0];
        for (a, b) in raw.iter().zip(v) {
            assert!((a - b - shift).abs() < 1e-12);
        }
        let centred: f64 = rows
            .iter()
            .map(|r| curve.interpolate(r[0]).unwrap())
            .sum::<f64>()
            / 20.0;
        assert!(centred.abs() < 1e-9);
    }

    #[test]
    fn constant_model_gives_zero_curve() {
        let data = Dataset::numeric(&["a"], &[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let c = FnPredictor::new(1, |_| 2.5);
        let curve = ale_curve(&c, &data, 0, 2).unwrap();
        assert!(curve.aggregate().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn product_with_independent_centred_x2_is_flat() {
        let data = Dataset::numeric(
            &["x1", "x2"],
            &[
                vec![-1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0],
            ],
        )
        .unwrap();
        let f = FnPredictor::new(2, |x: &[f64]| x[0] * x[1]);
        let curve = ale_curve(&f, &data, 0, 1).unwrap();
        assert!(curve.aggregate().unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ale_errors() {
        let data = Dataset::numeric(&["a"], &[vec![1.0], vec![1.0]]).unwrap();
        let f = FnPredictor::new(1, |x: &[f64]| x[0]);
        assert!(ale_curve(&f, &data, 0, 3).is_err());
        let cat = Dataset::from_rows(
            vec!["c".into()],
            vec![ColumnKind::Categorical {
                levels: vec!["u".into(), "v".into()],
            }],
            &[vec![0.0], vec![1.0]],
        )
        .unwrap();
        assert!(matches!(
            ale_curve(&f, &cat, 0, 1),
            Err(Error::CategoricalUnsupported { .. })
        ));
        assert!(matches!(
            mplot_curve(&f, &cat, 0, 1),
            Err(Error::CategoricalUnsupported { .. })
        ));
    }

    #[test]
    fn mplot_single_bin_is_global_mean() {
        let data = Dataset::numeric(&["x1"], &[vec![1.0], vec![2.0], vec![6.0]]).unwrap();
        let f = FnPredictor::new(1, |x: &[f64]| x[0]);
        let curve = mplot_curve(&f, &data, 0, 1).unwrap();
        assert_eq!(curve.aggregate().unwrap(), &[3.0]);
        assert_eq!(curve.grid.points(), &[3.0]);
    }

    #[test]
    fn mplot_follows_correlated_feature() {
        // x2 = x1 and f = x2: the conditional mean tracks the bin means of x1.
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64]).collect();
        let data = Dataset::numeric(&["x1", "x2"], &rows).unwrap();
        let f = FnPredictor::new(2, |x: &[f64]| x[1]);
        let curve = mplot_curve(&f, &data, 0, 2).unwrap();
        // edges 0, 3.5, 7: bins {0..3} and {4..7}
        assert_eq!(curve.aggregate().unwrap(), &[1.5, 5.5]);
        assert_eq!(curve.grid.points(), &[1.5, 5.5]);
    }

    #[test]
    fn mplot_independent_features_is_flat_within_sample_error() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let data = Dataset::numeric(&["x1", "x2"], &rows).unwrap();
        let f = FnPredictor::new(2, |x: &[f64]| x[1]);
        let curve = mplot_curve(&f, &data, 0, 4).unwrap();
        // Each bin's value is exactly the mean of x2 over its own rows.
        let col0 = data.column(0);
        let edges = stats::observed_quantile_edges(&col0, 4);
        for (b, &v) in curve.aggregate().unwrap().iter().enumerate() {
            let own: Vec<f64> = rows
                .iter()
                .filter(|r| bin_of(&edges, r[0]) == b)
                .map(|r| r[1])
                .collect();
            assert!((v - stats::mean(&own)).abs() < 1e-15);
            // Bins hold ~100 rows of U(0,1): standard error ~0.029.
            assert!((v - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / own.len() as f64).sqrt());
        }
    }

    #[test]
    fn mplot_ties_merge_bins() {
        // Edges collapse to 0, 1: the rows share one bin.
        let data = Dataset::numeric(&["x"], &[vec![0.0], vec![0.0], vec![0.0], vec![1.0]]).unwrap();
        let f = FnPredictor::new(1, |x: &[f64]| 10.0 * x[0]);
        let curve = mplot_curve(&f, &data, 0, 4).unwrap();
        assert_eq!(curve.grid.points(), &[0.25]);
        assert_eq!(curve.aggregate().unwrap(), &[2.5]);
    }
}
