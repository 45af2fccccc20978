//! Friedman's H-statistics: the share of partial-dependence variance that
//! is not explained by the sum of lower-order partial dependences.
//!
//! Every partial-dependence function is evaluated at the sample rows' own
//! coordinates, averaging over the same sample, and centred to mean zero
//! before the ratio is formed. Categorical features take part through their
//! observed level indices.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::predictor::{check_arity, Predictor};
use crate::rng::RngStream;
use crate::stats;

/// Largest sample used by [`HSample::default_for`].
pub const DEFAULT_H_SAMPLE: usize = 500;

/// Rows over which the statistics are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HSample {
    Full,
    /// A seeded uniform subsample without replacement, kept in row order.
    Subsample {
        size: usize,
        seed: u64,
    },
}

impl HSample {
    /// Full data up to [`DEFAULT_H_SAMPLE`] rows, else a subsample of that
    /// size. A seed is only required in the second case.
    pub fn default_for(n_rows: usize, seed: Option<u64>) -> Result<Self> {
        if n_rows <= DEFAULT_H_SAMPLE {
            return Ok(HSample::Full);
        }
        match seed {
            Some(seed) => Ok(HSample::Subsample {
                size: DEFAULT_H_SAMPLE,
                seed,
            }),
            None => Err(Error::invalid(format!(
                "{n_rows} rows exceed the {DEFAULT_H_SAMPLE}-row default; a seed is needed to subsample"
            ))),
        }
    }

    fn draw(&self, data: &Dataset) -> Result<Dataset> {
        match *self {
            HSample::Full => Ok(data.clone()),
            HSample::Subsample { size, seed } => {
                if size == 0 || size > data.n_rows() {
                    return Err(Error::invalid(format!(
                        "sample size {size} must lie in 1..={}",
                        data.n_rows()
                    )));
                }
                let mut rng = RngStream::new(seed, 0).rng();
                let mut picked = index::sample(&mut rng, data.n_rows(), size).into_vec();
                picked.sort_unstable();
                data.select_rows(&picked)
            }
        }
    }
}

/// Centred partial dependence on `cols`, evaluated at each sample row.
fn centred_pd<P: Predictor + ?Sized>(
    pred: &P,
    sample: &Dataset,
    cols: &[usize],
) -> Result<Vec<f64>> {
    let p = sample.n_cols();
    let flat = sample.as_flat();
    let raw = (0..sample.n_rows())
        .into_par_iter()
        .map(|i| {
            let own = sample.row(i);
            let mut buf = flat.to_vec();
            for r in buf.chunks_exact_mut(p) {
                for &c in cols {
                    r[c] = own[c];
                }
            }
            Ok(stats::mean(&pred.predict_flat(&buf)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(centre(raw))
}

fn centre(mut v: Vec<f64>) -> Vec<f64> {
    let m = stats::mean(&v);
    for x in &mut v {
        *x -= m;
    }
    v
}

fn sum_sq(v: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x * x;
    }
    s
}

/// A denominator counts as zero when it is indistinguishable from rounding
/// noise on the scale of the centred values.
fn ratio(numerator: f64, denominator: f64, centred: &[f64], what: &str) -> Result<f64> {
    let scale = centred.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let floor = centred.len() as f64 * (1e-12 * scale).powi(2);
    if denominator <= floor {
        return Err(Error::UndefinedStatistic(format!(
            "{what}: the centred partial dependence is identically zero"
        )));
    }
    Ok(numerator / denominator)
}

fn prepare<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    features: &[usize],
    sample: &HSample,
) -> Result<Dataset> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_arity(pred, data)?;
    for &j in features {
        data.check_feature(j)?;
    }
    sample.draw(data)
}

fn pairwise_from(pd_a: &[f64], pd_b: &[f64], pd_ab: &[f64]) -> Result<f64> {
    let num = sum_sq((0..pd_ab.len()).map(|i| pd_ab[i] - pd_a[i] - pd_b[i]));
    ratio(
        num,
        sum_sq(pd_ab.iter().copied()),
        pd_ab,
        "pairwise H-statistic",
    )
}

/// Pairwise statistic `H²_{jk}`. Symmetric in `(j, k)` bit for bit.
pub fn h_pairwise<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    k: usize,
    sample: &HSample,
) -> Result<f64> {
    if j == k {
        return Err(Error::invalid(
            "pairwise H-statistic needs two distinct features",
        ));
    }
    let (a, b) = (j.min(k), j.max(k));
    let s = prepare(pred, data, &[a, b], sample)?;
    let pd_a = centred_pd(pred, &s, &[a])?;
    let pd_b = centred_pd(pred, &s, &[b])?;
    let pd_ab = centred_pd(pred, &s, &[a, b])?;
    pairwise_from(&pd_a, &pd_b, &pd_ab)
}

fn one_vs_rest_from(f: &[f64], pd_j: &[f64], pd_rest: &[f64]) -> Result<f64> {
    let num = sum_sq((0..f.len()).map(|i| f[i] - pd_j[i] - pd_rest[i]));
    ratio(num, sum_sq(f.iter().copied()), f, "one-vs-rest H-statistic")
}

fn rest(p: usize, j: usize) -> Vec<usize> {
    (0..p).filter(|&c| c != j).collect()
}

/// One-versus-rest statistic `H²_j`: the interaction of feature `j` with all
/// other features together.
pub fn h_one_vs_rest<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    sample: &HSample,
) -> Result<f64> {
    if data.n_cols() < 2 {
        return Err(Error::invalid(
            "one-vs-rest H-statistic needs at least two features",
        ));
    }
    let s = prepare(pred, data, &[j], sample)?;
    let f = centre(pred.predict_dataset(&s)?);
    let pd_j = centred_pd(pred, &s, &[j])?;
    let pd_rest = centred_pd(pred, &s, &rest(s.n_cols(), j))?;
    one_vs_rest_from(&f, &pd_j, &pd_rest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HPair {
    pub i: usize,
    pub j: usize,
    /// `None` when the statistic is undefined for this pair.
    pub h2: Option<f64>,
}

/// Statistics for a set of features. Pairs are listed with `i < j`; the
/// diagonal is undefined and not stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HMatrix {
    #[serde(skip)]
    pub features: Vec<usize>,
    #[serde(skip)]
    pub names: Vec<String>,
    pub pairs: Vec<HPair>,
    pub one_vs_rest: Vec<Option<f64>>,
}

impl HMatrix {
    /// `H²` for the pair `(a, b)` in either order.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let (i, j) = (a.min(b), a.max(b));
        self.pairs
            .iter()
            .find(|p| p.i == i && p.j == j)
            .and_then(|p| p.h2)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "features": self.names,
            "pairs": self.pairs,
            "one_vs_rest": self.one_vs_rest,
        })
    }
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedStatistic(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Every pairwise statistic among `features` plus each one-vs-rest
/// statistic, sharing the one-feature partial dependences. Undefined
/// entries are reported as `None`.
pub fn h_matrix<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    features: &[usize],
    sample: &HSample,
) -> Result<HMatrix> {
    let mut feats = features.to_vec();
    feats.sort_unstable();
    feats.dedup();
    if feats.len() < 2 {
        return Err(Error::invalid("H-statistics need at least two features"));
    }
    let s = prepare(pred, data, &feats, sample)?;
    let f = centre(pred.predict_dataset(&s)?);
    let single = feats
        .iter()
        .map(|&j| centred_pd(pred, &s, &[j]))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for a in 0..feats.len() {
        for b in a + 1..feats.len() {
            let pd_ab = centred_pd(pred, &s, &[feats[a], feats[b]])?;
            pairs.push(HPair {
                i: feats[a],
                j: feats[b],
                h2: defined(pairwise_from(&single[a], &single[b], &pd_ab))?,
            });
        }
    }
    let mut one_vs_rest = Vec::with_capacity(feats.len());
    for (a, &j) in feats.iter().enumerate() {
        let pd_rest = centred_pd(pred, &s, &rest(s.n_cols(), j))?;
        one_vs_rest.push(defined(one_vs_rest_from(&f, &single[a], &pd_rest))?);
    }
    Ok(HMatrix {
        names: feats.iter().map(|&j| data.name(j).to_string()).collect(),
        features: feats,
        pairs,
        one_vs_rest,
    })
}
