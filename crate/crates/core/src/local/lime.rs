use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::check_instance;
use super::ridge::weighted_ridge_fit;
use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::predictor::{check_arity, Predictor};
use crate::rng::RngStream;
use crate::stats;

/// Perturbed samples drawn from one random stream.
const LIME_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct LimeConfig {
    pub n_sim: usize,
    /// Kernel width on standardised coordinates; `None` means `0.75·√p`.
    pub sigma: Option<f64>,
    pub lambda: f64,
    /// Surrogate terms kept; `None` means `min(p, 5)`.
    pub k: Option<usize>,
    pub seed: u64,
}

impl LimeConfig {
    pub fn new(seed: u64) -> Self {
        LimeConfig {
            n_sim: 1000,
            sigma: None,
            lambda: 1.0,
            k: None,
            seed,
        }
    }

    pub fn n_sim(mut self, n_sim: usize) -> Self {
        self.n_sim = n_sim;
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Sparse weighted linear surrogate around one instance, in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit {
    pub intercept: f64,
    /// Selected surrogate terms. A categorical feature enters as one
    /// indicator per non-reference level, named `feature=level`.
    pub coefficients: Vec<(String, f64)>,
    pub kernel_sigma: f64,
    pub ridge_lambda: f64,
    pub k: usize,
    pub sample_size: usize,
    pub seed: u64,
    pub weights: WeightSummary,
}

impl SurrogateFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn nonzero(&self) -> usize {
        self.coefficients.iter().filter(|(_, v)| *v != 0.0).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coefs: serde_json::Map<String, serde_json::Value> = self
            .coefficients
            .iter()
            .map(|(n, v)| (n.clone(), (*v).into()))
            .collect();
        serde_json::json!({
            "intercept": self.intercept,
            "coefficients": coefs,
            "sigma": self.kernel_sigma,
            "lambda": self.ridge_lambda,
            "k": self.k,
            "n_sim": self.sample_size,
            "seed": self.seed,
            "weights": self.weights,
        })
    }
}

/// How one input feature is sampled and encoded.
enum Encoding {
    /// Normal draws around the empirical mean; encoded as `(v - mean) / scale`.
    Numeric { mean: f64, sd: f64, scale: f64 },
    /// Draws from the empirical column; encoded as level indicators.
    Categorical { column: Vec<f64>, levels: usize },
}

impl Encoding {
    fn width(&self) -> usize {
        match self {
            Encoding::Numeric { .. } => 1,
            Encoding::Categorical { levels, .. } => levels - 1,
        }
    }
}

fn encodings(data: &Dataset) -> Vec<Encoding> {
    (0..data.n_cols())
        .map(|j| {
            let col = data.column(j);
            match data.kind(j) {
                ColumnKind::Categorical { levels } => Encoding::Categorical {
                    column: col,
                    levels: levels.len(),
                },
                ColumnKind::Numeric => {
                    let mean = stats::mean(&col);
                    let sd = if col.len() > 1 {
                        stats::sample_variance(&col).sqrt()
                    } else {
                        0.0
                    };
                    let scale = if sd > 0.0 { sd } else { 1.0 };
                    Encoding::Numeric { mean, sd, scale }
                }
            }
        })
        .collect()
}

/// Local surrogate around `x`.
///
/// Samples are drawn feature by feature from the data's marginal moments,
/// weighted by an RBF kernel of their standardised distance to `x`, and a
/// weighted ridge regression of the predictions is fitted on standardised
/// features. The `k` terms with the largest standardised coefficients are
/// then refitted alone.
pub fn lime_explain<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    x: &[f64],
    cfg: &LimeConfig,
) -> Result<SurrogateFit> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_arity(pred, data)?;
    check_instance(data, x)?;
    let p = data.n_cols();
    if cfg.n_sim < p + 2 {
        return Err(Error::invalid(format!(
            "n_sim must be at least p + 2 = {}",
            p + 2
        )));
    }
    let sigma = cfg.sigma.unwrap_or(0.75 * (p as f64).sqrt());
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "kernel width must be positive, got {sigma}"
        )));
    }
    let enc = encodings(data);
    let width: usize = enc.iter().map(Encoding::width).sum();
    let k = cfg.k.unwrap_or(p.min(5));
    if k == 0 || k > width {
        return Err(Error::invalid(format!(
            "k must lie in 1..={width}, got {k}"
        )));
    }

    let chunks = cfg.n_sim.div_ceil(LIME_CHUNK);
    let samples: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = LIME_CHUNK.min(cfg.n_sim - c * LIME_CHUNK);
            let mut rng = RngStream::new(cfg.seed, c as u64).rng();
            let mut out = Vec::with_capacity(len * p);
            for _ in 0..len {
                for e in &enc {
                    out.push(match e {
                        Encoding::Numeric { mean, sd, .. } => {
                            mean + sd * rng.sample::<f64, _>(StandardNormal)
                        }
                        Encoding::Categorical { column, .. } => {
                            column[rng.random_range(0..column.len())]
                        }
                    });
                }
            }
            out
        })
        .collect();
    let flat = samples.concat();
    let y = pred.predict_flat(&flat)?;

    let mut design = Vec::with_capacity(cfg.n_sim);
    let mut weights = Vec::with_capacity(cfg.n_sim);
    for s in flat.chunks_exact(p) {
        let mut row = Vec::with_capacity(width);
        let mut d2 = 0.0;
        for ((e, &v), &xv) in enc.iter().zip(s).zip(x) {
            match e {
                Encoding::Numeric { mean, scale, .. } => {
                    row.push((v - mean) / scale);
                    d2 += ((v - xv) / scale).powi(2);
                }
                Encoding::Categorical { levels, .. } => {
                    row.extend((1..*levels).map(|l| if v as usize == l { 1.0 } else { 0.0 }));
                    if v != xv {
                        d2 += 1.0;
                    }
                }
            }
        }
        design.push(row);
        weights.push((-d2 / (2.0 * sigma * sigma)).exp());
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroKernelWeight { sigma });
    }

    let full = weighted_ridge_fit(&design, &y, &weights, cfg.lambda)?;
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| {
        full.coefficients[b]
            .abs()
            .total_cmp(&full.coefficients[a].abs())
    });
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    let reduced: Vec<Vec<f64>> = design
        .iter()
        .map(|r| keep.iter().map(|&c| r[c]).collect())
        .collect();
    let fit = weighted_ridge_fit(&reduced, &y, &weights, cfg.lambda)?;

    let names = term_names(data);
    let mut info = Vec::with_capacity(width);
    for e in &enc {
        match e {
            Encoding::Numeric { mean, scale, .. } => info.push(Some((*mean, *scale))),
            Encoding::Categorical { levels, .. } => info.extend((1..*levels).map(|_| None)),
        }
    }
    let mut intercept = fit.intercept;
    let mut coefficients = Vec::with_capacity(k);
    for (&c, &b) in keep.iter().zip(&fit.coefficients) {
        let b = match info[c] {
            Some((mean, scale)) => {
                intercept -= b * mean / scale;
                b / scale
            }
            None => b,
        };
        coefficients.push((names[c].clone(), b));
    }

    Ok(SurrogateFit {
        intercept,
        coefficients,
        kernel_sigma: sigma,
        ridge_lambda: cfg.lambda,
        k,
        sample_size: cfg.n_sim,
        seed: cfg.seed,
        weights: WeightSummary {
            min: weights.iter().copied().fold(f64::INFINITY, f64::min),
            max: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: stats::mean(&weights),
        },
    })
}

fn term_names(data: &Dataset) -> Vec<String> {
    let mut names = Vec::new();
    for j in 0..data.n_cols() {
        match data.kind(j) {
            ColumnKind::Numeric => names.push(data.name(j).to_string()),
            ColumnKind::Categorical { levels } => {
                names.extend(levels[1..].iter().map(|l| format!("{}={l}", data.name(j))));
            }
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::FnPredictor;
    use rand::SeedableRng;

    fn uniform_data(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let names: Vec<String> = (0..p).map(|j| format!("x{}", j + 1)).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Dataset::numeric(&refs, &rows).unwrap()
    }

    #[test]
    fn recovers_linear_target() {
        let data = uniform_data(100, 2, 1);
        let f = FnPredictor::new(2, |x: &[f64]| 3.0 * x[0] + 1.0);
        let cfg = LimeConfig::new(5).n_sim(2000).lambda(1e-8).k(2);
        let fit = lime_explain(&f, &data, &[0.2, -0.4], &cfg).unwrap();
        assert!((fit.coefficient("x1").unwrap() - 3.0).abs() < 0.02 * 3.0);
        assert!((fit.intercept - 1.0).abs() < 0.02);
        assert!(fit.coefficient("x2").unwrap().abs() < 1e-6);
    }

    #[test]
    fn constant_predictor() {
        let data = uniform_data(50, 3, 2);
        let f = FnPredictor::new(3, |_: &[f64]| 2.5);
        let fit = lime_explain(&f, &data, &[0.0, 0.0, 0.0], &LimeConfig::new(1)).unwrap();
        assert!(fit.coefficients.iter().all(|(_, v)| v.abs() <= 1e-8));
        assert!((fit.intercept - 2.5).abs() < 1e-9);
    }

    #[test]
    fn kernel_width_changes_local_slope() {
        let data = uniform_data(200, 1, 3);
        let f = FnPredictor::new(1, |x: &[f64]| if x[0] >= 0.3 { 1.0 } else { 0.0 });
        let slopes: Vec<f64> = [0.1, 0.75, 2.0]
            .iter()
            .map(|&s| {
                let cfg = LimeConfig::new(7).sigma(s).k(1);
                lime_explain(&f, &data, &[0.25], &cfg).unwrap().coefficients[0].1
            })
            .collect();
        assert!((slopes[0] - slopes[1]).abs() > 1e-3);
        assert!((slopes[1] - slopes[2]).abs() > 1e-3);
        assert!((slopes[0] - slopes[2]).abs() > 1e-3);
    }

    #[test]
    fn respects_sparsity_cap() {
        let data = uniform_data(60, 6, 4);
        let f = FnPredictor::new(6, |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * v)
                .sum()
        });
        for k in 1..=6 {
            let fit = lime_explain(&f, &data, &[0.1; 6], &LimeConfig::new(k as u64).k(k)).unwrap();
            assert!(fit.nonzero() <= k);
            assert_eq!(fit.coefficients.len(), k);
        }
        let fit = lime_explain(&f, &data, &[0.1; 6], &LimeConfig::new(0)).unwrap();
        assert_eq!(fit.k, 5);
        // The strongest slopes belong to x6, x5, ...
        assert!(fit.coefficient("x1").is_none());
    }

    #[test]
    fn categorical_features_enter_as_indicators() {
        let data = Dataset::from_rows(
            vec!["x".into(), "c".into()],
            vec![
                ColumnKind::Numeric,
                ColumnKind::Categorical {
                    levels: vec!["a".into(), "b".into(), "c".into()],
                },
            ],
            &(0..30)
                .map(|i| vec![i as f64 / 30.0, (i % 3) as f64])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let f = FnPredictor::new(2, |x: &[f64]| x[0] + if x[1] == 2.0 { 4.0 } else { 0.0 });
        let cfg = LimeConfig::new(2).lambda(1e-8).k(3);
        let fit = lime_explain(&f, &data, &[0.5, 0.0], &cfg).unwrap();
        assert!((fit.coefficient("c=c").unwrap() - 4.0).abs() < 1e-6);
        assert!(fit.coefficient("c=b").unwrap().abs() < 1e-6);
        assert!((fit.coefficient("x").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reproducible_and_validated() {
        let data = uniform_data(40, 2, 5);
        let f = FnPredictor::new(2, |x: &[f64]| x[0] * x[1]);
        let cfg = LimeConfig::new(9);
        let a = lime_explain(&f, &data, &[0.5, 0.5], &cfg).unwrap();
        let b = lime_explain(&f, &data, &[0.5, 0.5], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(lime_explain(&f, &data, &[0.5, 0.5], &cfg.clone().n_sim(3)).is_err());
        assert!(lime_explain(&f, &data, &[0.5, 0.5], &cfg.clone().sigma(0.0)).is_err());
        assert!(lime_explain(&f, &data, &[0.5, 0.5], &cfg.clone().k(3)).is_err());
        assert!(matches!(
            lime_explain(&f, &data, &[0.5, 0.5], &cfg.clone().sigma(1e-6)),
            Err(Error::ZeroKernelWeight { .. })
        ));
    }
}
