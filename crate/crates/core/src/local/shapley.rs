use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{check_instance, Attribution, AttributionMethod};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{GlmModel, Link};
use crate::predictor::{check_arity, Predictor};
use crate::rng::{stream_id, RngStream};
use crate::stats;

/// Largest player count accepted by the exact solvers.
pub const EXACT_MAX_PLAYERS: usize = 12;
/// Up to this many players the subset form is cross-checked against the
/// permutation form.
const CROSS_CHECK_MAX_PLAYERS: usize = 8;
/// Monte-Carlo iterations drawn from one random stream.
pub const MC_CHUNK: usize = 512;

/// A cooperative game with `p` players, materialised on all `2^p`
/// coalitions. Coalitions are bit masks: player `i` is bit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionGame {
    p: usize,
    values: Vec<f64>,
}

impl CoalitionGame {
    pub fn new(p: usize, values: Vec<f64>) -> Result<Self> {
        if p > EXACT_MAX_PLAYERS {
            return Err(Error::TooManyPlayers {
                p,
                cap: EXACT_MAX_PLAYERS,
            });
        }
        if values.len() != 1 << p {
            return Err(Error::LengthMismatch {
                expected: 1 << p,
                found: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::NonZeroEmptyCoalition(values[0]));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("coalition values must be finite".into()));
        }
        Ok(CoalitionGame { p, values })
    }

    pub fn from_fn(p: usize, v: impl Fn(usize) -> f64) -> Result<Self> {
        if p > EXACT_MAX_PLAYERS {
            return Err(Error::TooManyPlayers {
                p,
                cap: EXACT_MAX_PLAYERS,
            });
        }
        Self::new(p, (0..1usize << p).map(v).collect())
    }

    pub fn players(&self) -> usize {
        self.p
    }

    pub fn value(&self, coalition: usize) -> f64 {
        self.values[coalition]
    }

    pub fn grand_value(&self) -> f64 {
        self.values[(1 << self.p) - 1]
    }
}

/// Shapley values from the subset form: each marginal contribution
/// `v(S ∪ {i}) - v(S)` weighted by `|S|! (p - |S| - 1)! / p!`.
pub fn shapley_subset(game: &CoalitionGame) -> Vec<f64> {
    let p = game.p;
    // 1 / (p * C(p-1, s)) equals the factorial weight without overflow.
    let mut binom = vec![1.0f64; p.max(1)];
    for s in 1..p {
        binom[s] = binom[s - 1] * (p - s) as f64 / s as f64;
    }
    let weight: Vec<f64> = binom.iter().map(|b| 1.0 / (p as f64 * b)).collect();
    (0..p)
        .map(|i| {
            let bit = 1usize << i;
            let mut phi = 0.0;
            for s in 0..1usize << p {
                if s & bit == 0 {
                    phi +=
                        weight[s.count_ones() as usize] * (game.values[s | bit] - game.values[s]);
                }
            }
            phi
        })
        .collect()
}

/// Shapley values from the permutation form: the marginal contribution of
/// each player averaged over every ordering of the players. Costs `p!·p`.
pub fn shapley_permutation(game: &CoalitionGame) -> Vec<f64> {
    let p = game.p;
    let mut sums = vec![0.0; p];
    let mut comp = vec![0.0; p];
    let mut count = 0usize;
    for order in (0..p).permutations(p) {
        let mut coalition = 0usize;
        for &i in &order {
            let next = coalition | (1 << i);
            neumaier_add(
                &mut sums[i],
                &mut comp[i],
                game.values[next] - game.values[coalition],
            );
            coalition = next;
        }
        count += 1;
    }
    (0..p).map(|i| (sums[i] + comp[i]) / count as f64).collect()
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Exact Shapley values of a game (base 0, prediction `v(P)`). For small
/// games both closed forms are evaluated and must agree.
pub fn shapley_exact_game(game: &CoalitionGame) -> Result<Attribution> {
    let phis = shapley_subset(game);
    if game.p <= CROSS_CHECK_MAX_PLAYERS {
        let other = shapley_permutation(game);
        let scale = game.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (i, (a, b)) in phis.iter().zip(&other).enumerate() {
            if (a - b).abs() > 1e-12 * scale {
                return Err(Error::Consistency(format!(
                    "subset and permutation forms disagree for player {i}: {a} vs {b}"
                )));
            }
        }
    }
    Ok(Attribution {
        names: (0..game.p).map(|i| format!("player{i}")).collect(),
        phis,
        base: 0.0,
        prediction: game.grand_value(),
        method: AttributionMethod::Exact,
        std_errors: None,
    })
}

fn check_inputs<P: Predictor + ?Sized>(pred: &P, data: &Dataset, x: &[f64]) -> Result<()> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_arity(pred, data)?;
    check_instance(data, x)
}

/// Exact Shapley attribution of `pred` at `x` under the marginal-expectation
/// value function: `v(S)` is the mean prediction over the background rows
/// with the features in `S` fixed to `x`, minus the mean prediction.
pub fn shapley_exact<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    x: &[f64],
) -> Result<Attribution> {
    check_inputs(pred, data, x)?;
    let p = data.n_cols();
    if p > EXACT_MAX_PLAYERS {
        return Err(Error::TooManyPlayers {
            p,
            cap: EXACT_MAX_PLAYERS,
        });
    }
    let full = (1usize << p) - 1;
    let means = (0..=full)
        .into_par_iter()
        .map(|mask| {
            if mask == full {
                return pred.predict_row(x);
            }
            let mut buf = data.as_flat().to_vec();
            for r in buf.chunks_exact_mut(p) {
                for (j, v) in r.iter_mut().enumerate() {
                    if mask & (1 << j) != 0 {
                        *v = x[j];
                    }
                }
            }
            Ok(stats::mean(&pred.predict_flat(&buf)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let base = means[0];
    let values = means.iter().map(|m| m - base).collect();
    let mut attr = shapley_exact_game(&CoalitionGame::new(p, values)?)?;
    attr.names = data.names().to_vec();
    attr.base = base;
    attr.prediction = means[full];
    Ok(attr)
}

/// Closed form for an identity-link GLM: `φ_j = β_j (x_j - mean_j)`, with
/// categorical terms centred on their empirical mean.
pub fn shapley_linear(model: &GlmModel, data: &Dataset, x: &[f64]) -> Result<Attribution> {
    if model.link != Link::Identity {
        return Err(Error::invalid(
            "the linear closed form needs an identity link",
        ));
    }
    check_inputs(model, data, x)?;
    let phis = (0..data.n_cols())
        .map(|j| {
            let terms = data
                .column(j)
                .iter()
                .map(|&v| model.term(j, v))
                .collect::<Result<Vec<_>>>()?;
            Ok(model.term(j, x[j])? - stats::mean(&terms))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Attribution {
        names: data.names().to_vec(),
        phis,
        base: stats::mean(&model.predict_dataset(data)?),
        prediction: model.predict_row(x)?,
        method: AttributionMethod::LinearClosedForm,
        std_errors: None,
    })
}

/// Monte-Carlo estimate of one Shapley value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation of the increments.
    pub std_dev: f64,
    pub iterations: usize,
}

impl McEstimate {
    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.iterations as f64).sqrt()
    }
}

/// One increment `g(x⁺) - g(x⁻)`: features before `j` in `order` come from
/// `x`, features after it from `z`; `j` itself from `x` in `x⁺` and from `z`
/// in `x⁻`.
pub(crate) fn mc_increment<P: Predictor + ?Sized>(
    pred: &P,
    x: &[f64],
    z: &[f64],
    order: &[usize],
    j: usize,
) -> Result<f64> {
    let mut plus = z.to_vec();
    for &k in order {
        plus[k] = x[k];
        if k == j {
            break;
        }
    }
    let mut minus = plus.clone();
    minus[j] = z[j];
    Ok(pred.predict_row(&plus)? - pred.predict_row(&minus)?)
}

/// Estimate of `φ_j` from `m` sampled (permutation, background row) pairs.
///
/// Iterations are split into chunks of [`MC_CHUNK`]; chunk `c` for feature
/// `j` draws from stream `(j, c)` of `seed`, first the permutation and then
/// the row, so the result does not depend on the thread count.
pub fn shapley_mc<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    x: &[f64],
    j: usize,
    m: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(pred, data, x)?;
    data.check_feature(j)?;
    if m == 0 {
        return Err(Error::invalid(
            "Monte-Carlo Shapley needs at least one iteration",
        ));
    }
    let p = data.n_cols();
    let n = data.n_rows();
    let chunks = m.div_ceil(MC_CHUNK);
    let increments: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(m - c * MC_CHUNK);
            let mut rng = RngStream::new(seed, stream_id(j, c)).rng();
            let mut order: Vec<usize> = (0..p).collect();
            (0..len)
                .map(|_| {
                    order.shuffle(&mut rng);
                    let z = data.row(rng.random_range(0..n));
                    mc_increment(pred, x, z, &order, j)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let all: Vec<f64> = increments.concat();
    let value = stats::mean(&all);
    let std_dev = if m > 1 {
        stats::sample_variance(&all).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        value,
        std_dev,
        iterations: m,
    })
}

/// [`shapley_mc`] for every feature, as an attribution whose base is the
/// mean prediction over `data`.
pub fn shapley_mc_all<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    x: &[f64],
    m: usize,
    seed: u64,
) -> Result<Attribution> {
    let estimates = (0..data.n_cols())
        .map(|j| shapley_mc(pred, data, x, j, m, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Attribution {
        names: data.names().to_vec(),
        phis: estimates.iter().map(|e| e.value).collect(),
        base: stats::mean(&pred.predict_dataset(data)?),
        prediction: pred.predict_row(x)?,
        method: AttributionMethod::MonteCarlo {
            iterations: m,
            seed,
        },
        std_errors: Some(estimates.iter().map(McEstimate::std_error).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::FnPredictor;
    use rand::SeedableRng;

    fn glove_game() -> CoalitionGame {
        // v(S) = 1 iff players 0 and 1 are both in S.
        CoalitionGame::from_fn(3, |s| if s & 0b011 == 0b011 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn glove_game_by_enumeration() {
        let attr = shapley_exact_game(&glove_game()).unwrap();
        assert_eq!(attr.phis, vec![0.5, 0.5, 0.0]);
        // Hand enumeration of the 6 orderings: player 0 completes the pair in
        // (1,0,2), (1,2,0), (2,1,0) and player 1 in the other three.
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut credit = [0.0; 3];
        for o in orders {
            let first = o.iter().position(|&i| i == 0).unwrap();
            let second = o.iter().position(|&i| i == 1).unwrap();
            credit[o[first.max(second)]] += 1.0 / 6.0;
        }
        assert_eq!(credit[2], 0.0);
        assert!((credit[0] - attr.phis[0]).abs() < 1e-15);
    }

    #[test]
    fn game_preconditions() {
        assert!(matches!(
            CoalitionGame::new(1, vec![1.0, 2.0]),
            Err(Error::NonZeroEmptyCoalition(_))
        ));
        assert!(CoalitionGame::new(2, vec![0.0, 1.0]).is_err());
        assert!(matches!(
            CoalitionGame::from_fn(13, |_| 0.0),
            Err(Error::TooManyPlayers { p: 13, .. })
        ));
    }

    #[test]
    fn forms_agree_on_random_games() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for p in 1..=7 {
            let mut values: Vec<f64> = (0..1 << p).map(|_| rng.random_range(-5.0..5.0)).collect();
            values[0] = 0.0;
            let g = CoalitionGame::new(p, values).unwrap();
            let a = shapley_subset(&g);
            let b = shapley_permutation(&g);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((a.iter().sum::<f64>() - g.grand_value()).abs() < 1e-10);
        }
    }

    #[test]
    fn shapley_exact_on_glm_matches_closed_form() {
        let data = Dataset::numeric(
            &["a", "b"],
            &[vec![0.0, 1.0], vec![2.0, 3.0], vec![1.0, 2.0]],
        )
        .unwrap();
        let glm = GlmModel::numeric(0.5, vec![2.0, -1.0], Link::Identity);
        let x = [3.0, 4.0];
        let exact = shapley_exact(&glm, &data, &x).unwrap();
        let linear = shapley_linear(&glm, &data, &x).unwrap();
        // means are (1, 2): phi = (2*2, -1*2)
        assert_eq!(linear.phis, vec![4.0, -2.0]);
        for (a, b) in exact.phis.iter().zip(&linear.phis) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(exact.efficiency_gap().abs() < 1e-9);
        assert!(linear.efficiency_gap().abs() < 1e-12);
    }

    #[test]
    fn linear_form_edge_cases() {
        let data = Dataset::numeric(&["a"], &[vec![1.0], vec![3.0]]).unwrap();
        let glm = GlmModel::numeric(0.0, vec![5.0], Link::Identity);
        let attr = shapley_linear(&glm, &data, &[7.0]).unwrap();
        assert_eq!(attr.phis[0], attr.prediction - attr.base);
        assert_eq!(shapley_linear(&glm, &data, &[2.0]).unwrap().phis, vec![0.0]);
        let log = GlmModel::numeric(0.0, vec![5.0], Link::Log);
        assert!(shapley_linear(&log, &data, &[2.0]).is_err());
    }

    #[test]
    fn product_on_balanced_grid_by_hand() {
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
        // v({}) = 0, v({1}) = mean(1 * x2) = 0, v({2}) = 0, v({1,2}) = 1.
        let attr = shapley_exact(&f, &data, &[1.0, 1.0]).unwrap();
        assert_eq!(attr.phis, vec![0.5, 0.5]);
        assert_eq!(attr.base, 0.0);
    }

    #[test]
    fn constant_model_gets_zero_everywhere() {
        let data = Dataset::numeric(&["a", "b"], &[vec![0.0, 1.0], vec![5.0, 3.0]]).unwrap();
        let c = FnPredictor::new(2, |_: &[f64]| 4.0);
        assert_eq!(
            shapley_exact(&c, &data, &[1.0, 1.0]).unwrap().phis,
            vec![0.0, 0.0]
        );
        for seed in 0..3 {
            assert_eq!(
                shapley_mc(&c, &data, &[1.0, 1.0], 0, 100, seed)
                    .unwrap()
                    .value,
                0.0
            );
        }
    }

    #[test]
    fn degenerate_draw_gives_zero_increment() {
        let f = FnPredictor::new(3, |x: &[f64]| x[0] * x[1] + x[2].exp());
        let x = [0.3, -1.2, 2.0];
        assert_eq!(mc_increment(&f, &x, &x, &[0, 1, 2], 1).unwrap(), 0.0);
    }

    #[test]
    fn mc_is_thread_count_independent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random(), rng.random()]).collect();
        let data = Dataset::numeric(&["a", "b"], &rows).unwrap();
        let f = FnPredictor::new(2, |x: &[f64]| x[0] * x[1]);
        let a = shapley_mc(&f, &data, &[0.5, 0.5], 0, 2000, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| shapley_mc(&f, &data, &[0.5, 0.5], 0, 2000, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mc_close_to_linear_closed_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)])
            .collect();
        let data = Dataset::numeric(&["a", "b"], &rows).unwrap();
        let glm = GlmModel::numeric(1.0, vec![1.5, -0.5], Link::Identity);
        let x = [0.9, 0.2];
        let exact = shapley_linear(&glm, &data, &x).unwrap();
        for j in 0..2 {
            let est = shapley_mc(&glm, &data, &x, j, 50_000, 17).unwrap();
            assert!((est.value - exact.phis[j]).abs() <= 4.0 * est.std_error());
        }
    }

    #[test]
    fn exact_rejects_wide_models() {
        let names: Vec<String> = (0..13).map(|j| format!("x{j}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let data = Dataset::numeric(&refs, &[vec![0.0; 13]]).unwrap();
        let f = FnPredictor::new(13, |x: &[f64]| x[0]);
        assert!(matches!(
            shapley_exact(&f, &data, &[0.0; 13]),
            Err(Error::TooManyPlayers { p: 13, cap: 12 })
        ));
    }

    #[test]
    fn attribution_json_shape() {
        let attr = shapley_exact_game(&glove_game()).unwrap();
        let v = attr.to_json();
        assert_eq!(v["method"], "exact");
        assert_eq!(v["phi"].as_array().unwrap().len(), 3);
        let mc = Attribution {
            method: AttributionMethod::MonteCarlo {
                iterations: 10,
                seed: 3,
            },
            ..attr
        };
        assert_eq!(mc.to_json()["iterations"], 10);
    }
}
