use rand::Rng;

use super::check_instance;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A LIVE neighbourhood: copies of the instance with one coordinate each
/// replaced by an observed value of that column. All rows weigh the same.
#[derive(Debug, Clone, PartialEq)]
pub struct LiveSample {
    pub data: Dataset,
    /// Index of the replaced column for each row.
    pub replaced: Vec<usize>,
}

impl LiveSample {
    pub fn weights(&self) -> Vec<f64> {
        vec![1.0 / self.replaced.len() as f64; self.replaced.len()]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self.data.rows().map(<[f64]>::to_vec).collect();
        serde_json::json!({
            "features": self.data.names(),
            "rows": rows,
            "replaced": self.replaced,
        })
    }
}

pub(crate) fn replace_one(x: &[f64], k: usize, value: f64) -> Vec<f64> {
    let mut row = x.to_vec();
    row[k] = value;
    row
}

/// `n_sim` perturbed copies of `x`. For each copy a column `k` is drawn
/// uniformly, then a row of `data` uniformly, and that row's value of `k`
/// replaces `x_k`.
pub fn live_neighborhood(data: &Dataset, x: &[f64], n_sim: usize, seed: u64) -> Result<LiveSample> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_instance(data, x)?;
    if n_sim == 0 {
        return Err(Error::invalid("n_sim must be at least 1"));
    }
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut rng = RngStream::new(seed, 0).rng();
    let mut values = Vec::with_capacity(n_sim * p);
    let mut replaced = Vec::with_capacity(n_sim);
    for _ in 0..n_sim {
        let k = rng.random_range(0..p);
        let donor = rng.random_range(0..n);
        values.extend(replace_one(x, k, data.value(donor, k)));
        replaced.push(k);
    }
    Ok(LiveSample {
        data: Dataset::from_flat(data.names().to_vec(), data.kinds().to_vec(), values)?,
        replaced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> Dataset {
        Dataset::numeric(
            &["a", "b", "c"],
            &[
                vec![1.0, 10.0, 100.0],
                vec![2.0, 20.0, 200.0],
                vec![3.0, 30.0, 300.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn rows_differ_in_at_most_the_replaced_coordinate() {
        let x = [0.5, 0.5, 0.5];
        let s = live_neighborhood(&data(), &x, 500, 3).unwrap();
        for (row, &k) in s.data.rows().zip(&s.replaced) {
            for j in 0..3 {
                if j != k {
                    assert_eq!(row[j], x[j]);
                }
            }
            assert!(data().column(k).contains(&row[k]));
        }
    }

    #[test]
    fn forced_draw_equal_to_instance_is_identity() {
        let x = [2.0, 20.0, 200.0];
        assert_eq!(replace_one(&x, 1, x[1]), x.to_vec());
    }

    #[test]
    fn equal_weights_and_reproducible() {
        let x = [0.0; 3];
        let a = live_neighborhood(&data(), &x, 4, 1).unwrap();
        assert_eq!(a.weights(), vec![0.25; 4]);
        assert_eq!(a, live_neighborhood(&data(), &x, 4, 1).unwrap());
        assert!(live_neighborhood(&data(), &x, 0, 1).is_err());
        assert!(live_neighborhood(&data(), &[0.0], 3, 1).is_err());
    }
}
