//! Loss functions used to score predictions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `1/(2n) Σ (y - ŷ)²`.
    Mse,
    /// `1/n Σ |y - ŷ|`.
    Mae,
    /// `2/n Σ [y ln(y/ŷ) - (y - ŷ)]`, the `y = 0` term being `ŷ`.
    #[serde(rename = "poisson")]
    PoissonDeviance,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::Mae => "mae",
            LossKind::PoissonDeviance => "poisson",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "mae" => Ok(LossKind::Mae),
            "poisson" | "poisson_deviance" => Ok(LossKind::PoissonDeviance),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

pub fn compute_loss(kind: LossKind, y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = y.len() as f64;
    let pairs = y.iter().zip(yhat);
    let loss = match kind {
        LossKind::Mse => pairs.map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * n),
        LossKind::Mae => pairs.map(|(a, b)| (a - b).abs()).sum::<f64>() / n,
        LossKind::PoissonDeviance => {
            let mut total = 0.0;
            for (&obs, &pred) in pairs {
                total += poisson_term(obs, pred)?;
            }
            2.0 * total / n
        }
    };
    Ok(loss)
}

fn poisson_term(y: f64, yhat: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::Domain(format!(
            "Poisson deviance needs y >= 0, got {y}"
        )));
    }
    if y == 0.0 {
        if yhat < 0.0 {
            return Err(Error::Domain(format!(
                "Poisson deviance needs a non-negative prediction, got {yhat}"
            )));
        }
        return Ok(yhat);
    }
    if yhat <= 0.0 {
        return Err(Error::Domain(format!(
            "Poisson deviance needs a positive prediction when y > 0, got {yhat}"
        )));
    }
    // Rounding can push the term a hair below zero when y ≈ ŷ.
    Ok((y * (y / yhat).ln() - (y - yhat)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_vectors_give_zero() {
        assert_eq!(
            compute_loss(LossKind::Mse, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(
            compute_loss(LossKind::Mae, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(
            compute_loss(
                LossKind::PoissonDeviance,
                &[0.0, 1.0, 2.0],
                &[0.0, 1.0, 2.0]
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn mse_carries_the_half_factor() {
        // (1/(2·2)) · (1 + 1)
        assert_eq!(
            compute_loss(LossKind::Mse, &[0.0, 2.0], &[1.0, 1.0]).unwrap(),
            0.5
        );
    }

    #[test]
    fn mae_and_poisson_by_hand() {
        assert_eq!(
            compute_loss(LossKind::Mae, &[0.0, 3.0], &[1.0, 1.0]).unwrap(),
            1.5
        );
        // y=0 term is ŷ=0.5; y=2, ŷ=1 term is 2 ln 2 - 1.
        let d = compute_loss(LossKind::PoissonDeviance, &[0.0, 2.0], &[0.5, 1.0]).unwrap();
        let expected = 2.0 * (0.5 + 2.0 * 2f64.ln() - 1.0) / 2.0;
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            compute_loss(LossKind::Mse, &[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            compute_loss(LossKind::Mse, &[], &[]),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            compute_loss(LossKind::PoissonDeviance, &[-1.0], &[1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            compute_loss(LossKind::PoissonDeviance, &[1.0], &[0.0]),
            Err(Error::Domain(_))
        ));
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_nonnegative(
            pairs in prop::collection::vec((0.0f64..20.0, 0.01f64..20.0), 1..30),
            rot in 0usize..30,
        ) {
            let y: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let yhat: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let k = rot % y.len();
            let mut y2 = y.clone();
            let mut yhat2 = yhat.clone();
            y2.rotate_left(k);
            yhat2.rotate_left(k);
            y2.reverse();
            yhat2.reverse();
            for kind in [LossKind::Mse, LossKind::Mae, LossKind::PoissonDeviance] {
                let a = compute_loss(kind, &y, &yhat).unwrap();
                let b = compute_loss(kind, &y2, &yhat2).unwrap();
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }

        #[test]
        fn zero_only_when_equal(y in prop::collection::vec(0.1f64..10.0, 1..10), i in 0usize..10, d in 0.01f64..1.0) {
            let mut yhat = y.clone();
            let i = i % y.len();
            yhat[i] += d;
            for kind in [LossKind::Mse, LossKind::Mae, LossKind::PoissonDeviance] {
                prop_assert_eq!(compute_loss(kind, &y, &y).unwrap(), 0.0);
                prop_assert!(compute_loss(kind, &y, &yhat).unwrap() > 0.0);
            }
        }
    }
}
