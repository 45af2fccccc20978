use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    /// Prediction is `exp(η)`.
    Log,
}

/// Coefficient block for one input.
///
/// A categorical input with `L` levels carries `L - 1` dummy coefficients;
/// the first level is the reference and contributes nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Numeric(f64),
    Categorical(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmModel {
    pub intercept: f64,
    pub coefficients: Vec<Coefficient>,
    pub link: Link,
}

impl GlmModel {
    pub fn new(intercept: f64, coefficients: Vec<Coefficient>, link: Link) -> Self {
        GlmModel {
            intercept,
            coefficients,
            link,
        }
    }

    pub fn numeric(intercept: f64, betas: Vec<f64>, link: Link) -> Self {
        Self::new(
            intercept,
            betas.into_iter().map(Coefficient::Numeric).collect(),
            link,
        )
    }

    /// Contribution of input `j` to the linear predictor at value `v`.
    pub fn term(&self, j: usize, v: f64) -> Result<f64> {
        match &self.coefficients[j] {
            Coefficient::Numeric(b) => Ok(b * v),
            Coefficient::Categorical(dummies) => {
                if v < 0.0 || v.fract() != 0.0 || v as usize > dummies.len() {
                    return Err(Error::Evaluation(format!(
                        "input {} expects a level index in 0..={}, got {v}",
                        j + 1,
                        dummies.len()
                    )));
                }
                let level = v as usize;
                Ok(if level == 0 { 0.0 } else { dummies[level - 1] })
            }
        }
    }

    pub fn linear_predictor(&self, row: &[f64]) -> Result<f64> {
        let mut eta = self.intercept;
        for (j, &v) in row.iter().enumerate() {
            eta += self.term(j, v)?;
        }
        Ok(eta)
    }
}

impl Predictor for GlmModel {
    fn arity(&self) -> usize {
        self.coefficients.len()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: row.len(),
            });
        }
        let eta = self.linear_predictor(row)?;
        Ok(match self.link {
            Link::Identity => eta,
            Link::Log => eta.exp(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_log_links() {
        let g = GlmModel::numeric(1.0, vec![2.0, -1.0], Link::Identity);
        assert_eq!(g.predict_row(&[3.0, 4.0]).unwrap(), 3.0);
        let g = GlmModel::numeric(0.0, vec![1.0], Link::Log);
        assert_eq!(g.predict_row(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn categorical_dummies_use_first_level_as_reference() {
        let g = GlmModel::new(
            1.0,
            vec![
                Coefficient::Numeric(2.0),
                Coefficient::Categorical(vec![0.5, -1.0]),
            ],
            Link::Identity,
        );
        assert_eq!(g.predict_row(&[1.0, 0.0]).unwrap(), 3.0);
        assert_eq!(g.predict_row(&[1.0, 1.0]).unwrap(), 3.5);
        assert_eq!(g.predict_row(&[1.0, 2.0]).unwrap(), 2.0);
        assert!(g.predict_row(&[1.0, 3.0]).is_err());
        assert!(matches!(
            g.predict_row(&[1.0]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn identity_link_is_affine(
            betas in prop::collection::vec(-5.0f64..5.0, 1..5),
            x in prop::collection::vec(-5.0f64..5.0, 5),
            j in 0usize..5,
            h in 0.01f64..1.0,
        ) {
            let g = GlmModel::numeric(0.3, betas.clone(), Link::Identity);
            let p = betas.len();
            let j = j % p;
            let x = &x[..p];
            let at = |d: f64| {
                let mut r = x.to_vec();
                r[j] += d;
                g.predict_row(&r).unwrap()
            };
            let second = at(h) - 2.0 * at(0.0) + at(-h);
            prop_assert!(second.abs() <= 1e-12 * (1.0 + at(0.0).abs() * 10.0));
        }
    }
}
