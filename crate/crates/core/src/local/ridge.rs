use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl RidgeFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }
}

/// Minimises `Σ w_i (y_i - β₀ - βᵀx_i)² + λ‖β‖²` with an unpenalised
/// intercept. `x` holds one row per observation.
///
/// The columns are centred on their weighted means, which separates the
/// intercept, and the remaining normal equations are solved by Cholesky.
pub fn weighted_ridge_fit(x: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> Result<RidgeFit> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != n || w.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: if y.len() != n { y.len() } else { w.len() },
        });
    }
    let q = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != q) {
        return Err(Error::LengthMismatch {
            expected: q,
            found: bad.len(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "ridge penalty must be finite and >= 0, got {lambda}"
        )));
    }
    if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::invalid("weights must be finite and non-negative"));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("weights sum to zero"));
    }

    let y_bar = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / total;
    let x_bar: Vec<f64> = (0..q)
        .map(|c| w.iter().zip(x).map(|(a, r)| a * r[c]).sum::<f64>() / total)
        .collect();
    if q == 0 {
        return Ok(RidgeFit {
            intercept: y_bar,
            coefficients: Vec::new(),
        });
    }

    let xc = DMatrix::from_fn(n, q, |i, c| (x[i][c] - x_bar[c]) * w[i].sqrt());
    let yc = DVector::from_fn(n, |i, _| (y[i] - y_bar) * w[i].sqrt());
    let mut gram = xc.transpose() * &xc;
    for c in 0..q {
        gram[(c, c)] += lambda;
    }
    let rhs = xc.transpose() * yc;
    let largest = (0..q).fold(0.0f64, |m, c| m.max(gram[(c, c)]));
    let chol = gram.cholesky().ok_or(Error::SingularSystem)?;
    // A pivot this small means the columns are numerically collinear.
    if (0..q).any(|c| chol.l_dirty()[(c, c)].powi(2) <= 1e-13 * largest) {
        return Err(Error::SingularSystem);
    }
    let beta = chol.solve(&rhs);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = y_bar
        - coefficients
            .iter()
            .zip(&x_bar)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(RidgeFit {
        intercept,
        coefficients,
    })
}
