//! The prediction contract every explainer works against.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// A deterministic map from a feature row to a real number.
///
/// Implementations must be pure: explainers call them concurrently and rely
/// on identical rows producing identical outputs.
pub trait Predictor: Sync {
    fn arity(&self) -> usize;

    fn predict_row(&self, row: &[f64]) -> Result<f64>;

    /// Predicts every row of a row-major buffer.
    fn predict_flat(&self, rows: &[f64]) -> Result<Vec<f64>> {
        let p = self.arity();
        if p == 0 || !rows.len().is_multiple_of(p) {
            return Err(Error::ArityMismatch {
                expected: p,
                found: rows.len(),
            });
        }
        rows.chunks_exact(p).map(|r| self.predict_row(r)).collect()
    }

    fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        check_arity(self, data)?;
        self.predict_flat(data.as_flat())
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        (**self).predict_row(row)
    }

    fn predict_flat(&self, rows: &[f64]) -> Result<Vec<f64>> {
        (**self).predict_flat(rows)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        (**self).predict_row(row)
    }

    fn predict_flat(&self, rows: &[f64]) -> Result<Vec<f64>> {
        (**self).predict_flat(rows)
    }
}

pub fn check_arity<P: Predictor + ?Sized>(pred: &P, data: &Dataset) -> Result<()> {
    if pred.arity() != data.n_cols() {
        return Err(Error::ArityMismatch {
            expected: pred.arity(),
            found: data.n_cols(),
        });
    }
    Ok(())
}

/// Wraps a plain closure as a predictor.
pub struct FnPredictor<F> {
    arity: usize,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(arity: usize, f: F) -> Self {
        FnPredictor { arity, f }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: row.len(),
            });
        }
        Ok((self.f)(row))
    }
}
