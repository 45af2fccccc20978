use crate::error::{Error, Result};
use crate::predictor::Predictor;

/// Two-input cost model over (age, power) with an optional interaction.
///
/// Inputs are indicators: `x[0] = 1` for a young driver, `x[1] = 1` for a
/// high-power vehicle (values >= 0.5 count as 1). The interaction fires on
/// the (young, high) cell, the only placement consistent with the reference
/// prediction tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyInteractionModel {
    pub constant: f64,
    pub age_effect: f64,
    pub power_effect: f64,
    pub interaction_effect: f64,
}

impl ToyInteractionModel {
    pub fn new(constant: f64, age_effect: f64, power_effect: f64, interaction_effect: f64) -> Self {
        ToyInteractionModel {
            constant,
            age_effect,
            power_effect,
            interaction_effect,
        }
    }

    /// The additive reference model: 300 / 200 / 250 / 150.
    pub fn additive() -> Self {
        Self::new(150.0, 50.0, 100.0, 0.0)
    }

    /// The reference model with interaction: 400 / 200 / 250 / 150.
    pub fn with_interaction() -> Self {
        Self::new(150.0, 50.0, 100.0, 100.0)
    }

    pub fn predict(&self, young: bool, high_power: bool) -> f64 {
        let mut v = self.constant;
        if young {
            v += self.age_effect;
        }
        if high_power {
            v += self.power_effect;
        }
        if young && high_power {
            v += self.interaction_effect;
        }
        v
    }

    /// Predictions for (young, high), (young, low), (old, high), (old, low).
    pub fn table(&self) -> [f64; 4] {
        [
            self.predict(true, true),
            self.predict(true, false),
            self.predict(false, true),
            self.predict(false, false),
        ]
    }
}

impl Predictor for ToyInteractionModel {
    fn arity(&self) -> usize {
        2
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: row.len(),
            });
        }
        Ok(self.predict(row[0] >= 0.5, row[1] >= 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_reference_tables() {
        assert_eq!(
            ToyInteractionModel::additive().table(),
            [300.0, 200.0, 250.0, 150.0]
        );
        assert_eq!(
            ToyInteractionModel::with_interaction().table(),
            [400.0, 200.0, 250.0, 150.0]
        );
    }

    #[test]
    fn young_high_power_cell() {
        let m = ToyInteractionModel::new(150.0, 50.0, 100.0, 100.0);
        assert_eq!(m.predict_row(&[1.0, 1.0]).unwrap(), 400.0);
        assert_eq!(m.predict_row(&[0.0, 0.0]).unwrap(), 150.0);
    }
}
