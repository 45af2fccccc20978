//! Per-instance explanations: Shapley attributions, LIME surrogates and
//! LIVE neighbourhoods.

mod lime;
mod live;
mod ridge;
mod shapley;

use serde::Serialize;

pub use lime::{lime_explain, LimeConfig, SurrogateFit, WeightSummary};
pub use live::{live_neighborhood, LiveSample};
pub use ridge::{weighted_ridge_fit, RidgeFit};
pub use shapley::{
    shapley_exact, shapley_exact_game, shapley_linear, shapley_mc, shapley_mc_all,
    shapley_permutation, shapley_subset, CoalitionGame, McEstimate, EXACT_MAX_PLAYERS, MC_CHUNK,
};

use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum AttributionMethod {
    Exact,
    LinearClosedForm,
    MonteCarlo { iterations: usize, seed: u64 },
}

/// Feature contributions `phis` explaining `prediction - base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub names: Vec<String>,
    pub phis: Vec<f64>,
    /// Mean prediction over the background data (0 for a bare game).
    pub base: f64,
    pub prediction: f64,
    pub method: AttributionMethod,
    /// Standard error of each estimate, Monte-Carlo only.
    pub std_errors: Option<Vec<f64>>,
}

impl Attribution {
    /// `base + Σφ - prediction`; zero up to rounding for exact methods.
    pub fn efficiency_gap(&self) -> f64 {
        self.base + self.phis.iter().sum::<f64>() - self.prediction
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::to_value(&self.method).expect("method serialises");
        let map = obj.as_object_mut().expect("tagged enum is an object");
        map.insert("base".into(), self.base.into());
        map.insert("prediction".into(), self.prediction.into());
        map.insert("features".into(), serde_json::json!(self.names));
        map.insert("phi".into(), serde_json::json!(self.phis));
        if let Some(se) = &self.std_errors {
            map.insert("std_errors".into(), serde_json::json!(se));
        }
        obj
    }
}

/// Checks that `x` is a valid row for `data`.
pub(crate) fn check_instance(data: &Dataset, x: &[f64]) -> Result<()> {
    if x.len() != data.n_cols() {
        return Err(Error::LengthMismatch {
            expected: data.n_cols(),
            found: x.len(),
        });
    }
    for (j, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "instance value for `{}` is not finite",
                data.name(j)
            )));
        }
        if let ColumnKind::Categorical { levels } = data.kind(j) {
            if v < 0.0 || v.fract() != 0.0 || v as usize >= levels.len() {
                return Err(Error::Domain(format!(
                    "instance value {v} is not a level index of `{}`",
                    data.name(j)
                )));
            }
        }
    }
    Ok(())
}
