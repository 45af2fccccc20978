//! Dataset-level effect curves: PDP, ICE, c-ICE, M-plot, ALE and the
//! PDP-flatness importance.

mod ale;
mod ipd;
mod pdp;

use serde::Serialize;

pub use ale::{ale_curve, mplot_curve};
pub use ipd::ipd_importance;
pub use pdp::{
    center_curves, default_ice_sample, ice_curves, pdp_curve, IceSample, ICE_MAX_INSTANCES,
};

use crate::data::{ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::stats;

/// Default cap on the number of PDP/ICE grid points.
pub const DEFAULT_GRID_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    #[serde(rename = "PDP")]
    Pdp,
    #[serde(rename = "ICE")]
    Ice,
    #[serde(rename = "cICE")]
    CenteredIce,
    #[serde(rename = "MPlot")]
    MPlot,
    #[serde(rename = "ALE")]
    Ale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    ObservedValues,
    Quantiles(usize),
    Levels,
    /// Within-bin means of the feature (M-plot).
    BinMeans(usize),
    Custom,
}

/// Evaluation points for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub feature: usize,
    points: Vec<f64>,
    labels: Option<Vec<String>>,
    pub source: GridSource,
}

impl Grid {
    pub fn from_points(feature: usize, points: Vec<f64>) -> Result<Self> {
        Self::checked(feature, points, None, GridSource::Custom)
    }

    fn checked(
        feature: usize,
        points: Vec<f64>,
        labels: Option<Vec<String>>,
        source: GridSource,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("grid must contain at least one point"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        Ok(Grid {
            feature,
            points,
            labels,
            source,
        })
    }

    /// Every distinct observed value; every level for a categorical feature.
    pub fn observed(data: &Dataset, j: usize) -> Result<Self> {
        data.check_feature(j)?;
        match data.kind(j) {
            ColumnKind::Categorical { levels } => Self::levels(j, levels),
            ColumnKind::Numeric => {
                Self::checked(j, data.unique_values(j), None, GridSource::ObservedValues)
            }
        }
    }

    /// `k` quantile-spaced points (duplicates merged). Categorical features
    /// fall back to their level list.
    pub fn quantiles(data: &Dataset, j: usize, k: usize) -> Result<Self> {
        data.check_feature(j)?;
        if k == 0 {
            return Err(Error::invalid("quantile grid needs k >= 1"));
        }
        if let ColumnKind::Categorical { levels } = data.kind(j) {
            return Self::levels(j, levels);
        }
        let col = data.column(j);
        let points = if k == 1 {
            let mut sorted = col;
            sorted.sort_by(f64::total_cmp);
            vec![stats::quantile_sorted(&sorted, 0.5)]
        } else {
            stats::quantile_edges(&col, k - 1)
        };
        Self::checked(j, points, None, GridSource::Quantiles(k))
    }

    /// Observed values when there are at most 50 of them, else 50 quantiles.
    pub fn default_for(data: &Dataset, j: usize) -> Result<Self> {
        data.check_feature(j)?;
        if data.kind(j).is_categorical() || data.unique_values(j).len() <= DEFAULT_GRID_POINTS {
            Self::observed(data, j)
        } else {
            Self::quantiles(data, j, DEFAULT_GRID_POINTS)
        }
    }

    fn levels(j: usize, levels: &[String]) -> Result<Self> {
        let points = (0..levels.len()).map(|l| l as f64).collect();
        Self::checked(j, points, Some(levels.to_vec()), GridSource::Levels)
    }

    pub(crate) fn with_source(
        feature: usize,
        points: Vec<f64>,
        source: GridSource,
    ) -> Result<Self> {
        Self::checked(feature, points, None, source)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Label for a grid position: the level name, or the formatted value.
    pub fn label(&self, pos: usize) -> String {
        match &self.labels {
            Some(l) => l[pos].clone(),
            None => crate::output::format_f64(self.points[pos]),
        }
    }

    fn validate_for(&self, data: &Dataset) -> Result<()> {
        data.check_feature(self.feature)?;
        if let ColumnKind::Categorical { levels } = data.kind(self.feature) {
            if self
                .points
                .iter()
                .any(|&v| v < 0.0 || v.fract() != 0.0 || v as usize >= levels.len())
            {
                return Err(Error::invalid(format!(
                    "grid for categorical feature `{}` must hold level indices",
                    data.name(self.feature)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveValues {
    /// One value per grid point.
    Aggregate(Vec<f64>),
    /// One row per instance, one column per grid point.
    PerInstance {
        instances: Vec<usize>,
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationCurve {
    pub kind: CurveKind,
    pub feature_name: String,
    pub grid: Grid,
    pub values: CurveValues,
}

impl ExplanationCurve {
    pub fn feature(&self) -> usize {
        self.grid.feature
    }

    pub fn aggregate(&self) -> Option<&[f64]> {
        match &self.values {
            CurveValues::Aggregate(v) => Some(v),
            CurveValues::PerInstance { .. } => None,
        }
    }

    pub fn matrix(&self) -> Option<&[Vec<f64>]> {
        match &self.values {
            CurveValues::Aggregate(_) => None,
            CurveValues::PerInstance { matrix, .. } => Some(matrix),
        }
    }

    pub fn instances(&self) -> Option<&[usize]> {
        match &self.values {
            CurveValues::Aggregate(_) => None,
            CurveValues::PerInstance { instances, .. } => Some(instances),
        }
    }

    /// Column means of a per-instance curve.
    pub fn column_means(&self) -> Option<Vec<f64>> {
        let m = self.matrix()?;
        Some(
            (0..self.grid.len())
                .map(|t| stats::mean(&m.iter().map(|r| r[t]).collect::<Vec<_>>()))
                .collect(),
        )
    }

    /// Piecewise-linear value of an aggregate curve at `x`, flat beyond the
    /// first and last grid points.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let values = self.aggregate()?;
        Some(interpolate(self.grid.points(), values, x))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "kind": self.kind,
            "feature": self.feature_name,
            "feature_index": self.feature(),
            "grid": self.grid.points(),
            "grid_source": self.grid.source,
        });
        let map = obj.as_object_mut().expect("object literal");
        if let Some(labels) = self.grid.labels() {
            map.insert("labels".into(), serde_json::json!(labels));
        }
        match &self.values {
            CurveValues::Aggregate(v) => {
                map.insert("values".into(), serde_json::json!(v));
            }
            CurveValues::PerInstance { instances, matrix } => {
                map.insert("instances".into(), serde_json::json!(instances));
                map.insert("matrix".into(), serde_json::json!(matrix));
            }
        }
        obj
    }
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&e| e < x);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}
