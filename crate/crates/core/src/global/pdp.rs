use rand::seq::index;
use rayon::prelude::*;

use super::{CurveKind, CurveValues, ExplanationCurve, Grid};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::predictor::{check_arity, Predictor};
use crate::rng::RngStream;
use crate::stats;

/// ICE plots are capped at this many instances by default.
pub const ICE_MAX_INSTANCES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IceSample {
    All,
    Indices(Vec<usize>),
}

/// All rows up to [`ICE_MAX_INSTANCES`], else a seeded sample of that size
/// (kept in row order).
pub fn default_ice_sample(n_rows: usize, seed: u64) -> IceSample {
    if n_rows <= ICE_MAX_INSTANCES {
        return IceSample::All;
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let mut picked = index::sample(&mut rng, n_rows, ICE_MAX_INSTANCES).into_vec();
    picked.sort_unstable();
    IceSample::Indices(picked)
}

/// Predictions for every listed row with feature `j` forced to each grid
/// point. Returns one column per grid point.
fn substituted_predictions<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    rows: &[usize],
    grid: &Grid,
) -> Result<Vec<Vec<f64>>> {
    let j = grid.feature;
    let p = data.n_cols();
    let mut base = Vec::with_capacity(rows.len() * p);
    for &i in rows {
        base.extend_from_slice(data.row(i));
    }
    grid.points()
        .par_iter()
        .map(|&t| {
            let mut buf = base.clone();
            for r in buf.chunks_exact_mut(p) {
                r[j] = t;
            }
            pred.predict_flat(&buf)
        })
        .collect()
}

fn check_inputs<P: Predictor + ?Sized>(pred: &P, data: &Dataset, grid: &Grid) -> Result<()> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_arity(pred, data)?;
    grid.validate_for(data)
}

/// Partial dependence: at each grid point `t`, the mean prediction over the
/// dataset with feature `j` set to `t`.
pub fn pdp_curve<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    grid: &Grid,
) -> Result<ExplanationCurve> {
    check_grid_feature(grid, j)?;
    check_inputs(pred, data, grid)?;
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let columns = substituted_predictions(pred, data, &all, grid)?;
    let values = columns.iter().map(|c| stats::mean(c)).collect();
    Ok(ExplanationCurve {
        kind: CurveKind::Pdp,
        feature_name: data.name(j).to_string(),
        grid: grid.clone(),
        values: CurveValues::Aggregate(values),
    })
}

/// Individual conditional expectation: one curve per selected instance.
pub fn ice_curves<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    j: usize,
    grid: &Grid,
    sample: &IceSample,
) -> Result<ExplanationCurve> {
    check_grid_feature(grid, j)?;
    check_inputs(pred, data, grid)?;
    let rows: Vec<usize> = match sample {
        IceSample::All => (0..data.n_rows()).collect(),
        IceSample::Indices(idx) => {
            if idx.is_empty() {
                return Err(Error::invalid("ICE instance sample is empty"));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= data.n_rows()) {
                return Err(Error::invalid(format!(
                    "ICE instance {bad} out of range for {} rows",
                    data.n_rows()
                )));
            }
            idx.clone()
        }
    };
    let columns = substituted_predictions(pred, data, &rows, grid)?;
    let matrix = (0..rows.len())
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    Ok(ExplanationCurve {
        kind: CurveKind::Ice,
        feature_name: data.name(j).to_string(),
        grid: grid.clone(),
        values: CurveValues::PerInstance {
            instances: rows,
            matrix,
        },
    })
}

/// Shifts every ICE row so that it is zero at grid position `anchor`.
pub fn center_curves(curves: &ExplanationCurve, anchor: usize) -> Result<ExplanationCurve> {
    if !matches!(curves.kind, CurveKind::Ice | CurveKind::CenteredIce) {
        return Err(Error::invalid("only ICE curves can be centred"));
    }
    if anchor >= curves.grid.len() {
        return Err(Error::invalid(format!(
            "anchor {anchor} out of range for a grid of {} points",
            curves.grid.len()
        )));
    }
    let (instances, matrix) = match &curves.values {
        CurveValues::PerInstance { instances, matrix } => (instances, matrix),
        CurveValues::Aggregate(_) => {
            return Err(Error::invalid("ICE curve has no per-instance values"))
        }
    };
    let centred = matrix
        .iter()
        .map(|row| {
            let a = row[anchor];
            row.iter().map(|v| v - a).collect()
        })
        .collect();
    Ok(ExplanationCurve {
        kind: CurveKind::CenteredIce,
        feature_name: curves.feature_name.clone(),
        grid: curves.grid.clone(),
        values: CurveValues::PerInstance {
            instances: instances.clone(),
            matrix: centred,
        },
    })
}

fn check_grid_feature(grid: &Grid, j: usize) -> Result<()> {
    if grid.feature != j {
        return Err(Error::invalid(format!(
            "grid was built for feature {} but feature {j} was requested",
            grid.feature
        )));
    }
    Ok(())
}
