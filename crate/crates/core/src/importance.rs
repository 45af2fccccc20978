//! Permutation feature importance, per column and per group of columns.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{compute_loss, LossKind};
use crate::predictor::{check_arity, Predictor};
use crate::rng::{stream_id, RngStream};
use crate::stats;

pub const DEFAULT_REPEATS: usize = 5;

/// How the permuted error is compared with the baseline error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PfiMode {
    /// `err_j / err_1`.
    #[default]
    Ratio,
    /// `err_j - err_1`, usable when the baseline error is zero.
    Difference,
}

/// Which kind of data the importance was measured on. Recorded only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Train,
    Heldout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfiConfig {
    pub loss: LossKind,
    pub repeats: usize,
    pub seed: u64,
    pub mode: PfiMode,
    pub basis: Basis,
}

impl PfiConfig {
    pub fn new(loss: LossKind, seed: u64) -> Self {
        PfiConfig {
            loss,
            repeats: DEFAULT_REPEATS,
            seed,
            mode: PfiMode::Ratio,
            basis: Basis::Train,
        }
    }

    pub fn repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn mode(mut self, mode: PfiMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceEntry {
    pub name: String,
    pub columns: Vec<usize>,
    /// Mean over repeats of the per-repeat score.
    pub fi: f64,
    pub per_repeat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub loss: String,
    pub repeats: usize,
    pub seed: u64,
    pub mode: PfiMode,
    pub basis: Basis,
    pub baseline_error: f64,
    /// Sorted by decreasing `fi`; ties keep their input order.
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    pub fn get(&self, name: &str) -> Option<&ImportanceEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

/// A named set of column indices permuted together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Vec<usize>,
}

impl FeatureGroup {
    pub fn new(name: impl Into<String>, columns: Vec<usize>) -> Self {
        FeatureGroup {
            name: name.into(),
            columns,
        }
    }
}

/// One group per column, named after it.
pub fn singleton_groups(data: &Dataset) -> Vec<FeatureGroup> {
    (0..data.n_cols())
        .map(|j| FeatureGroup::new(data.name(j), vec![j]))
        .collect()
}

/// Importance of every column of `data`.
pub fn pfi<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    y: &[f64],
    cfg: &PfiConfig,
) -> Result<ImportanceReport> {
    pfi_grouped(pred, data, y, &singleton_groups(data), cfg)
}

/// Importance of each group, permuting all of its columns with one shared
/// row permutation.
pub fn pfi_grouped<P: Predictor + ?Sized>(
    pred: &P,
    data: &Dataset,
    y: &[f64],
    groups: &[FeatureGroup],
    cfg: &PfiConfig,
) -> Result<ImportanceReport> {
    let kind = cfg.loss;
    let mut report = pfi_with_loss(pred, data, y, groups, cfg, &|y: &[f64], yhat: &[f64]| {
        compute_loss(kind, y, yhat)
    })?;
    report.loss = kind.to_string();
    Ok(report)
}

fn validate_groups(groups: &[FeatureGroup], p: usize) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::invalid("no feature groups given"));
    }
    let mut owner: Vec<Option<&str>> = vec![None; p];
    for g in groups {
        if g.columns.is_empty() {
            return Err(Error::invalid(format!("group `{}` is empty", g.name)));
        }
        for &c in &g.columns {
            if c >= p {
                return Err(Error::FeatureOutOfRange { index: c, p });
            }
            if let Some(other) = owner[c] {
                return Err(Error::invalid(format!(
                    "groups `{other}` and `{}` overlap on column {c}",
                    g.name
                )));
            }
            owner[c] = Some(&g.name);
        }
    }
    Ok(())
}

/// [`pfi_grouped`] with an arbitrary loss `(y, ŷ) -> error`.
pub fn pfi_with_loss<P, L>(
    pred: &P,
    data: &Dataset,
    y: &[f64],
    groups: &[FeatureGroup],
    cfg: &PfiConfig,
    loss: &L,
) -> Result<ImportanceReport>
where
    P: Predictor + ?Sized,
    L: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_arity(pred, data)?;
    if y.len() != data.n_rows() {
        return Err(Error::LengthMismatch {
            expected: data.n_rows(),
            found: y.len(),
        });
    }
    if cfg.repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    validate_groups(groups, data.n_cols())?;

    let baseline = loss(y, &pred.predict_dataset(data)?)?;
    if cfg.mode == PfiMode::Ratio && baseline == 0.0 {
        return Err(Error::PerfectFit);
    }

    let n = data.n_rows();
    let p = data.n_cols();
    let tasks: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..cfg.repeats).map(move |r| (g, r)))
        .collect();
    let scores = tasks
        .par_iter()
        .map(|&(g, r)| {
            let mut rng = RngStream::new(cfg.seed, stream_id(g, r)).rng();
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(&mut rng);
            let mut buf = data.as_flat().to_vec();
            for (i, &src) in sigma.iter().enumerate() {
                for &c in &groups[g].columns {
                    buf[i * p + c] = data.value(src, c);
                }
            }
            let err = loss(y, &pred.predict_flat(&buf)?)?;
            Ok(match cfg.mode {
                PfiMode::Ratio => err / baseline,
                PfiMode::Difference => err - baseline,
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut entries: Vec<ImportanceEntry> = groups
        .iter()
        .zip(scores.chunks_exact(cfg.repeats))
        .map(|(g, s)| ImportanceEntry {
            name: g.name.clone(),
            columns: g.columns.clone(),
            fi: stats::mean(s),
            per_repeat: s.to_vec(),
        })
        .collect();
    entries.sort_by(|a, b| b.fi.total_cmp(&a.fi));

    Ok(ImportanceReport {
        loss: "custom".into(),
        repeats: cfg.repeats,
        seed: cfg.seed,
        mode: cfg.mode,
        basis: cfg.basis,
        baseline_error: baseline,
        entries,
    })
}
