//! Model-agnostic, post-hoc interpretability for tabular predictors.
//!
//! The crate is organised around a small number of shared types:
//!
//! - [`Dataset`]: a rectangular table of numeric and categorical features
//!   (categoricals are stored as level indices).
//! - [`Predictor`]: anything that maps a feature row to a real number.
//! - [`ExplanationCurve`], [`Attribution`], [`SurrogateFit`] and
//!   [`ImportanceReport`]: the artifacts produced by the explainers.
//!
//! Global effect curves (PDP, ICE, c-ICE, M-plot, ALE, IPD) live in
//! [`global`], Friedman's H-statistics in [`interaction`], permutation
//! importance in [`importance`] and per-instance attributions (Shapley,
//! LIME, LIVE) in [`local`]. The [`models`] module provides predictors with
//! known analytic structure, which is what the test-suite uses as ground
//! truth.
//!
//! ```
//! use posthoc::{Dataset, Predictor};
//! use posthoc::models::{GlmModel, Link};
//! use posthoc::global::{pdp_curve, Grid};
//!
//! let data = Dataset::numeric(
//!     &["x1", "x2"],
//!     &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
//! ).unwrap();
//! let glm = GlmModel::numeric(0.0, vec![2.0, 3.0], Link::Identity);
//! let grid = Grid::from_points(0, vec![5.0]).unwrap();
//! let curve = pdp_curve(&glm, &data, 0, &grid).unwrap();
//! assert_eq!(curve.aggregate().unwrap(), &[13.0]);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod global;
pub mod importance;
pub mod interaction;
pub mod local;
pub mod loss;
pub mod models;
pub mod output;
pub mod predictor;
pub mod rng;

mod stats;

pub use data::{load_dataset, ColumnKind, Dataset, Schema};
pub use error::{Error, Result};
pub use global::{CurveKind, ExplanationCurve, Grid};
pub use importance::ImportanceReport;
pub use local::{Attribution, SurrogateFit};
pub use loss::{compute_loss, LossKind};
pub use predictor::{FnPredictor, Predictor};
pub use rng::RngStream;
