//! Predictors with known analytic structure.
//!
//! Models are usually described by a JSON spec, one of:
//!
//! ```json
//! {"type":"glm","intercept":0.5,"coefficients":[1.0,[0.2,0.4]],"link":"identity"}
//! {"type":"expression","formula":"0.2*x1 - 5*x2 + 10*x2*step(x3)","arity":3}
//! {"type":"tree_ensemble","base_score":0,"aggregation":"sum","trees":[...]}
//! {"type":"toy_interaction","constant":150,"age_effect":50,"power_effect":100,"interaction_effect":100}
//! ```
//!
//! A GLM coefficient given as an array marks a categorical input; the array
//! holds one coefficient per non-reference level.

pub mod expr;
mod glm;
mod toy;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use expr::{parse_expression, ExpressionModel};
pub use glm::{Coefficient, GlmModel, Link};
pub use toy::ToyInteractionModel;
pub use tree::{Aggregation, Node, Tree, TreeEnsemble};

use crate::error::{Error, Result};
use crate::predictor::Predictor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Glm {
        intercept: f64,
        coefficients: Vec<Coefficient>,
        #[serde(default = "default_link")]
        link: Link,
    },
    Expression {
        formula: String,
        arity: usize,
    },
    TreeEnsemble {
        #[serde(default)]
        base_score: f64,
        #[serde(default = "default_aggregation")]
        aggregation: Aggregation,
        trees: Vec<Tree>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_features: Option<usize>,
    },
    ToyInteraction {
        constant: f64,
        age_effect: f64,
        power_effect: f64,
        interaction_effect: f64,
    },
}

fn default_link() -> Link {
    Link::Identity
}

fn default_aggregation() -> Aggregation {
    Aggregation::Sum
}

#[derive(Debug, Clone)]
pub enum Model {
    Glm(GlmModel),
    Expression(ExpressionModel),
    TreeEnsemble(TreeEnsemble),
    ToyInteraction(ToyInteractionModel),
}

impl Model {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        Ok(match spec {
            ModelSpec::Glm {
                intercept,
                coefficients,
                link,
            } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidModel(
                        "glm needs at least one coefficient".into(),
                    ));
                }
                Model::Glm(GlmModel::new(intercept, coefficients, link))
            }
            ModelSpec::Expression { formula, arity } => {
                Model::Expression(ExpressionModel::parse(&formula, arity)?)
            }
            ModelSpec::TreeEnsemble {
                base_score,
                aggregation,
                trees,
                n_features,
            } => Model::TreeEnsemble(TreeEnsemble::new(
                trees,
                aggregation,
                base_score,
                n_features,
            )?),
            ModelSpec::ToyInteraction {
                constant,
                age_effect,
                power_effect,
                interaction_effect,
            } => Model::ToyInteraction(ToyInteractionModel::new(
                constant,
                age_effect,
                power_effect,
                interaction_effect,
            )),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidModel(format!("schema violation: {e}")))?;
        Self::from_spec(spec)
    }

    pub fn as_glm(&self) -> Option<&GlmModel> {
        match self {
            Model::Glm(g) => Some(g),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn Predictor {
        match self {
            Model::Glm(m) => m,
            Model::Expression(m) => m,
            Model::TreeEnsemble(m) => m,
            Model::ToyInteraction(m) => m,
        }
    }
}

impl Predictor for Model {
    fn arity(&self) -> usize {
        self.inner().arity()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        self.inner().predict_row(row)
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Model::from_json(&text)
}

/// Loads a `tree_ensemble` model spec.
pub fn load_tree_ensemble(path: impl AsRef<Path>) -> Result<TreeEnsemble> {
    match load_model(path)? {
        Model::TreeEnsemble(t) => Ok(t),
        _ => Err(Error::InvalidModel(
            "model spec is not a tree_ensemble".into(),
        )),
    }
}
