//! Tree ensembles loaded from JSON.
//!
//! Each internal node routes `x[feature] < threshold` to `left` and
//! everything else to `right`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl Tree {
    fn validate(&self, t: usize, arity: usize) -> Result<()> {
        let n = self.nodes.len();
        if self.root >= n {
            return Err(Error::InvalidModel(format!(
                "tree {t}: root {} is not a node id (have {n} nodes)",
                self.root
            )));
        }
        // Iterative walk; a revisit means a cycle or shared subtree.
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::InvalidModel(format!(
                    "tree {t}: node {id} is reachable twice; paths must terminate at leaves"
                )));
            }
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = self.nodes[id]
            {
                if feature >= arity {
                    return Err(Error::InvalidModel(format!(
                        "tree {t}, node {id}: feature index {feature} out of range for {arity} features"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "tree {t}, node {id}: non-finite threshold"
                    )));
                }
                for child in [left, right] {
                    if child >= n {
                        return Err(Error::InvalidModel(format!(
                            "tree {t}, node {id}: dangling child reference {child}"
                        )));
                    }
                    stack.push(child);
                }
            }
        }
        Ok(())
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf { leaf } => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[feature] < threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    trees: Vec<Tree>,
    aggregation: Aggregation,
    base_score: f64,
    arity: usize,
}

impl TreeEnsemble {
    /// Validates the trees. Without an explicit arity, the highest feature
    /// index used fixes it.
    pub fn new(
        trees: Vec<Tree>,
        aggregation: Aggregation,
        base_score: f64,
        arity: Option<usize>,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidModel("tree ensemble has no trees".into()));
        }
        let used = trees
            .iter()
            .filter_map(Tree::max_feature)
            .max()
            .map_or(1, |m| m + 1);
        let arity = arity.unwrap_or(used);
        for (t, tree) in trees.iter().enumerate() {
            tree.validate(t, arity)?;
        }
        Ok(TreeEnsemble {
            trees,
            aggregation,
            base_score,
            arity,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    /// Sorted thresholds used on `feature` across all trees.
    pub fn thresholds(&self, feature: usize) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .trees
            .iter()
            .flat_map(|tree| tree.nodes.iter())
            .filter_map(|n| match n {
                Node::Split {
                    feature: f,
                    threshold,
                    ..
                } if *f == feature => Some(*threshold),
                _ => None,
            })
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

impl Predictor for TreeEnsemble {
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
        let mut total = 0.0;
        for tree in &self.trees {
            total += tree.predict(row);
        }
        if self.aggregation == Aggregation::Mean {
            total /= self.trees.len() as f64;
        }
        Ok(self.base_score + total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stump(feature: usize, threshold: f64, lo: f64, hi: f64) -> Tree {
        Tree {
            nodes: vec![
                Node::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { leaf: lo },
                Node::Leaf { leaf: hi },
            ],
            root: 0,
        }
    }

    /// f(x1, x2) = x1 * x2 on {-1, 1}^2.
    pub(crate) fn product_tree() -> Tree {
        Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                },
                Node::Split {
                    feature: 1,
                    threshold: 0.0,
                    left: 3,
                    right: 4,
                },
                Node::Split {
                    feature: 1,
                    threshold: 0.0,
                    left: 5,
                    right: 6,
                },
                Node::Leaf { leaf: 1.0 },
                Node::Leaf { leaf: -1.0 },
                Node::Leaf { leaf: -1.0 },
                Node::Leaf { leaf: 1.0 },
            ],
            root: 0,
        }
    }

    #[test]
    fn single_stump() {
        let e =
            TreeEnsemble::new(vec![stump(0, 0.0, -1.0, 1.0)], Aggregation::Sum, 0.0, None).unwrap();
        assert_eq!(e.predict_row(&[2.0]).unwrap(), 1.0);
        assert_eq!(e.predict_row(&[-2.0]).unwrap(), -1.0);
        assert_eq!(e.predict_row(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn mean_of_identical_stumps() {
        let one =
            TreeEnsemble::new(vec![stump(0, 0.0, -1.0, 1.0)], Aggregation::Sum, 0.0, None).unwrap();
        let two = TreeEnsemble::new(
            vec![stump(0, 0.0, -1.0, 1.0); 2],
            Aggregation::Mean,
            0.0,
            None,
        )
        .unwrap();
        for x in [-3.0, -0.1, 0.0, 5.0] {
            assert_eq!(
                one.predict_row(&[x]).unwrap(),
                two.predict_row(&[x]).unwrap()
            );
        }
    }

    #[test]
    fn product_at_corners() {
        let e = TreeEnsemble::new(vec![product_tree()], Aggregation::Sum, 0.0, None).unwrap();
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                assert_eq!(e.predict_row(&[a, b]).unwrap(), a * b);
            }
        }
    }

    #[test]
    fn validation_errors() {
        let dangling = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 5,
                },
                Node::Leaf { leaf: 0.0 },
            ],
            root: 0,
        };
        assert!(matches!(
            TreeEnsemble::new(vec![dangling], Aggregation::Sum, 0.0, None),
            Err(Error::InvalidModel(m)) if m.contains("dangling")
        ));
        let cyclic = Tree {
            nodes: vec![Node::Split {
                feature: 0,
                threshold: 0.0,
                left: 0,
                right: 0,
            }],
            root: 0,
        };
        assert!(TreeEnsemble::new(vec![cyclic], Aggregation::Sum, 0.0, None).is_err());
        assert!(matches!(
            TreeEnsemble::new(vec![stump(3, 0.0, 0.0, 1.0)], Aggregation::Sum, 0.0, Some(2)),
            Err(Error::InvalidModel(m)) if m.contains("out of range")
        ));
    }

    proptest! {
        #[test]
        fn piecewise_constant_between_thresholds(a in -3.0f64..3.0, b in -3.0f64..3.0, other in -2.0f64..2.0) {
            let e = TreeEnsemble::new(
                vec![stump(0, 0.5, 1.0, 2.0), stump(0, -1.0, 0.0, 3.0), product_tree()],
                Aggregation::Sum, 0.25, None,
            ).unwrap();
            let th = e.thresholds(0);
            let cell = |x: f64| th.iter().filter(|&&t| x >= t).count();
            if cell(a) == cell(b) {
                prop_assert_eq!(e.predict_row(&[a, other]).unwrap(), e.predict_row(&[b, other]).unwrap());
            }
        }
    }
}
