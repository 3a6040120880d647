//! Gradient tree boosting on squared error.
//!
//! Two learners share the exact greedy grower:
//!
//! * [`Learner::SecondOrder`] fits each tree to gradient/hessian statistics
//!   with an L2 leaf penalty `lambda` and a per-leaf cost `gamma`; leaves take
//!   the weight `-G / (H + lambda)`.
//! * [`Learner::Gbdt`] fits each tree to plain residuals, splitting on
//!   squared-error reduction with mean-valued leaves.
//!
//! Under squared loss the hessian is identically one, so the two coincide
//! when `lambda = gamma = 0`.
//!
//! Prediction is `base_score + sum_k eta * tree_k(x)` with `base_score` the
//! label mean.

mod objective;
mod serialize;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::featureset::Dataset;
use crate::scalar::Scalar;

pub use objective::{
    grad_hess_squared_loss, leaf_weight, split_gain, squared_loss, NodeStats, ResidualVariance,
    SecondOrder, SplitObjective,
};
pub use tree::{presort, GrowParams, TreeGrower, TreeNode};

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelCount { rows: usize, labels: usize },
    #[error("{names} feature names for {cols} columns")]
    NameCount { cols: usize, names: usize },
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },
    #[error("leaf denominator H + lambda = {0} is not positive")]
    DegenerateDenominator(f64),
    #[error("schema mismatch: model expects {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },
    #[error("model text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = BoostError> = std::result::Result<T, E>;

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(BoostError::Ragged {
                    row: i,
                    expected: cols,
                    got: r.len(),
                });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(BoostError::NonFinite { row: i, col: j });
            }
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    SecondOrder,
    Gbdt,
}

impl Learner {
    pub fn as_str(self) -> &'static str {
        match self {
            Learner::SecondOrder => "second_order",
            Learner::Gbdt => "gbdt",
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Learner {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "second_order" => Ok(Learner::SecondOrder),
            "gbdt" => Ok(Learner::Gbdt),
            _ => Err(format!("unknown learner `{s}` (expected second_order or gbdt)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub learner: Learner,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            rounds: 100,
            max_depth: 4,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            learner: Learner::SecondOrder,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, message: &str| {
            Err(BoostError::InvalidParam {
                name,
                message: message.to_string(),
            })
        };
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate", "must lie in (0, 1]");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", "must be finite and >= 0");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma", "must be finite and >= 0");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight", "must be finite and >= 0");
        }
        Ok(())
    }
}

/// Short content hash of an ordered feature-name list.
pub fn schema_fingerprint<S: AsRef<str>>(names: &[S]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel<T> {
    pub params: BoostParams,
    pub base_score: T,
    pub learning_rate: T,
    pub trees: Vec<TreeNode<T>>,
    pub feature_names: Vec<String>,
    pub split_counts: Vec<usize>,
}

fn count_splits<T: Scalar>(trees: &[TreeNode<T>], n_features: usize) -> Vec<usize> {
    let mut counts = vec![0; n_features];
    for t in trees {
        t.for_each_split(&mut |f, _, _| counts[f] += 1);
    }
    counts
}

/// Train on a dense matrix.
pub fn train<T: Scalar>(
    x: &FeatureMatrix<T>,
    y: &[T],
    feature_names: Vec<String>,
    params: &BoostParams,
) -> Result<BoostedModel<T>> {
    params.validate()?;
    if x.rows() == 0 {
        return Err(BoostError::EmptyDataset);
    }
    if y.len() != x.rows() {
        return Err(BoostError::LabelCount {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if feature_names.len() != x.cols() {
        return Err(BoostError::NameCount {
            cols: x.cols(),
            names: feature_names.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(BoostError::NonFinite { row: i, col: x.cols() });
    }

    let n = x.rows();
    let eta = T::lit(params.learning_rate);
    let base_score = y.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let mut pred = vec![base_score; n];
    let order = presort(x);
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_child_weight: T::lit(params.min_child_weight),
    };
    let second_order = TreeGrower::new(
        x,
        &order,
        SecondOrder {
            lambda: T::lit(params.lambda),
            gamma: T::lit(params.gamma),
        },
        grow,
    );
    let residual = TreeGrower::new(x, &order, ResidualVariance, grow);

    let mut first = vec![T::zero(); n];
    let ones = vec![T::one(); n];
    let mut second = vec![T::zero(); n];
    let mut trees = Vec::with_capacity(params.rounds);
    for _ in 0..params.rounds {
        let tree = match params.learner {
            Learner::SecondOrder => {
                for i in 0..n {
                    let (g, h) = grad_hess_squared_loss(y[i], pred[i]);
                    first[i] = g;
                    second[i] = h;
                }
                second_order.grow(&first, &second)
            }
            Learner::Gbdt => {
                for i in 0..n {
                    first[i] = y[i] - pred[i];
                }
                residual.grow(&first, &ones)
            }
        };
        for (i, p) in pred.iter_mut().enumerate() {
            *p = *p + eta * tree.predict(x.row(i));
        }
        trees.push(tree);
    }

    let split_counts = count_splits(&trees, x.cols());
    Ok(BoostedModel {
        params: *params,
        base_score,
        learning_rate: eta,
        trees,
        feature_names,
        split_counts,
    })
}

/// Train on a feature dataset.
pub fn train_dataset<T: Scalar>(dataset: &Dataset, params: &BoostParams) -> Result<BoostedModel<T>> {
    if dataset.is_empty() {
        return Err(BoostError::EmptyDataset);
    }
    let x = FeatureMatrix::from_rows(dataset.feature_rows())?;
    train(&x, &dataset.labels(), dataset.schema.names().to_vec(), params)
}

/// Split-count importance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub counts: Vec<usize>,
    /// `counts / total`; all zeros when the model never splits.
    pub normalized: Vec<f64>,
    pub has_splits: bool,
}

impl<T: Scalar> BoostedModel<T> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn fingerprint(&self) -> String {
        schema_fingerprint(&self.feature_names)
    }

    pub fn predict(&self, row: &[T]) -> Result<T> {
        if row.len() != self.n_features() {
            return Err(BoostError::SchemaMismatch {
                expected: format!("{} features", self.n_features()),
                got: format!("{} features", row.len()),
            });
        }
        Ok(self.predict_unchecked(row))
    }

    fn predict_unchecked(&self, row: &[T]) -> T {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.learning_rate * t.predict(row))
    }

    /// Predict every row of a dataset with the same feature names.
    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<T>> {
        if dataset.schema.names() != self.feature_names.as_slice() {
            return Err(BoostError::SchemaMismatch {
                expected: self.fingerprint(),
                got: dataset.schema.fingerprint(),
            });
        }
        Ok(dataset
            .feature_rows::<T>()
            .iter()
            .map(|r| self.predict_unchecked(r))
            .collect())
    }

    pub fn feature_importance(&self) -> FeatureImportance {
        let counts = self.split_counts.clone();
        let total: usize = counts.iter().sum();
        let normalized = if total == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        FeatureImportance {
            counts,
            normalized,
            has_splits: total > 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn zero_rounds_predicts_base() {
        let x = FeatureMatrix::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let m = train(&x, &[1.0, 3.0], names(1), &BoostParams { rounds: 0, ..Default::default() })
            .unwrap();
        assert_eq!(m.predict(&[7.0]).unwrap(), 2.0);
        assert!(!m.feature_importance().has_splits);
        assert_eq!(m.feature_importance().normalized, vec![0.0]);
    }

    #[test]
    fn leaf_only_tree_adds_scaled_weight() {
        let m = BoostedModel {
            params: BoostParams::default(),
            base_score: 1.0,
            learning_rate: 0.5,
            trees: vec![TreeNode::Leaf { weight: 4.0 }],
            feature_names: names(2),
            split_counts: vec![0, 0],
        };
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), 3.0);
        assert!(matches!(m.predict(&[0.0]), Err(BoostError::SchemaMismatch { .. })));
    }

    #[test]
    fn xor_style_fixture_interpolates() {
        let x: FeatureMatrix<f64> = FeatureMatrix::from_rows(vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let y = [0.0f64, 1.0, 1.0, 0.5];
        let p = BoostParams {
            rounds: 1,
            max_depth: 2,
            learning_rate: 1.0,
            lambda: 0.0,
            min_child_weight: 0.0,
            ..Default::default()
        };
        let m = train(&x, &y, names(2), &p).unwrap();
        for i in 0..4 {
            assert!((m.predict(x.row(i)).unwrap() - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn stump_importance_is_unit_vector() {
        let rows = (0..8).map(|i| vec![0.0, 0.0, 0.0, i as f64]).collect();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let y: Vec<f64> = (0..8).map(|i| if i < 4 { 0.0 } else { 1.0 }).collect();
        let p = BoostParams { rounds: 1, max_depth: 1, ..Default::default() };
        let imp = train(&x, &y, names(4), &p).unwrap().feature_importance();
        assert_eq!(imp.counts, vec![0, 0, 0, 1]);
        assert_eq!(imp.normalized, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            FeatureMatrix::from_rows(vec![vec![f64::NAN]]),
            Err(BoostError::NonFinite { .. })
        ));
        let x = FeatureMatrix::<f64>::from_rows(vec![]).unwrap();
        assert!(matches!(train(&x, &[], vec![], &BoostParams::default()), Err(BoostError::EmptyDataset)));
        let x = FeatureMatrix::from_rows(vec![vec![1.0]]).unwrap();
        let p = BoostParams { learning_rate: 0.0, ..Default::default() };
        assert!(matches!(train(&x, &[1.0], names(1), &p), Err(BoostError::InvalidParam { .. })));
    }

    #[test]
    fn works_in_f32() {
        let rows: Vec<Vec<f32>> = (0..16).map(|i| vec![i as f32, (i % 3) as f32]).collect();
        let y: Vec<f32> = (0..16).map(|i| (i / 4) as f32).collect();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let p = BoostParams { rounds: 20, learning_rate: 0.5, lambda: 0.0, ..Default::default() };
        let m = train(&x, &y, names(2), &p).unwrap();
        for i in 0..16 {
            assert!((m.predict(x.row(i)).unwrap() - y[i]).abs() < 1e-3);
        }
    }
}
