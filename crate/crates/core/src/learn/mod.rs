//! Deterministic CART classification trees, random forests and SMOTE.
//!
//! Splits minimise weighted Gini impurity. Candidate thresholds are the
//! midpoints between consecutive distinct values of a feature, and a sample
//! goes left when its value is `<=` the threshold. Equal gains (within
//! [`GAIN_EPSILON`]) resolve to the lower feature index, then the lower
//! threshold; leaf labels resolve ties in label order `∅ < ↑ < → < ↓`.
//! Class weights are applied to integer counts at every node, so the fitted
//! tree does not depend on the order of the input records.

mod forest;
mod smote;
mod tree;

pub use forest::{bootstrap_indices, default_features_per_split, fit_forest, fit_forest_with, predict_forest, Forest};
pub use smote::{smote, smote_detailed, SmoteOutcome, SmoteParams, SmoteWarning, Standardizer, SyntheticOrigin};
pub use tree::{
    best_split, decision_path, feature_importance, fit_tree, predict, predict_proba, shared_prefix_len,
    DecisionTree, Direction, Node, PathStep, Split,
};

use crate::bendsem::Label;
use crate::featex::FeatureRecord;
use crate::{Error, Result};

/// Gains closer than this are treated as equal.
pub const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClassWeights {
    #[default]
    Uniform,
    /// `weight(c) = N / (4 · count(c))`, computed once on the training set.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreeParams {
    /// `None` grows until purity (the "full tree").
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub class_weights: ClassWeights,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams::full()
    }
}

impl TreeParams {
    pub fn full() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            class_weights: ClassWeights::Uniform,
        }
    }

    pub fn balanced() -> Self {
        TreeParams {
            class_weights: ClassWeights::Balanced,
            ..TreeParams::full()
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be positive"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParameter("min_samples_split must be at least 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidParameter("min_samples_leaf must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn class_counts<'a>(labels: impl Iterator<Item = &'a Label>) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

pub(crate) fn resolve_weights(kind: ClassWeights, counts: &[u64; 4]) -> [f64; 4] {
    match kind {
        ClassWeights::Uniform => [1.0; 4],
        ClassWeights::Balanced => {
            let total: u64 = counts.iter().sum();
            let mut w = [0.0; 4];
            for (wi, &c) in w.iter_mut().zip(counts) {
                if c > 0 {
                    *wi = total as f64 / (4.0 * c as f64);
                }
            }
            w
        }
    }
}

/// Index of the largest weighted count; ties go to the earliest label.
pub(crate) fn weighted_majority(counts: &[u64; 4], weights: &[f64; 4]) -> Label {
    let mut best = 0;
    let mut best_w = f64::NEG_INFINITY;
    for (i, (&c, &w)) in counts.iter().zip(weights).enumerate() {
        let cw = c as f64 * w;
        if cw > best_w {
            best = i;
            best_w = cw;
        }
    }
    Label::ALL[best]
}

pub(crate) fn check_dims(records: &[FeatureRecord]) -> Result<usize> {
    let first = records.first().ok_or(Error::EmptyInput("no training records"))?;
    let n = first.values.len();
    for r in records {
        if r.values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.values.len(),
            });
        }
    }
    Ok(n)
}
