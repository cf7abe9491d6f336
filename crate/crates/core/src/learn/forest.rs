use alloc::vec::Vec;

use super::tree::{DecisionTree, Frame};
use super::{check_dims, class_counts, resolve_weights, TreeParams};
use crate::bendsem::Label;
use crate::featex::FeatureRecord;
use crate::rng::{Seed, SeededStream};
use crate::{Error, Result};

/// Bagged ensemble of trees with per-node random feature subsets.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    /// Seed of each tree's stream (bootstrap draw, then feature subsets).
    pub tree_seeds: Vec<Seed>,
    pub features_per_split: usize,
}

/// `ceil(sqrt(n_features))`; 6 for the 33-feature layout.
pub fn default_features_per_split(n_features: usize) -> usize {
    let mut m = 0;
    while m * m < n_features {
        m += 1;
    }
    m.max(1)
}

/// Sample indices of a bootstrap draw of size `n` from a tree stream.
pub fn bootstrap_indices(stream: &mut SeededStream, n: usize) -> Vec<usize> {
    (0..n).map(|_| stream.below(n)).collect()
}

pub fn fit_forest(records: &[FeatureRecord], params: &TreeParams, n_trees: usize, seed: Seed) -> Result<Forest> {
    let n_features = check_dims(records)?;
    fit_forest_with(records, params, n_trees, default_features_per_split(n_features), seed)
}

/// Tree `i` uses the stream seeded with the `i`-th output of the master stream:
/// first `n` bootstrap draws, then `m` feature draws at every node considered
/// for splitting (sorted before the search so ties still prefer lower
/// indices).
pub fn fit_forest_with(
    records: &[FeatureRecord],
    params: &TreeParams,
    n_trees: usize,
    features_per_split: usize,
    seed: Seed,
) -> Result<Forest> {
    if n_trees == 0 {
        return Err(Error::InvalidParameter("a forest needs at least one tree"));
    }
    params.validate()?;
    let n_features = check_dims(records)?;
    let m = features_per_split.clamp(1, n_features.max(1));
    let mut master = SeededStream::new(seed);
    let mut trees = Vec::with_capacity(n_trees);
    let mut tree_seeds = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let tree_seed = master.next_u64();
        let mut stream = SeededStream::new(tree_seed);
        let sample = bootstrap_indices(&mut stream, records.len());
        let counts = class_counts(sample.iter().map(|&i| &records[i].label));
        let frame = Frame::new(records, resolve_weights(params.class_weights, &counts))?;
        let mut pick = || {
            let mut f = stream.sample_indices(n_features, m);
            f.sort_unstable();
            f
        };
        trees.push(frame.grow(sample, params, &mut pick));
        tree_seeds.push(tree_seed);
    }
    Ok(Forest {
        trees,
        tree_seeds,
        features_per_split: m,
    })
}

/// Majority vote; ties go to the earliest label.
pub fn predict_forest(forest: &Forest, values: &[f64]) -> Result<Label> {
    let mut votes = [0usize; 4];
    for t in &forest.trees {
        votes[super::predict(t, values)?.index()] += 1;
    }
    let mut best = 0;
    for k in 1..4 {
        if votes[k] > votes[best] {
            best = k;
        }
    }
    Ok(Label::ALL[best])
}

impl Forest {
    /// Mean of the trees' normalised importances.
    pub fn feature_importance(&self) -> Vec<f64> {
        let n = self.trees.first().map_or(0, |t| t.n_features);
        let mut acc = alloc::vec![0.0; n];
        for t in &self.trees {
            for (a, v) in acc.iter_mut().zip(super::feature_importance(t)) {
                *a += v;
            }
        }
        let k = self.trees.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    }
}
