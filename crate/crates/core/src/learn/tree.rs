use alloc::vec;
use alloc::vec::Vec;

use super::{check_dims, class_counts, resolve_weights, weighted_majority, TreeParams, GAIN_EPSILON};
use crate::bendsem::Label;
use crate::featex::{FeatureRecord, FeatureRegistry};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Class counts of the samples reaching this node.
        counts: [u64; 4],
        /// Weighted Gini decrease achieved by the split.
        gain: f64,
    },
    Leaf {
        counts: [u64; 4],
        label: Label,
    },
}

impl Node {
    pub fn counts(&self) -> &[u64; 4] {
        match self {
            Node::Split { counts, .. } | Node::Leaf { counts, .. } => counts,
        }
    }
}

/// Binary axis-aligned tree; nodes are stored in preorder with the root at 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecisionTree {
    pub n_features: usize,
    pub class_weights: [f64; 4],
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf { .. } => max = max.max(d),
                Node::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        max
    }

    fn check_input(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: values.len(),
            });
        }
        Ok(())
    }

    /// Index of the leaf reached by `values`.
    pub fn leaf_index(&self, values: &[f64]) -> Result<usize> {
        self.check_input(values)?;
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return Ok(i),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if values[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Structural check for trees loaded from outside.
    pub fn check_structure(&self) -> core::result::Result<(), &'static str> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes");
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Split {
                    feature, left, right, ..
                } => {
                    if *feature >= self.n_features {
                        return Err("split feature out of range");
                    }
                    if *left <= i || *right <= i || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return Err("child index is not after its parent");
                    }
                }
                Node::Leaf { counts, .. } => {
                    if counts.iter().sum::<u64>() == 0 {
                        return Err("leaf without samples");
                    }
                }
            }
        }
        Ok(())
    }
}

fn gini(counts: &[u64; 4], weights: &[f64; 4]) -> (f64, f64) {
    let mut w = [0.0; 4];
    let mut total = 0.0;
    for k in 0..4 {
        w[k] = counts[k] as f64 * weights[k];
        total += w[k];
    }
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let mut sum_sq = 0.0;
    for wk in w {
        let p = wk / total;
        sum_sq += p * p;
    }
    (1.0 - sum_sq, total)
}

/// Data shared by the recursive growth of one tree.
pub(crate) struct Frame<'a> {
    pub rows: Vec<&'a [f64]>,
    pub labels: Vec<Label>,
    pub weights: [f64; 4],
    pub n_features: usize,
}

impl<'a> Frame<'a> {
    pub fn new(records: &'a [FeatureRecord], weights: [f64; 4]) -> Result<Self> {
        let n_features = check_dims(records)?;
        Ok(Frame {
            rows: records.iter().map(|r| r.values.as_slice()).collect(),
            labels: records.iter().map(|r| r.label).collect(),
            weights,
            n_features,
        })
    }

    /// Best split over `features` for the samples in `idx`. With
    /// `allow_zero_gain`, an impure node still splits when every candidate
    /// leaves the impurity unchanged (XOR-like data).
    pub fn find_split(
        &self,
        idx: &[usize],
        features: &[usize],
        min_leaf: usize,
        allow_zero_gain: bool,
    ) -> Option<Split> {
        let parent = class_counts(idx.iter().map(|&i| &self.labels[i]));
        let (parent_gini, parent_w) = gini(&parent, &self.weights);
        if parent_gini <= 0.0 {
            return None;
        }
        let mut best: Option<Split> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for &f in features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let mut left = [0u64; 4];
            for pos in 0..order.len() - 1 {
                left[self.labels[order[pos]].index()] += 1;
                let here = self.rows[order[pos]][f];
                let next = self.rows[order[pos + 1]][f];
                if here == next {
                    continue;
                }
                let n_left = pos + 1;
                if n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let mut right = parent;
                for k in 0..4 {
                    right[k] -= left[k];
                }
                let (gl, wl) = gini(&left, &self.weights);
                let (gr, wr) = gini(&right, &self.weights);
                let gain = parent_gini - (wl / parent_w) * gl - (wr / parent_w) * gr;
                if best.is_none_or(|b| gain > b.gain + GAIN_EPSILON) {
                    best = Some(Split {
                        feature: f,
                        threshold: midpoint(here, next),
                        gain,
                    });
                }
            }
        }
        best.filter(|b| allow_zero_gain || b.gain > GAIN_EPSILON)
    }

    /// Grows a tree over the samples in `idx` (duplicates allowed), asking
    /// `features` for the candidate feature set of each node.
    pub fn grow(
        &self,
        idx: Vec<usize>,
        params: &TreeParams,
        features: &mut dyn FnMut() -> Vec<usize>,
    ) -> DecisionTree {
        struct Pending {
            idx: Vec<usize>,
            depth: usize,
            parent: Option<usize>,
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut stack = vec![Pending {
            idx,
            depth: 0,
            parent: None,
        }];
        while let Some(p) = stack.pop() {
            let me = nodes.len();
            if let Some(parent) = p.parent {
                // left children are pushed last, so they are always created
                // right after their parent
                if let Node::Split { left, right, .. } = &mut nodes[parent] {
                    if *left == usize::MAX {
                        *left = me;
                    } else {
                        *right = me;
                    }
                }
            }
            let counts = class_counts(p.idx.iter().map(|&i| &self.labels[i]));
            let can_split = p.idx.len() >= params.min_samples_split
                && params.max_depth.is_none_or(|d| p.depth < d)
                && counts.iter().filter(|&&c| c > 0).count() > 1;
            let split = if can_split {
                let feats = features();
                self.find_split(&p.idx, &feats, params.min_samples_leaf, true)
            } else {
                None
            };
            match split {
                None => nodes.push(Node::Leaf {
                    counts,
                    label: weighted_majority(&counts, &self.weights),
                }),
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        p.idx.iter().partition(|&&i| self.rows[i][s.feature] <= s.threshold);
                    nodes.push(Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                        counts,
                        gain: s.gain,
                    });
                    stack.push(Pending {
                        idx: r,
                        depth: p.depth + 1,
                        parent: Some(me),
                    });
                    stack.push(Pending {
                        idx: l,
                        depth: p.depth + 1,
                        parent: Some(me),
                    });
                }
            }
        }
        DecisionTree {
            n_features: self.n_features,
            class_weights: self.weights,
            nodes,
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // keep `a <= m < b` even when a and b are adjacent floats
    if m >= b {
        a
    } else {
        m
    }
}

/// Exhaustive search for the split with the largest weighted Gini decrease.
/// Returns `None` when no split has positive gain.
pub fn best_split(records: &[FeatureRecord], weights: [f64; 4]) -> Result<Option<Split>> {
    let frame = Frame::new(records, weights)?;
    if records.len() < 2 {
        return Ok(None);
    }
    let idx: Vec<usize> = (0..records.len()).collect();
    let features: Vec<usize> = (0..frame.n_features).collect();
    Ok(frame.find_split(&idx, &features, 1, false))
}

pub fn fit_tree(records: &[FeatureRecord], params: &TreeParams) -> Result<DecisionTree> {
    params.validate()?;
    let counts = class_counts(records.iter().map(|r| &r.label));
    let frame = Frame::new(records, resolve_weights(params.class_weights, &counts))?;
    let all: Vec<usize> = (0..frame.n_features).collect();
    Ok(frame.grow((0..records.len()).collect(), params, &mut || all.clone()))
}

pub fn predict(tree: &DecisionTree, values: &[f64]) -> Result<Label> {
    match &tree.nodes[tree.leaf_index(values)?] {
        Node::Leaf { label, .. } => Ok(*label),
        Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
    }
}

/// Weighted class distribution of the reached leaf.
pub fn predict_proba(tree: &DecisionTree, values: &[f64]) -> Result<[f64; 4]> {
    let counts = tree.nodes[tree.leaf_index(values)?].counts();
    let mut p = [0.0; 4];
    let mut total = 0.0;
    for k in 0..4 {
        p[k] = counts[k] as f64 * tree.class_weights[k];
        total += p[k];
    }
    if total > 0.0 {
        for v in &mut p {
            *v /= total;
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// value `<=` threshold
    Left,
    /// value `>` threshold
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub feature: usize,
    pub name: &'static str,
    pub threshold: f64,
    pub direction: Direction,
    pub value: f64,
}

/// The internal-node tests taken by [`predict`], root first.
pub fn decision_path(tree: &DecisionTree, values: &[f64]) -> Result<Vec<PathStep>> {
    tree.check_input(values)?;
    let registry = FeatureRegistry;
    let mut path = Vec::new();
    let mut i = 0;
    while let Node::Split {
        feature,
        threshold,
        left,
        right,
        ..
    } = &tree.nodes[i]
    {
        let value = values[*feature];
        let direction = if value <= *threshold { Direction::Left } else { Direction::Right };
        path.push(PathStep {
            feature: *feature,
            name: registry.name(*feature).unwrap_or("feature"),
            threshold: *threshold,
            direction,
            value,
        });
        i = if direction == Direction::Left { *left } else { *right };
    }
    Ok(path)
}

/// Number of leading tests two paths share.
pub fn shared_prefix_len(a: &[PathStep], b: &[PathStep]) -> usize {
    a.iter()
        .zip(b)
        .take_while(|(x, y)| x.feature == y.feature && x.threshold == y.threshold && x.direction == y.direction)
        .count()
}

/// Gini importance: each split adds `(node weight / root weight) · gain` to its
/// feature; the vector is normalised to sum to one (all zeros for a leaf).
pub fn feature_importance(tree: &DecisionTree) -> Vec<f64> {
    let mut imp = vec![0.0; tree.n_features];
    let node_weight = |counts: &[u64; 4]| -> f64 {
        counts
            .iter()
            .zip(&tree.class_weights)
            .map(|(&c, &w)| c as f64 * w)
            .sum()
    };
    let root_w = node_weight(tree.root().counts());
    if root_w <= 0.0 {
        return imp;
    }
    for n in &tree.nodes {
        if let Node::Split {
            feature, counts, gain, ..
        } = n
        {
            imp[*feature] += node_weight(counts) / root_w * gain;
        }
    }
    let total: f64 = imp.iter().sum();
    if total > 0.0 {
        for v in &mut imp {
            *v /= total;
        }
    }
    imp
}
