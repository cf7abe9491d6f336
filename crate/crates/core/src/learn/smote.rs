use alloc::vec::Vec;

use super::{check_dims, class_counts};
use crate::bendsem::Label;
use crate::featex::{FeatureRecord, FeatureRegistry, NUM_FEATURES};
use crate::rng::{Seed, SeededStream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteParams {
    pub k: usize,
    /// Each class is grown to at least `ceil(target_ratio · majority count)`.
    pub target_ratio: f64,
    /// Dimensions rounded to the nearest integer after interpolation.
    pub discrete_dims: Vec<usize>,
}

impl SmoteParams {
    /// Registry rounding rules for 33-feature records, none otherwise.
    pub fn for_dims(n_features: usize, k: usize, target_ratio: f64) -> Self {
        let discrete_dims = if n_features == NUM_FEATURES {
            FeatureRegistry.discrete_dims()
        } else {
            Vec::new()
        };
        SmoteParams {
            k,
            target_ratio,
            discrete_dims,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmoteWarning {
    /// The class has fewer than `requested + 1` members.
    KClamped { label: Label, requested: usize, used: usize },
    /// Absent classes cannot be synthesised and stay at zero.
    AbsentClass(Label),
}

/// Where a synthetic record came from; indices refer to the input slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOrigin {
    pub label: Label,
    pub base: usize,
    pub neighbor: usize,
    /// Interpolation factor `u` in `[0, 1)`.
    pub gap: f64,
    /// The synthetic point in standardized space, before rounding.
    pub standardized: Vec<f64>,
}

/// Per-dimension z-score parameters of the input records.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(records: &[FeatureRecord]) -> Result<Self> {
        let d = check_dims(records)?;
        let n = records.len() as f64;
        let mut mean = alloc::vec![0.0; d];
        for r in records {
            for (m, v) in mean.iter_mut().zip(&r.values) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for r in records {
            for ((s, v), m) in var.iter_mut().zip(&r.values).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| libm::sqrt(s / n)).collect();
        Ok(Standardizer { mean, std })
    }

    /// Constant dimensions map to 0.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutcome {
    /// The input records unchanged, followed by the synthetic ones.
    pub records: Vec<FeatureRecord>,
    /// One entry per synthetic record, in output order.
    pub origins: Vec<SyntheticOrigin>,
    pub standardizer: Standardizer,
    pub warnings: Vec<SmoteWarning>,
}

/// SMOTE with registry rounding rules; see [`smote_detailed`].
pub fn smote(records: &[FeatureRecord], k: usize, target_ratio: f64, seed: Seed) -> Result<Vec<FeatureRecord>> {
    let d = check_dims(records)?;
    Ok(smote_detailed(records, &SmoteParams::for_dims(d, k, target_ratio), seed)?.records)
}

/// Classes are processed in label order. Each synthetic sample draws a base
/// member (`below(class size)`), one of its `k` nearest same-class neighbours
/// (`below(k)`, neighbours ordered by standardized distance then input index)
/// and a gap `u = unit()`, and becomes `x + u · (nn − x)`.
pub fn smote_detailed(records: &[FeatureRecord], params: &SmoteParams, seed: Seed) -> Result<SmoteOutcome> {
    if params.k == 0 {
        return Err(Error::InvalidNeighborCount);
    }
    if !params.target_ratio.is_finite() || params.target_ratio < 0.0 {
        return Err(Error::InvalidParameter("target ratio must be a finite non-negative number"));
    }
    let d = check_dims(records)?;
    if params.discrete_dims.iter().any(|&i| i >= d) {
        return Err(Error::InvalidParameter("discrete dimension out of range"));
    }
    let standardizer = Standardizer::fit(records)?;
    let z: Vec<Vec<f64>> = records.iter().map(|r| standardizer.apply(&r.values)).collect();
    let counts = class_counts(records.iter().map(|r| &r.label));
    let majority = *counts.iter().max().unwrap_or(&0);
    let target = libm::ceil(params.target_ratio * majority as f64) as u64;

    let mut out = records.to_vec();
    let mut origins = Vec::new();
    let mut warnings = Vec::new();
    let mut stream = SeededStream::new(seed);

    for label in Label::ALL {
        let have = counts[label.index()];
        if have >= target {
            continue;
        }
        if have == 0 {
            warnings.push(SmoteWarning::AbsentClass(label));
            continue;
        }
        if have == 1 {
            return Err(Error::SingletonClass(label));
        }
        let members: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == label).collect();
        let k = params.k.min(members.len() - 1);
        if k < params.k {
            warnings.push(SmoteWarning::KClamped {
                label,
                requested: params.k,
                used: k,
            });
        }
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&a| nearest(&z, a, &members, k))
            .collect();
        for _ in have..target {
            let b = stream.below(members.len());
            let base = members[b];
            let neighbor = neighbors[b][stream.below(k)];
            let gap = stream.unit();
            let x = &records[base].values;
            let y = &records[neighbor].values;
            let mut values: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(&a, &c)| (a + gap * (c - a)).clamp(a.min(c), a.max(c)))
                .collect();
            let standardized = standardizer.apply(&values);
            for &i in &params.discrete_dims {
                values[i] = libm::round(values[i]);
            }
            out.push(FeatureRecord {
                track_id: None,
                event_index: origins.len(),
                values,
                label,
                synthetic: true,
            });
            origins.push(SyntheticOrigin {
                label,
                base,
                neighbor,
                gap,
                standardized,
            });
        }
    }
    Ok(SmoteOutcome {
        records: out,
        origins,
        standardizer,
        warnings,
    })
}

/// The `k` members closest to `a` (excluding `a` itself), nearest first.
fn nearest(z: &[Vec<f64>], a: usize, members: &[usize], k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = members
        .iter()
        .filter(|&&m| m != a)
        .map(|&m| {
            let d2: f64 = z[a].iter().zip(&z[m]).map(|(p, q)| (p - q) * (p - q)).sum();
            (d2, m)
        })
        .collect();
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    cand.truncate(k);
    cand.into_iter().map(|(_, m)| m).collect()
}
