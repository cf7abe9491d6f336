//! Dataset protocol (track-wise dedup, track-grouped split), classification
//! metrics and corpus statistics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bendsem::{Label, LabeledEvent};
use crate::featex::{beat_strength, has_previous, FeatureRecord};
use crate::model::{QL, STRINGS};
use crate::rng::{Seed, SeededStream};
use crate::{Error, Result};

fn value_key(v: f64) -> u64 {
    // -0.0 and 0.0 are the same feature value
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Keeps, within each track, the first record (by event index) of every
/// distinct (values, label) pair. Records from different tracks never
/// collide. Output preserves input order.
pub fn dedup_trackwise(records: &[FeatureRecord]) -> Vec<FeatureRecord> {
    type Key<'a> = (&'a Option<String>, Vec<u64>, Label);
    let mut first: BTreeMap<Key, (usize, usize)> = BTreeMap::new();
    for (pos, r) in records.iter().enumerate() {
        let key = (&r.track_id, r.values.iter().map(|&v| value_key(v)).collect(), r.label);
        first
            .entry(key)
            .and_modify(|best| {
                if r.event_index < best.0 {
                    *best = (r.event_index, pos);
                }
            })
            .or_insert((r.event_index, pos));
    }
    let keep: BTreeSet<usize> = first.values().map(|&(_, pos)| pos).collect();
    keep.into_iter().map(|pos| records[pos].clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Largest accepted per-class proportion difference between the sides.
    pub imbalance_tolerance: f64,
    pub seed: Seed,
}

impl SplitSpec {
    pub const DEFAULT_TEST_FRACTION: f64 = 0.25;
    pub const DEFAULT_TOLERANCE: f64 = 0.02;
    /// Relative slack allowed around the test-size target.
    pub const SIZE_SLACK: f64 = 0.05;
    pub const SWAP_BUDGET: usize = 1000;

    pub fn new(seed: Seed) -> Self {
        SplitSpec {
            test_fraction: Self::DEFAULT_TEST_FRACTION,
            imbalance_tolerance: Self::DEFAULT_TOLERANCE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.test_fraction));
        }
        if self.imbalance_tolerance.is_nan() || self.imbalance_tolerance < 0.0 {
            return Err(Error::InvalidParameter("imbalance tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitWarning {
    Imbalance { achieved: f64, tolerance: f64 },
    TestSize { achieved: usize, target: f64 },
}

impl fmt::Display for SplitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitWarning::Imbalance { achieved, tolerance } => write!(
                f,
                "per-class proportion gap {achieved:.4} exceeds the tolerance {tolerance:.4}"
            ),
            SplitWarning::TestSize { achieved, target } => write!(
                f,
                "test set has {achieved} records, outside 5% of the target {target:.1}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<FeatureRecord>,
    pub test: Vec<FeatureRecord>,
    /// Track ids on the test side, sorted.
    pub test_tracks: Vec<Option<String>>,
    /// Largest per-class proportion difference between the two sides.
    pub imbalance: f64,
    pub warnings: Vec<SplitWarning>,
}

/// Largest `|p_train(c) − p_test(c)|` over the four labels.
pub fn proportion_gap(train: &[u64; 4], test: &[u64; 4]) -> f64 {
    let nt: u64 = train.iter().sum();
    let ns: u64 = test.iter().sum();
    let p = |c: u64, n: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    (0..4)
        .map(|k| libm::fabs(p(train[k], nt) - p(test[k], ns)))
        .fold(0.0, f64::max)
}

struct Group {
    counts: [u64; 4],
    size: u64,
}

struct State<'a> {
    groups: &'a [Group],
    total: [u64; 4],
    target: f64,
}

impl State<'_> {
    /// `(size violation, gap)`, compared lexicographically.
    fn score(&self, in_test: &[bool]) -> (f64, f64) {
        let mut test = [0u64; 4];
        for (g, _) in self.groups.iter().zip(in_test).filter(|(_, &t)| t) {
            for (t, c) in test.iter_mut().zip(g.counts) {
                *t += c;
            }
        }
        let mut train = self.total;
        for k in 0..4 {
            train[k] -= test[k];
        }
        let n_test: u64 = test.iter().sum();
        let dev = libm::fabs(n_test as f64 - self.target) - SplitSpec::SIZE_SLACK * self.target;
        (dev.max(0.0), proportion_gap(&train, &test))
    }
}

/// Seeded shuffle of the tracks, greedily moved to test until the target
/// size is reached (always leaving one for training).
fn greedy_fill(groups: &[Group], target: f64, stream: &mut SeededStream) -> Vec<bool> {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    stream.shuffle(&mut order);
    let mut in_test = vec![false; groups.len()];
    let mut n_test = 0u64;
    for &g in &order[..order.len() - 1] {
        if n_test as f64 >= target {
            break;
        }
        in_test[g] = true;
        n_test += groups[g].size;
    }
    in_test
}

/// Assigns whole tracks to train or test: a greedy fill (see
/// [`greedy_fill`]), then seeded single-track swaps that are accepted when
/// they improve `(size violation, class-proportion gap)` lexicographically.
/// When no swap has helped for a while the search restarts from a fresh
/// fill, keeping the best split seen. Stops once both constraints hold or
/// after [`SplitSpec::SWAP_BUDGET`] proposals.
pub fn split_by_track(records: &[FeatureRecord], spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let mut index: BTreeMap<&Option<String>, usize> = BTreeMap::new();
    for r in records {
        let next = index.len();
        index.entry(&r.track_id).or_insert(next);
    }
    if index.len() < 2 {
        return Err(Error::TooFewTracks(index.len()));
    }
    // groups in track-id order, independent of record order
    let keys: Vec<&Option<String>> = index.keys().copied().collect();
    let slot: BTreeMap<&Option<String>, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut groups: Vec<Group> = keys.iter().map(|_| Group { counts: [0; 4], size: 0 }).collect();
    let mut total = [0u64; 4];
    for r in records {
        let g = &mut groups[slot[&r.track_id]];
        g.counts[r.label.index()] += 1;
        g.size += 1;
        total[r.label.index()] += 1;
    }
    let state = State {
        groups: &groups,
        total,
        target: spec.test_fraction * records.len() as f64,
    };

    let mut stream = SeededStream::new(spec.seed);
    let done = |s: (f64, f64)| s.0 == 0.0 && s.1 <= spec.imbalance_tolerance;
    let better = |a: (f64, f64), b: (f64, f64)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut in_test = greedy_fill(&groups, state.target, &mut stream);
    let mut current = state.score(&in_test);
    let mut best = (in_test.clone(), current);
    let mut stalled = 0;
    let mut moves = 0;
    while !done(best.1) && moves < SplitSpec::SWAP_BUDGET {
        moves += 1;
        let test_side: Vec<usize> = (0..groups.len()).filter(|&g| in_test[g]).collect();
        let train_side: Vec<usize> = (0..groups.len()).filter(|&g| !in_test[g]).collect();
        // every swap has likely been tried: restart from a fresh fill
        if stalled >= (2 * test_side.len() * train_side.len()).max(8) {
            in_test = greedy_fill(&groups, state.target, &mut stream);
            current = state.score(&in_test);
            stalled = 0;
        } else {
            let a = test_side[stream.below(test_side.len())];
            let b = train_side[stream.below(train_side.len())];
            in_test[a] = false;
            in_test[b] = true;
            let s = state.score(&in_test);
            if better(s, current) {
                current = s;
                stalled = 0;
            } else {
                in_test[a] = true;
                in_test[b] = false;
                stalled += 1;
            }
        }
        if better(current, best.1) {
            best = (in_test.clone(), current);
        }
    }
    let (in_test, best) = best;

    let mut train = Vec::new();
    let mut test = Vec::new();
    for r in records {
        if in_test[slot[&r.track_id]] {
            test.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    let mut warnings = Vec::new();
    if best.1 > spec.imbalance_tolerance {
        warnings.push(SplitWarning::Imbalance {
            achieved: best.1,
            tolerance: spec.imbalance_tolerance,
        });
    }
    if best.0 > 0.0 {
        warnings.push(SplitWarning::TestSize {
            achieved: test.len(),
            target: state.target,
        });
    }
    Ok(Split {
        train,
        test,
        test_tracks: keys
            .iter()
            .enumerate()
            .filter(|(i, _)| in_test[*i])
            .map(|(_, k)| (*k).clone())
            .collect(),
        imbalance: best.1,
        warnings,
    })
}

/// Rows are true labels, columns predictions, both in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::LengthMismatch {
                left: truth.len(),
                right: predicted.len(),
            });
        }
        let mut m = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            m.counts[t.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, truth: Label) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn col_sum(&self, predicted: Label) -> u64 {
        self.counts.iter().map(|row| row[predicted.index()]).sum()
    }

    pub fn get(&self, truth: Label, predicted: Label) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 with `0/0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of true instances.
    pub support: u64,
}

impl Scores {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Scores {
            precision,
            recall,
            f1,
            support: tp + fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub per_class: [Scores; 4],
    /// Mean F1 over the labels that occur in the truth or the predictions.
    pub macro_f1: f64,
    /// Any bend label (`↑`, `→`, `↓`) against `∅`.
    pub binary: Scores,
    pub accuracy: f64,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let c = &confusion.counts;
        let per_class = core::array::from_fn(|k| {
            let tp = c[k][k];
            let label = Label::ALL[k];
            Scores::from_counts(tp, confusion.col_sum(label) - tp, confusion.row_sum(label) - tp)
        });
        let present: Vec<usize> = (0..4)
            .filter(|&k| confusion.row_sum(Label::ALL[k]) + confusion.col_sum(Label::ALL[k]) > 0)
            .collect();
        let macro_f1 = if present.is_empty() {
            0.0
        } else {
            present.iter().map(|&k| per_class[k].f1).sum::<f64>() / present.len() as f64
        };
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (t, row) in c.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                match (t != 0, p != 0) {
                    (true, true) => tp += n,
                    (false, true) => fp += n,
                    (true, false) => fn_ += n,
                    (false, false) => {}
                }
            }
        }
        let diag: u64 = (0..4).map(|k| c[k][k]).sum();
        EvalReport {
            confusion,
            per_class,
            macro_f1,
            binary: Scores::from_counts(tp, fp, fn_),
            accuracy: ratio(diag, confusion.total()),
        }
    }
}

pub fn evaluate(truth: &[Label], predicted: &[Label]) -> Result<EvalReport> {
    if truth.is_empty() && predicted.is_empty() {
        return Err(Error::EmptyInput("nothing to evaluate"));
    }
    Ok(EvalReport::from_confusion(ConfusionMatrix::from_labels(truth, predicted)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts {
    pub counts: [u64; 4],
    pub total: u64,
}

impl LabelCounts {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Self {
        let mut c = LabelCounts::default();
        for l in labels {
            c.counts[l.index()] += 1;
            c.total += 1;
        }
        c
    }

    pub fn get(&self, label: Label) -> u64 {
        self.counts[label.index()]
    }
}

pub fn label_counts(events: &[LabeledEvent]) -> LabelCounts {
    LabelCounts::from_labels(events.iter().map(|e| &e.label))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFilter {
    All,
    BentOnly,
}

/// Normalised note positions. Row `s − 1` holds string `s` (row 0 is the
/// high e string); columns are frets `0..=max_fret`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub max_fret: u8,
    pub counts: Vec<Vec<u64>>,
    pub values: Vec<Vec<f64>>,
    pub total: u64,
}

impl Heatmap {
    /// Normalised value at (string 1..=6, fret).
    pub fn at(&self, string: u8, fret: u8) -> f64 {
        if string == 0 || string as usize > STRINGS {
            return 0.0;
        }
        self.values[string as usize - 1].get(fret as usize).copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().flatten().sum()
    }
}

/// Counts every raw (string, fret) of the selected events, open strings
/// included. The width is fixed by the largest fret among *all* events so
/// the "all" and "bent only" maps line up.
pub fn fretboard_heatmap(events: &[LabeledEvent], filter: HeatmapFilter) -> Heatmap {
    let max_fret = events
        .iter()
        .flat_map(|e| e.raw_notes.iter().map(|&(_, f)| f))
        .max()
        .unwrap_or(0);
    let width = max_fret as usize + 1;
    let mut counts = vec![vec![0u64; width]; STRINGS];
    let mut total = 0;
    for e in events {
        if filter == HeatmapFilter::BentOnly && !e.label.is_bend() {
            continue;
        }
        for &(s, f) in &e.raw_notes {
            if (1..=STRINGS as u8).contains(&s) {
                counts[s as usize - 1][f as usize] += 1;
                total += 1;
            }
        }
    }
    let values = counts
        .iter()
        .map(|row| row.iter().map(|&c| ratio(c, total)).collect())
        .collect();
    Heatmap {
        max_fret,
        counts,
        values,
        total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    BeatStrength,
    Duration,
    RelativeDuration,
    Pitch,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::BeatStrength,
        Quantity::Duration,
        Quantity::RelativeDuration,
        Quantity::Pitch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::BeatStrength => "beat_strength",
            Quantity::Duration => "duration",
            Quantity::RelativeDuration => "relative_duration",
            Quantity::Pitch => "pitch",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == name)
            .ok_or(Error::InvalidParameter("unknown quantity"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relative {
    Longer,
    Shorter,
    Same,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bin {
    Strength(f64),
    Duration(QL),
    Relative(Relative),
    Midi(u8),
}

impl Bin {
    fn rank(&self, other: &Bin) -> core::cmp::Ordering {
        match (self, other) {
            (Bin::Strength(a), Bin::Strength(b)) => a.total_cmp(b),
            (Bin::Duration(a), Bin::Duration(b)) => a.cmp(b),
            (Bin::Relative(a), Bin::Relative(b)) => a.cmp(b),
            (Bin::Midi(a), Bin::Midi(b)) => a.cmp(b),
            _ => core::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bin::Strength(v) => write!(f, "{v}"),
            Bin::Duration(q) => write!(f, "{q}"),
            Bin::Relative(Relative::Longer) => f.write_str("longer"),
            Bin::Relative(Relative::Shorter) => f.write_str("shorter"),
            Bin::Relative(Relative::Same) => f.write_str("same"),
            Bin::Midi(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    /// `None` for the pooled row.
    pub label: Option<Label>,
    pub counts: Vec<u64>,
    /// `counts / total`; all zeros for an empty row.
    pub values: Vec<f64>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub quantity: Quantity,
    /// Ascending bins (relative duration: longer, shorter, same).
    pub bins: Vec<Bin>,
    pub rows: Vec<HistogramRow>,
}

impl Histogram {
    pub fn row(&self, label: Label) -> Option<&HistogramRow> {
        self.rows.iter().find(|r| r.label == Some(label))
    }
}

/// Histogram of a quantity, pooled or one row per label. Beat strength and
/// duration are per event, pitch is per sounding note, and relative duration
/// skips events with no previous neighbour.
pub fn distribution(events: &[LabeledEvent], quantity: Quantity, per_label: bool) -> Histogram {
    let mut samples: Vec<(Label, Bin)> = Vec::new();
    match quantity {
        Quantity::BeatStrength => {
            for e in events {
                if let Ok(v) = beat_strength(e.time_sig, e.measure_offset) {
                    samples.push((e.label, Bin::Strength(v)));
                }
            }
        }
        Quantity::Duration => samples.extend(events.iter().map(|e| (e.label, Bin::Duration(e.duration)))),
        Quantity::RelativeDuration => {
            for (i, has) in has_previous(events).into_iter().enumerate() {
                if has {
                    let rel = match events[i].duration.cmp(&events[i - 1].duration) {
                        core::cmp::Ordering::Greater => Relative::Longer,
                        core::cmp::Ordering::Less => Relative::Shorter,
                        core::cmp::Ordering::Equal => Relative::Same,
                    };
                    samples.push((events[i].label, Bin::Relative(rel)));
                }
            }
        }
        Quantity::Pitch => {
            for e in events {
                samples.extend(e.arrival_pitches.iter().map(|p| (e.label, Bin::Midi(p.midi()))));
            }
        }
    }

    let mut bins: Vec<Bin> = if quantity == Quantity::RelativeDuration {
        vec![
            Bin::Relative(Relative::Longer),
            Bin::Relative(Relative::Shorter),
            Bin::Relative(Relative::Same),
        ]
    } else {
        samples.iter().map(|s| s.1).collect()
    };
    bins.sort_by(|a, b| a.rank(b));
    bins.dedup_by(|a, b| a.rank(b).is_eq());

    let row_labels: Vec<Option<Label>> = if per_label {
        Label::ALL.iter().map(|&l| Some(l)).collect()
    } else {
        vec![None]
    };
    let rows = row_labels
        .into_iter()
        .map(|label| {
            let mut counts = vec![0u64; bins.len()];
            for (l, b) in &samples {
                if label.is_none_or(|x| x == *l) {
                    let i = bins.partition_point(|x| x.rank(b).is_lt());
                    counts[i] += 1;
                }
            }
            let total: u64 = counts.iter().sum();
            HistogramRow {
                label,
                values: counts.iter().map(|&c| ratio(c, total)).collect(),
                counts,
                total,
            }
        })
        .collect();
    Histogram { quantity, bins, rows }
}
