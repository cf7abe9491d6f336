//! Per-event feature vectors with two events of past and future context.
//!
//! Layout of the 33 dimensions (`n` is the current event):
//!
//! | index | feature                                            |
//! |-------|----------------------------------------------------|
//! | 0     | duration (quarter lengths)                         |
//! | 1     | beat strength                                      |
//! | 2–4   | longer / shorter / same duration as previous       |
//! | 5     | number of notes                                    |
//! | 6–10  | mean pitch at n−2, n−1, n, n+1, n+2                |
//! | 11–14 | pitch jump n−2→n, n−1→n, n→n+1, n→n+2              |
//! | 15    | key signature accidentals                          |
//! | 16    | pitch class relative to the pentatonic minor root  |
//! | 17–20 | mean fret at n−2, n−1, n+1, n+2                    |
//! | 21–24 | mean string at n−2, n−1, n+1, n+2                  |
//! | 25–26 | fret jump n−2→n−1, n+1→n+2                         |
//! | 27–28 | string jump n−2→n−1, n+1→n+2                       |
//! | 29–32 | missing flags for n−2, n−1, n+1, n+2               |
//!
//! Nothing about the current event's own string or fret is included: once
//! bends are removed, the position a player would choose is unknown.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bendsem::{Label, LabeledEvent};
use crate::model::{Pitch, TimeSignature, QL};
use crate::{Error, Result};

pub const NUM_FEATURES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureGroup {
    Temporal,
    Pitch,
    Position,
    Missing,
}

/// How a dimension's values are distributed; SMOTE rounds the discrete kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Real,
    Integer,
    Boolean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSpec {
    pub index: usize,
    pub name: &'static str,
    pub group: FeatureGroup,
    pub kind: ValueKind,
}

pub mod idx {
    pub const DURATION: usize = 0;
    pub const BEAT_STRENGTH: usize = 1;
    pub const LONGER: usize = 2;
    pub const SHORTER: usize = 3;
    pub const SAME: usize = 4;
    pub const NUM_NOTES: usize = 5;
    /// n−2, n−1, n, n+1, n+2
    pub const PITCH: usize = 6;
    /// n−2→n, n−1→n, n→n+1, n→n+2
    pub const PITCH_JUMP: usize = 11;
    pub const ACCIDENTALS: usize = 15;
    pub const PC_WRT_ROOT: usize = 16;
    /// n−2, n−1, n+1, n+2
    pub const FRET: usize = 17;
    pub const STRING: usize = 21;
    /// n−2→n−1, n+1→n+2
    pub const FRET_JUMP: usize = 25;
    pub const STRING_JUMP: usize = 27;
    /// n−2, n−1, n+1, n+2
    pub const MISSING: usize = 29;
}

macro_rules! spec {
    ($i:expr, $name:expr, $group:ident, $kind:ident) => {
        FeatureSpec {
            index: $i,
            name: $name,
            group: FeatureGroup::$group,
            kind: ValueKind::$kind,
        }
    };
}

const SPECS: [FeatureSpec; NUM_FEATURES] = [
    spec!(0, "duration", Temporal, Real),
    spec!(1, "beat_strength", Temporal, Real),
    spec!(2, "longer_than_prev", Temporal, Boolean),
    spec!(3, "shorter_than_prev", Temporal, Boolean),
    spec!(4, "same_as_prev", Temporal, Boolean),
    spec!(5, "num_notes", Pitch, Integer),
    spec!(6, "pitch_n-2", Pitch, Real),
    spec!(7, "pitch_n-1", Pitch, Real),
    spec!(8, "pitch_n", Pitch, Real),
    spec!(9, "pitch_n+1", Pitch, Real),
    spec!(10, "pitch_n+2", Pitch, Real),
    spec!(11, "pitch_jump_n-2", Pitch, Real),
    spec!(12, "pitch_jump_n-1", Pitch, Real),
    spec!(13, "pitch_jump_n+1", Pitch, Real),
    spec!(14, "pitch_jump_n+2", Pitch, Real),
    spec!(15, "accidentals", Pitch, Integer),
    spec!(16, "pc_wrt_root", Pitch, Integer),
    spec!(17, "fret_n-2", Position, Real),
    spec!(18, "fret_n-1", Position, Real),
    spec!(19, "fret_n+1", Position, Real),
    spec!(20, "fret_n+2", Position, Real),
    spec!(21, "string_n-2", Position, Real),
    spec!(22, "string_n-1", Position, Real),
    spec!(23, "string_n+1", Position, Real),
    spec!(24, "string_n+2", Position, Real),
    spec!(25, "fret_jump_n-2", Position, Real),
    spec!(26, "fret_jump_n+1", Position, Real),
    spec!(27, "string_jump_n-2", Position, Real),
    spec!(28, "string_jump_n+1", Position, Real),
    spec!(29, "missing_n-2", Missing, Boolean),
    spec!(30, "missing_n-1", Missing, Boolean),
    spec!(31, "missing_n+1", Missing, Boolean),
    spec!(32, "missing_n+2", Missing, Boolean),
];

/// Named, ordered feature layout.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureRegistry;

impl FeatureRegistry {
    pub fn specs(&self) -> &'static [FeatureSpec; NUM_FEATURES] {
        &SPECS
    }

    pub fn len(&self) -> usize {
        NUM_FEATURES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, index: usize) -> Option<&'static str> {
        SPECS.get(index).map(|s| s.name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        SPECS.iter().position(|s| s.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> {
        SPECS.iter().map(|s| s.name)
    }

    /// Dimensions holding integer or boolean values.
    pub fn discrete_dims(&self) -> Vec<usize> {
        SPECS
            .iter()
            .filter(|s| s.kind != ValueKind::Real)
            .map(|s| s.index)
            .collect()
    }
}

/// One event's feature vector with its label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    /// `None` for synthetic records.
    pub track_id: Option<String>,
    pub event_index: usize,
    pub values: Vec<f64>,
    pub label: Label,
    pub synthetic: bool,
}

impl FeatureRecord {
    pub fn new(track_id: impl Into<String>, event_index: usize, values: Vec<f64>, label: Label) -> Self {
        FeatureRecord {
            track_id: Some(track_id.into()),
            event_index,
            values,
            label,
            synthetic: false,
        }
    }
}

/// Finest grid considered by [`beat_strength`].
const FINEST_GRID: QL = QL::raw(1, 8);

/// Grid spans of the metrical levels of a signature, shallowest first
/// (level 0 is the whole measure).
pub fn metrical_levels(ts: TimeSignature) -> Vec<QL> {
    let measure = ts.measure_length();
    let unit = ts.beat_unit();
    let mut levels = alloc::vec![measure];
    let push = |span: QL, levels: &mut Vec<QL>| {
        if levels.last().is_none_or(|&last| span < last) {
            levels.push(span);
        }
    };
    let n = ts.numerator as i64;
    if n % 3 == 0 && n > 3 {
        // compound: dotted beats, then the beat unit
        push(unit * 3, &mut levels);
        push(unit, &mut levels);
    } else {
        let mut group = n;
        while group % 2 == 0 && group > 1 {
            group /= 2;
            push(unit * group, &mut levels);
        }
        push(unit, &mut levels);
    }
    let mut span = unit;
    while span > FINEST_GRID {
        span = span.scale(crate::model::Rational::new(1, 2));
        push(span, &mut levels);
    }
    levels
}

/// Metrical weight of a position: `2^-d` for the shallowest level `d` whose
/// grid contains `offset`, and `2^-(deepest + 1)` off every grid.
pub fn beat_strength(ts: TimeSignature, offset: QL) -> Result<f64> {
    if !ts.is_valid() {
        return Err(Error::InvalidTimeSignature {
            numerator: ts.numerator,
            denominator: ts.denominator,
        });
    }
    let measure = ts.measure_length();
    if offset >= measure {
        return Err(Error::OffsetOutOfMeasure {
            offset: alloc::format!("{offset}"),
            measure_length: alloc::format!("{measure}"),
        });
    }
    let levels = metrical_levels(ts);
    let depth = levels
        .iter()
        .position(|&span| offset.is_multiple_of(span))
        .unwrap_or(levels.len());
    Ok(libm::ldexp(1.0, -(depth as i32)))
}

/// Pitch class of the pentatonic minor root for a key signature
/// (the relative minor: A for no accidentals, each sharp adds a fifth).
pub fn scale_root(accidentals: i32) -> Result<u8> {
    if !(-7..=7).contains(&accidentals) {
        return Err(Error::KeyOutOfRange(accidentals));
    }
    Ok((7 * accidentals + 9).rem_euclid(12) as u8)
}

pub fn pc_wrt_root(pitch: Pitch, accidentals: i32) -> Result<u8> {
    let root = scale_root(accidentals)? as i32;
    Ok((pitch.class() as i32 - root).rem_euclid(12) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventStats {
    pub avg_pitch: f64,
    /// 0 when every note is an open string.
    pub avg_fret: f64,
    pub avg_string: f64,
    pub num_notes: usize,
    /// Whether any note is fretted (fret > 0).
    pub fretted: bool,
}

/// Mean pitch over all notes; mean fret and string over fretted notes only.
pub fn event_stats(event: &LabeledEvent) -> EventStats {
    let n = event.arrival_pitches.len().max(1) as f64;
    let avg_pitch = event.arrival_pitches.iter().map(|p| p.midi() as f64).sum::<f64>() / n;
    let (mut frets, mut strings, mut count) = (0.0, 0.0, 0usize);
    for &(s, f) in &event.raw_notes {
        if f > 0 {
            frets += f as f64;
            strings += s as f64;
            count += 1;
        }
    }
    let (avg_fret, avg_string) = if count == 0 {
        (0.0, 0.0)
    } else {
        (frets / count as f64, strings / count as f64)
    };
    EventStats {
        avg_pitch,
        avg_fret,
        avg_string,
        num_notes: event.raw_notes.len(),
        fretted: count > 0,
    }
}

/// True when the silence between `earlier` and `later` lasts at least one
/// measure of the later event's signature, which cuts the context chain.
pub fn context_break(earlier: &LabeledEvent, later: &LabeledEvent) -> bool {
    match later.onset.checked_sub(earlier.end()) {
        Some(gap) => gap >= later.time_sig.measure_length(),
        None => false,
    }
}

/// For each event, the index of the first event of its context run.
fn run_starts(events: &[LabeledEvent]) -> Vec<usize> {
    let mut starts = Vec::with_capacity(events.len());
    let mut start = 0;
    for i in 0..events.len() {
        if i > 0 && (events[i].track_id != events[i - 1].track_id || context_break(&events[i - 1], &events[i])) {
            start = i;
        }
        starts.push(start);
    }
    starts
}

/// Whether each event has a present previous neighbor.
pub fn has_previous(events: &[LabeledEvent]) -> Vec<bool> {
    run_starts(events).iter().enumerate().map(|(i, &s)| i > s).collect()
}

/// Builds one record per event. `events` holds one or more tracks' labeled
/// events in onset order; context never crosses a track change or a rest of
/// a whole measure or longer.
pub fn extract_features(events: &[LabeledEvent]) -> Vec<FeatureRecord> {
    let n = events.len();
    let starts = run_starts(events);
    let mut ends = alloc::vec![0usize; n];
    for i in (0..n).rev() {
        ends[i] = if i + 1 < n && starts[i + 1] == starts[i] { ends[i + 1] } else { i };
    }
    let stats: Vec<EventStats> = events.iter().map(event_stats).collect();

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ev = &events[i];
        let neighbor = |k: isize| -> Option<usize> {
            let j = i as isize + k;
            if j < starts[i] as isize || j > ends[i] as isize {
                None
            } else {
                Some(j as usize)
            }
        };
        let mut v = alloc::vec![0.0f64; NUM_FEATURES];
        let cur = &stats[i];

        v[idx::DURATION] = ev.duration.to_f64();
        v[idx::BEAT_STRENGTH] = beat_strength(ev.time_sig, ev.measure_offset).unwrap_or(0.0);
        if let Some(p) = neighbor(-1) {
            let prev = events[p].duration;
            let slot = match ev.duration.cmp(&prev) {
                core::cmp::Ordering::Greater => idx::LONGER,
                core::cmp::Ordering::Less => idx::SHORTER,
                core::cmp::Ordering::Equal => idx::SAME,
            };
            v[slot] = 1.0;
        }
        v[idx::NUM_NOTES] = cur.num_notes as f64;

        let offsets: [isize; 4] = [-2, -1, 1, 2];
        v[idx::PITCH + 2] = cur.avg_pitch;
        for (slot, &k) in offsets.iter().enumerate() {
            let pitch_slot = if k < 0 { slot } else { slot + 1 };
            match neighbor(k) {
                Some(j) => {
                    let s = &stats[j];
                    v[idx::PITCH + pitch_slot] = s.avg_pitch;
                    v[idx::PITCH_JUMP + slot] = if k < 0 {
                        cur.avg_pitch - s.avg_pitch
                    } else {
                        s.avg_pitch - cur.avg_pitch
                    };
                    v[idx::FRET + slot] = s.avg_fret;
                    v[idx::STRING + slot] = s.avg_string;
                }
                None => v[idx::MISSING + slot] = 1.0,
            }
        }
        // jumps between the two past and the two future neighbors
        for (pair, (a, b)) in [(-2isize, -1isize), (1, 2)].into_iter().enumerate() {
            if let (Some(ja), Some(jb)) = (neighbor(a), neighbor(b)) {
                if stats[ja].fretted && stats[jb].fretted {
                    v[idx::FRET_JUMP + pair] = stats[jb].avg_fret - stats[ja].avg_fret;
                    v[idx::STRING_JUMP + pair] = stats[jb].avg_string - stats[ja].avg_string;
                }
            }
        }

        let acc = ev.key_sig.accidentals();
        v[idx::ACCIDENTALS] = acc as f64;
        let rounded = libm::round(cur.avg_pitch).clamp(0.0, 127.0) as i32;
        let pc = Pitch::new(rounded)
            .ok()
            .and_then(|p| pc_wrt_root(p, acc).ok())
            .unwrap_or(0);
        v[idx::PC_WRT_ROOT] = pc as f64;

        out.push(FeatureRecord::new(ev.track_id.clone(), ev.event_index, v, ev.label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KeySignature, Rational};
    use alloc::vec;

    fn q(n: i64, d: i64) -> QL {
        QL::new(n, d).unwrap()
    }
    fn ts(n: u32, d: u32) -> TimeSignature {
        TimeSignature::new(n, d).unwrap()
    }

    #[test]
    fn registry_is_contiguous_and_unique() {
        let reg = FeatureRegistry;
        for (i, s) in reg.specs().iter().enumerate() {
            assert_eq!(s.index, i);
        }
        let mut names: Vec<&str> = reg.names().collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), NUM_FEATURES);
        assert_eq!(reg.index_of("pitch_jump_n+2"), Some(14));
        assert_eq!(reg.discrete_dims(), vec![2, 3, 4, 5, 15, 16, 29, 30, 31, 32]);
    }

    #[test]
    fn beat_strength_common_time() {
        let t = ts(4, 4);
        assert_eq!(beat_strength(t, q(0, 1)).unwrap(), 1.0);
        assert_eq!(beat_strength(t, q(2, 1)).unwrap(), 0.5);
        assert_eq!(beat_strength(t, q(1, 1)).unwrap(), 0.25);
        assert_eq!(beat_strength(t, q(3, 1)).unwrap(), 0.25);
        assert_eq!(beat_strength(t, q(1, 2)).unwrap(), 0.125);
        assert_eq!(beat_strength(t, q(1, 4)).unwrap(), 0.0625);
        assert_eq!(beat_strength(t, q(1, 8)).unwrap(), 0.03125);
        // triplet eighth: off every grid, one level below the deepest
        assert_eq!(beat_strength(t, q(1, 3)).unwrap(), 0.015625);
    }

    #[test]
    fn beat_strength_other_meters() {
        assert_eq!(beat_strength(ts(3, 4), q(1, 1)).unwrap(), 0.5);
        assert_eq!(beat_strength(ts(3, 4), q(2, 1)).unwrap(), 0.5);
        assert_eq!(beat_strength(ts(6, 8), q(3, 2)).unwrap(), 0.5);
        assert_eq!(beat_strength(ts(6, 8), q(1, 2)).unwrap(), 0.25);
        assert_eq!(beat_strength(ts(2, 4), q(1, 1)).unwrap(), 0.5);
        assert_eq!(beat_strength(ts(7, 8), q(1, 2)).unwrap(), 0.5);
    }

    #[test]
    fn beat_strength_rejects_out_of_measure() {
        assert!(beat_strength(ts(4, 4), q(4, 1)).is_err());
        assert!(beat_strength(ts(3, 4), q(7, 2)).is_err());
    }

    #[test]
    fn levels_are_strictly_nested() {
        for (n, d) in [(4, 4), (3, 4), (6, 8), (12, 8), (5, 4), (7, 8), (2, 2), (1, 4), (10, 8), (4, 64)] {
            let lv = metrical_levels(ts(n, d));
            for w in lv.windows(2) {
                assert!(w[1] < w[0], "{n}/{d}: {lv:?}");
            }
        }
        assert_eq!(
            metrical_levels(ts(4, 4)),
            vec![q(4, 1), q(2, 1), q(1, 1), q(1, 2), q(1, 4), q(1, 8)]
        );
    }

    #[test]
    fn scale_roots() {
        assert_eq!(scale_root(1).unwrap(), 4);
        assert_eq!(scale_root(0).unwrap(), 9);
        assert_eq!(scale_root(-1).unwrap(), 2);
        assert!(scale_root(8).is_err());
    }

    #[test]
    fn pitch_class_relative_to_root() {
        let p = |m| Pitch::new(m).unwrap();
        assert_eq!(pc_wrt_root(p(69), 1).unwrap(), 5);
        assert_eq!(pc_wrt_root(p(64), 0).unwrap(), 7);
        assert_eq!(pc_wrt_root(p(64), 1).unwrap(), 0);
        for a in -7..=7 {
            for m in 0..116 {
                assert_eq!(pc_wrt_root(p(m), a).unwrap(), pc_wrt_root(p(m + 12), a).unwrap());
            }
        }
    }

    fn le(i: usize, onset: QL, dur: QL, notes: &[(u8, u8)], label: Label) -> LabeledEvent {
        let tuning = crate::model::Tuning::STANDARD;
        LabeledEvent {
            track_id: "t".into(),
            event_index: i,
            source_event: i,
            onset,
            duration: dur,
            arrival_pitches: notes.iter().map(|&(s, f)| tuning.pitch_of(s, f).unwrap()).collect(),
            raw_notes: notes.to_vec(),
            label,
            measure_offset: QL::from_ratio(onset.ratio() - (onset.ratio() / Rational::from_integer(4)).floor() * 4).unwrap(),
            time_sig: TimeSignature::COMMON,
            key_sig: KeySignature::default(),
        }
    }

    #[test]
    fn event_stats_examples() {
        let s = event_stats(&le(0, q(0, 1), q(1, 1), &[(2, 8)], Label::None));
        assert_eq!((s.avg_pitch, s.avg_fret, s.avg_string, s.num_notes), (67.0, 8.0, 2.0, 1));
        let s = event_stats(&le(0, q(0, 1), q(1, 1), &[(1, 0), (2, 8)], Label::None));
        assert_eq!((s.avg_fret, s.avg_string, s.num_notes), (8.0, 2.0, 2));
        assert_eq!(s.avg_pitch, 65.5);
        let s = event_stats(&le(0, q(0, 1), q(1, 1), &[(1, 0), (2, 0)], Label::None));
        assert_eq!((s.avg_fret, s.avg_string), (0.0, 0.0));
    }

    #[test]
    fn context_features() {
        let evs = vec![
            le(0, q(0, 1), q(1, 2), &[(2, 5)], Label::None),
            le(1, q(1, 2), q(1, 2), &[(3, 7)], Label::None),
            le(2, q(1, 1), q(1, 1), &[(2, 8)], Label::Up),
            le(3, q(2, 1), q(1, 2), &[(1, 5)], Label::None),
        ];
        let recs = extract_features(&evs);
        assert_eq!(recs.len(), 4);

        let first = &recs[0].values;
        assert_eq!(first[idx::MISSING], 1.0);
        assert_eq!(first[idx::MISSING + 1], 1.0);
        for i in [idx::PITCH, idx::PITCH + 1, idx::PITCH_JUMP, idx::PITCH_JUMP + 1, idx::FRET, idx::FRET + 1] {
            assert_eq!(first[i], 0.0);
        }
        assert_eq!(first[idx::LONGER] + first[idx::SHORTER] + first[idx::SAME], 0.0);

        let cur = &recs[2].values;
        assert_eq!((cur[idx::LONGER], cur[idx::SHORTER], cur[idx::SAME]), (1.0, 0.0, 0.0));
        assert_eq!(cur[idx::FRET_JUMP], 2.0);
        assert_eq!(cur[idx::STRING_JUMP], 1.0);
        assert_eq!(cur[idx::PITCH + 2], 67.0);
        // pitch jump n-1 -> n: 67 - (55+7)
        assert_eq!(cur[idx::PITCH_JUMP + 1], 5.0);
        // pitch jump n -> n+1: 69 - 67
        assert_eq!(cur[idx::PITCH_JUMP + 2], 2.0);
        assert_eq!(cur[idx::MISSING + 3], 1.0);
        assert_eq!(recs[2].label, Label::Up);
        // 67 = G, key 0 root A: 10
        assert_eq!(cur[idx::PC_WRT_ROOT], 10.0);
    }

    #[test]
    fn whole_measure_rest_breaks_context() {
        let evs = vec![
            le(0, q(0, 1), q(1, 1), &[(2, 5)], Label::None),
            le(1, q(5, 1), q(1, 1), &[(2, 7)], Label::None),
            le(2, q(6, 1), q(1, 1), &[(2, 8)], Label::None),
        ];
        let recs = extract_features(&evs);
        assert_eq!(recs[0].values[idx::MISSING + 2], 1.0);
        assert_eq!(recs[1].values[idx::MISSING + 1], 1.0);
        assert_eq!(recs[1].values[idx::MISSING + 2], 0.0);
        assert_eq!(has_previous(&evs), vec![false, false, true]);
    }
}
