//! Tablature domain types: pitches, tunings, exact quarter-length time,
//! signatures, bend annotations, events, measures, tracks and scores.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Sub};

use num_rational::Ratio;

use crate::{Error, Result};

/// Exact rational used for bend point positions and inside [`QL`].
pub type Rational = Ratio<i64>;

/// Highest fret accepted by validation.
pub const MAX_FRET: u8 = 30;

/// Number of strings on the instrument.
pub const STRINGS: usize = 6;

/// MIDI semitone number, A4 = 69.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pitch(u8);

impl Pitch {
    pub fn new(midi: i32) -> Result<Self> {
        if (0..=127).contains(&midi) {
            Ok(Pitch(midi as u8))
        } else {
            Err(Error::PitchOutOfRange(midi))
        }
    }

    pub fn midi(self) -> u8 {
        self.0
    }

    /// Pitch class 0..=11 with C = 0.
    pub fn class(self) -> u8 {
        self.0 % 12
    }
}

/// Open-string pitches, index 0 holding string 1 (the highest-sounding "e").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tuning {
    open: [Pitch; STRINGS],
}

impl Tuning {
    pub const STANDARD: Tuning = Tuning {
        open: [Pitch(64), Pitch(59), Pitch(55), Pitch(50), Pitch(45), Pitch(40)],
    };

    /// Builds a tuning from midi numbers, string 1 first. Ordering is checked
    /// by [`validate_score`], not here, so that malformed input can still be
    /// reported with its position.
    pub fn from_midi(midi: [i32; STRINGS]) -> Result<Self> {
        let mut open = [Pitch(0); STRINGS];
        for (slot, m) in open.iter_mut().zip(midi) {
            *slot = Pitch::new(m)?;
        }
        Ok(Tuning { open })
    }

    pub fn open_pitches(&self) -> &[Pitch; STRINGS] {
        &self.open
    }

    pub fn is_strictly_descending(&self) -> bool {
        self.open.windows(2).all(|w| w[0] > w[1])
    }

    /// Sounding pitch of `fret` on `string` (1-based).
    pub fn pitch_of(&self, string: u8, fret: u8) -> Result<Pitch> {
        if string == 0 || string as usize > STRINGS {
            return Err(Error::StringOutOfRange { string });
        }
        Pitch::new(self.open[string as usize - 1].0 as i32 + fret as i32)
    }
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning::STANDARD
    }
}

/// Free-function form of [`Tuning::pitch_of`].
pub fn pitch_of(tuning: &Tuning, string: u8, fret: u8) -> Result<Pitch> {
    tuning.pitch_of(string, fret)
}

/// Quarter length: a non-negative exact duration or offset in quarter notes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QL(Rational);

impl QL {
    pub const ZERO: QL = QL(Rational::new_raw(0, 1));

    /// `numer / denom` reduced to lowest terms.
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidParameter("zero denominator"));
        }
        Self::from_ratio(Rational::new(numer, denom))
    }

    /// For constants already in lowest terms.
    pub(crate) const fn raw(numer: i64, denom: i64) -> QL {
        QL(Rational::new_raw(numer, denom))
    }

    pub fn from_int(n: i64) -> Self {
        debug_assert!(n >= 0);
        QL(Rational::from_integer(n))
    }

    pub fn from_ratio(r: Rational) -> Result<Self> {
        if r < Rational::from_integer(0) {
            Err(Error::InvalidParameter("negative quarter length"))
        } else {
            Ok(QL(r))
        }
    }

    pub fn ratio(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.numer() == 0
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(self, other: QL) -> Option<QL> {
        if other.0 > self.0 {
            None
        } else {
            Some(QL(self.0 - other.0))
        }
    }

    /// True when `self` is an integer multiple of `step` (`step > 0`).
    pub fn is_multiple_of(self, step: QL) -> bool {
        (self.0 / step.0).is_integer()
    }

    /// Scale by a rational factor in `[0, ∞)`.
    pub fn scale(self, factor: Rational) -> QL {
        QL(self.0 * factor)
    }
}

impl Add for QL {
    type Output = QL;
    fn add(self, rhs: QL) -> QL {
        QL(self.0 + rhs.0)
    }
}

impl AddAssign for QL {
    fn add_assign(&mut self, rhs: QL) {
        self.0 = self.0 + rhs.0;
    }
}

/// Panics in debug builds when the difference would be negative; use
/// [`QL::checked_sub`] when that can happen.
impl Sub for QL {
    type Output = QL;
    fn sub(self, rhs: QL) -> QL {
        debug_assert!(self.0 >= rhs.0, "negative quarter length");
        QL(self.0 - rhs.0)
    }
}

impl Mul<i64> for QL {
    type Output = QL;
    fn mul(self, rhs: i64) -> QL {
        QL(self.0 * rhs)
    }
}

impl core::iter::Sum for QL {
    fn sum<I: Iterator<Item = QL>>(iter: I) -> QL {
        iter.fold(QL::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for QL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for QL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QL({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
}

impl TimeSignature {
    pub const COMMON: TimeSignature = TimeSignature {
        numerator: 4,
        denominator: 4,
    };

    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        let ts = TimeSignature {
            numerator,
            denominator,
        };
        if ts.is_valid() {
            Ok(ts)
        } else {
            Err(Error::InvalidTimeSignature {
                numerator,
                denominator,
            })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.numerator > 0
            && self.numerator <= 64
            && self.denominator.is_power_of_two()
            && self.denominator <= 64
    }

    /// Quarter length of the beat unit (the denominator's note value).
    pub fn beat_unit(&self) -> QL {
        QL(Rational::new(4, self.denominator as i64))
    }

    pub fn measure_length(&self) -> QL {
        self.beat_unit() * self.numerator as i64
    }
}

impl Default for TimeSignature {
    fn default() -> Self {
        TimeSignature::COMMON
    }
}

/// Signed accidental count: positive for sharps, negative for flats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KeySignature(i8);

impl KeySignature {
    pub fn new(accidentals: i32) -> Result<Self> {
        if (-7..=7).contains(&accidentals) {
            Ok(KeySignature(accidentals as i8))
        } else {
            Err(Error::KeyOutOfRange(accidentals))
        }
    }

    pub fn accidentals(self) -> i32 {
        self.0 as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BendKind {
    Basic,
    Held,
    Reverse,
    UpDown,
    Complex,
}

impl BendKind {
    pub const ALL: [BendKind; 5] = [
        BendKind::Basic,
        BendKind::Held,
        BendKind::Reverse,
        BendKind::UpDown,
        BendKind::Complex,
    ];
}

/// One point of a complex bend curve: position inside the event as a fraction
/// of its duration, and pitch offset in quarter tones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BendPoint {
    pub time: Rational,
    pub offset_qt: u32,
}

impl BendPoint {
    pub fn new(time: Rational, offset_qt: u32) -> Self {
        BendPoint { time, offset_qt }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BendAnnotation {
    pub kind: BendKind,
    /// Quarter tones; 4 is a whole tone ("full").
    pub amplitude_qt: u32,
    /// Only populated for [`BendKind::Complex`].
    pub points: Vec<BendPoint>,
}

impl BendAnnotation {
    pub const FULL: u32 = 4;

    pub fn simple(kind: BendKind, amplitude_qt: u32) -> Self {
        debug_assert!(kind != BendKind::Complex);
        BendAnnotation {
            kind,
            amplitude_qt,
            points: Vec::new(),
        }
    }

    /// Complex bend; the amplitude is the largest offset over the points.
    pub fn complex(points: Vec<BendPoint>) -> Self {
        let amplitude_qt = points.iter().map(|p| p.offset_qt).max().unwrap_or(0);
        BendAnnotation {
            kind: BendKind::Complex,
            amplitude_qt,
            points,
        }
    }

    /// Checks the annotation invariants, returning a short reason on failure.
    pub fn check(&self) -> core::result::Result<(), &'static str> {
        if self.amplitude_qt < 1 {
            return Err("bend amplitude must be at least one quarter tone");
        }
        if self.kind == BendKind::Complex {
            check_points(&self.points)?;
            let max = self.points.iter().map(|p| p.offset_qt).max().unwrap_or(0);
            if max != self.amplitude_qt {
                return Err("complex bend amplitude must equal its largest offset");
            }
        } else if !self.points.is_empty() {
            return Err("only complex bends carry points");
        }
        Ok(())
    }
}

pub(crate) fn check_points(points: &[BendPoint]) -> core::result::Result<(), &'static str> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if points.len() < 2 {
        return Err("complex bend needs at least two points");
    }
    if points[0].time != zero {
        return Err("complex bend must start at time 0");
    }
    if points[points.len() - 1].time != one {
        return Err("complex bend must end at time 1");
    }
    if points.windows(2).any(|w| w[0].time >= w[1].time) {
        return Err("complex bend times must be strictly increasing");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Note {
    pub string: u8,
    pub fret: u8,
    pub bend: Option<BendAnnotation>,
}

impl Note {
    pub fn new(string: u8, fret: u8) -> Self {
        Note {
            string,
            fret,
            bend: None,
        }
    }

    pub fn bent(string: u8, fret: u8, bend: BendAnnotation) -> Self {
        Note {
            string,
            fret,
            bend: Some(bend),
        }
    }
}

/// A single note or a chord sounding at one onset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoteEvent {
    pub onset: QL,
    pub duration: QL,
    pub notes: Vec<Note>,
    pub tied_to_next: bool,
}

impl NoteEvent {
    pub fn new(onset: QL, duration: QL, notes: Vec<Note>) -> Self {
        NoteEvent {
            onset,
            duration,
            notes,
            tied_to_next: false,
        }
    }

    pub fn end(&self) -> QL {
        self.onset + self.duration
    }

    pub fn is_bent(&self) -> bool {
        self.notes.iter().any(|n| n.bend.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Measure {
    pub time_sig: TimeSignature,
    pub key_sig: KeySignature,
    pub start: QL,
}

impl Measure {
    pub fn length(&self) -> QL {
        self.time_sig.measure_length()
    }

    pub fn end(&self) -> QL {
        self.start + self.length()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Track {
    pub name: String,
    pub tuning: Tuning,
    pub measures: Vec<Measure>,
    pub events: Vec<NoteEvent>,
}

impl Track {
    pub fn new(name: impl Into<String>) -> Self {
        Track {
            name: name.into(),
            tuning: Tuning::STANDARD,
            measures: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Appends a measure right after the last one.
    pub fn push_measure(&mut self, time_sig: TimeSignature, key_sig: KeySignature) -> &Measure {
        let start = self.end();
        self.measures.push(Measure {
            time_sig,
            key_sig,
            start,
        });
        self.measures.last().expect("just pushed")
    }

    /// End of the last measure.
    pub fn end(&self) -> QL {
        self.measures.last().map(Measure::end).unwrap_or(QL::ZERO)
    }

    /// Index of the measure containing `offset` (half-open `[start, end)`).
    /// Assumes the measures tile the timeline.
    pub fn measure_index_at(&self, offset: QL) -> Option<usize> {
        let idx = self.measures.partition_point(|m| m.start <= offset);
        if idx == 0 {
            return None;
        }
        let m = &self.measures[idx - 1];
        (offset < m.end()).then_some(idx - 1)
    }

    pub fn measure_at(&self, offset: QL) -> Option<&Measure> {
        self.measure_index_at(offset).map(|i| &self.measures[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Score {
    pub title: String,
    pub tracks: Vec<Track>,
}

/// Rule broken by a [`Violation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    TuningOrder,
    TimeSignature,
    MeasureTiling,
    EmptyEvent,
    StringRange,
    FretRange,
    PitchRange,
    DistinctStrings,
    PositiveDuration,
    SortedOnsets,
    NoOverlap,
    InsideMeasure,
    BendShape,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::TuningOrder => "strictly decreasing tuning",
            Rule::TimeSignature => "valid time signature",
            Rule::MeasureTiling => "measures tile the timeline",
            Rule::EmptyEvent => "non-empty event",
            Rule::StringRange => "string within tuning",
            Rule::FretRange => "fret within 0..=30",
            Rule::PitchRange => "pitch within midi range",
            Rule::DistinctStrings => "distinct strings",
            Rule::PositiveDuration => "positive duration",
            Rule::SortedOnsets => "sorted onsets",
            Rule::NoOverlap => "no overlap",
            Rule::InsideMeasure => "event inside a measure",
            Rule::BendShape => "valid bend",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub track: usize,
    pub track_name: String,
    pub measure: Option<usize>,
    pub event: Option<usize>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "track {} \"{}\"", self.track + 1, self.track_name)?;
        if let Some(m) = self.measure {
            write!(f, ", measure {}", m + 1)?;
        }
        if let Some(e) = self.event {
            write!(f, ", event {}", e + 1)?;
        }
        write!(f, ": {} ({})", self.rule, self.detail)
    }
}

/// Checks every structural invariant of the score. An empty list means the
/// score is valid.
pub fn validate_score(score: &Score) -> Vec<Violation> {
    let mut out = Vec::new();
    for (ti, track) in score.tracks.iter().enumerate() {
        validate_track(ti, track, &mut out);
    }
    out
}

fn validate_track(ti: usize, track: &Track, out: &mut Vec<Violation>) {
    let mut push = |measure: Option<usize>, event: Option<usize>, rule: Rule, detail: String| {
        out.push(Violation {
            track: ti,
            track_name: track.name.clone(),
            measure,
            event,
            rule,
            detail,
        })
    };

    if !track.tuning.is_strictly_descending() {
        push(None, None, Rule::TuningOrder, String::from("open pitches must fall from string 1 to 6"));
    }

    let mut expected_start = QL::ZERO;
    let mut tiling_ok = true;
    for (mi, m) in track.measures.iter().enumerate() {
        if !m.time_sig.is_valid() {
            push(
                Some(mi),
                None,
                Rule::TimeSignature,
                format!("{}/{}", m.time_sig.numerator, m.time_sig.denominator),
            );
            tiling_ok = false;
            continue;
        }
        if m.start != expected_start {
            push(
                Some(mi),
                None,
                Rule::MeasureTiling,
                format!("starts at {} instead of {}", m.start, expected_start),
            );
            tiling_ok = false;
        }
        expected_start = m.start + m.length();
    }

    let mut prev_end: Option<QL> = None;
    let mut prev_onset: Option<QL> = None;
    for (ei, ev) in track.events.iter().enumerate() {
        let measure = if tiling_ok { track.measure_index_at(ev.onset) } else { None };
        if tiling_ok && measure.is_none() {
            push(None, Some(ei), Rule::InsideMeasure, format!("onset {} outside the measures", ev.onset));
        } else if tiling_ok && ev.end() > track.end() {
            push(measure, Some(ei), Rule::InsideMeasure, format!("ends at {} after the last measure", ev.end()));
        }
        if ev.duration.is_zero() {
            push(measure, Some(ei), Rule::PositiveDuration, String::from("duration is 0"));
        }
        if ev.notes.is_empty() {
            push(measure, Some(ei), Rule::EmptyEvent, String::from("event has no notes"));
        }
        if let Some(po) = prev_onset {
            if ev.onset <= po {
                push(measure, Some(ei), Rule::SortedOnsets, format!("onset {} not after {}", ev.onset, po));
            }
        }
        if let Some(pe) = prev_end {
            if ev.onset < pe {
                push(measure, Some(ei), Rule::NoOverlap, format!("starts at {} before previous end {}", ev.onset, pe));
            }
        }
        prev_onset = Some(ev.onset);
        prev_end = Some(ev.end());

        let mut seen = [false; STRINGS + 1];
        for note in &ev.notes {
            if note.string == 0 || note.string as usize > STRINGS {
                push(measure, Some(ei), Rule::StringRange, format!("string {}", note.string));
                continue;
            }
            if seen[note.string as usize] {
                push(measure, Some(ei), Rule::DistinctStrings, format!("two notes on string {}", note.string));
            }
            seen[note.string as usize] = true;
            if note.fret > MAX_FRET {
                push(measure, Some(ei), Rule::FretRange, format!("fret {}", note.fret));
            } else if track.tuning.pitch_of(note.string, note.fret).is_err() {
                push(measure, Some(ei), Rule::PitchRange, format!("string {} fret {}", note.string, note.fret));
            }
            if let Some(bend) = &note.bend {
                if let Err(why) = bend.check() {
                    push(measure, Some(ei), Rule::BendShape, String::from(why));
                }
            }
        }
    }
}
