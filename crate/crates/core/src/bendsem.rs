//! Bend semantics: tie collapsing, the four string-motion labels, and the
//! bend-less simplification in pitch space.
//!
//! Every bend kind maps onto a sequence of labeled segments:
//!
//! | kind     | segments                                  |
//! |----------|-------------------------------------------|
//! | basic    | `↑`                                       |
//! | held     | `→`                                       |
//! | reverse  | `↓`                                       |
//! | up&down  | `↑` then `↓`, each half of the duration   |
//! | complex  | one segment per slope run of the curve    |
//!
//! Each segment becomes its own [`LabeledEvent`]. The arrival pitch of a note
//! is its fretted pitch, plus the bend amplitude (rounded to semitones) while
//! the string is rising or held, and the plain fretted pitch once released.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    check_points, BendAnnotation, BendKind, BendPoint, KeySignature, Note, NoteEvent, Pitch,
    Rational, TimeSignature, Track, QL,
};
use crate::{Error, Result};

/// String-motion label, ordered `∅ < ↑ < → < ↓`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    /// `∅`: the string is not bent.
    None,
    /// `↑`: the string is being bent up.
    Up,
    /// `→`: re-plucked while already bent.
    Held,
    /// `↓`: released from a bent state.
    Down,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::None, Label::Up, Label::Held, Label::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Label::None => "∅",
            Label::Up => "↑",
            Label::Held => "→",
            Label::Down => "↓",
        }
    }

    /// One-letter code used by the feature dump.
    pub fn code(self) -> char {
        match self {
            Label::None => 'N',
            Label::Up => 'U',
            Label::Held => 'H',
            Label::Down => 'D',
        }
    }

    pub fn from_code(c: char) -> Option<Label> {
        match c {
            'N' => Some(Label::None),
            'U' => Some(Label::Up),
            'H' => Some(Label::Held),
            'D' => Some(Label::Down),
            _ => None,
        }
    }

    pub fn is_bend(self) -> bool {
        self != Label::None
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One classification unit: a (possibly split) event with its label and the
/// pitches it actually sounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEvent {
    pub track_id: String,
    /// Ordinal after tie collapsing and bend splitting.
    pub event_index: usize,
    /// Index of the tie-collapsed event this segment came from.
    pub source_event: usize,
    pub onset: QL,
    pub duration: QL,
    pub arrival_pitches: Vec<Pitch>,
    /// `(string, fret)` of each note, for statistics only.
    pub raw_notes: Vec<(u8, u8)>,
    pub label: Label,
    pub measure_offset: QL,
    pub time_sig: TimeSignature,
    pub key_sig: KeySignature,
}

impl LabeledEvent {
    pub fn end(&self) -> QL {
        self.onset + self.duration
    }
}

/// Reason a tie chain was cut short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieWarning {
    pub event: usize,
    pub reason: &'static str,
}

/// Tie-collapsed track plus, for each output event, the index of the input
/// event that started its chain.
#[derive(Debug, Clone)]
pub struct Collapsed {
    pub track: Track,
    pub origins: Vec<usize>,
    pub warnings: Vec<TieWarning>,
}

/// Merges every maximal tie chain into one event carrying the first event's
/// onset, notes and bends, and the summed duration.
pub fn collapse_ties(track: &Track) -> Track {
    collapse_ties_detailed(track).track
}

pub fn collapse_ties_detailed(track: &Track) -> Collapsed {
    let mut events: Vec<NoteEvent> = Vec::with_capacity(track.events.len());
    let mut origins = Vec::with_capacity(track.events.len());
    let mut warnings = Vec::new();
    let mut i = 0;
    while i < track.events.len() {
        let mut merged = track.events[i].clone();
        merged.tied_to_next = false;
        let mut j = i;
        while track.events[j].tied_to_next {
            let Some(next) = track.events.get(j + 1) else {
                warnings.push(TieWarning {
                    event: j,
                    reason: "tie at the end of the track",
                });
                break;
            };
            if next.onset != track.events[j].end() {
                warnings.push(TieWarning {
                    event: j,
                    reason: "tie across a gap",
                });
                break;
            }
            if shape(&track.events[j]) != shape(next) {
                warnings.push(TieWarning {
                    event: j,
                    reason: "tie into a mismatching chord shape",
                });
                break;
            }
            merged.duration += next.duration;
            j += 1;
        }
        events.push(merged);
        origins.push(i);
        i = j + 1;
    }
    Collapsed {
        track: Track {
            name: track.name.clone(),
            tuning: track.tuning,
            measures: track.measures.clone(),
            events,
        },
        origins,
        warnings,
    }
}

fn shape(ev: &NoteEvent) -> Vec<(u8, u8)> {
    let mut s: Vec<(u8, u8)> = ev.notes.iter().map(|n| (n.string, n.fret)).collect();
    s.sort_unstable();
    s
}

/// Quarter tones to whole semitones, halves rounding up.
pub fn round_semitones(amplitude_qt: u32) -> u32 {
    amplitude_qt.div_ceil(2)
}

/// A labeled slice of a bent note: fraction of the event duration, label, and
/// the offset (in quarter tones) the string sounds at while in this slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    frac: Rational,
    label: Label,
    arrival_qt: u32,
}

/// Splits a complex bend curve into labeled segments.
///
/// Point times are first snapped to the nearest eighth of the event (halves
/// round up, the ends stay fixed). Each pair of consecutive points then gives
/// a segment: rising offset ⇒ `↑`, falling ⇒ `↓`, flat and non-zero ⇒ `→`,
/// flat at zero ⇒ `∅`. Adjacent segments with equal labels merge, so the
/// returned fractions sum to one and no two neighbors share a label.
pub fn decompose_complex(points: &[BendPoint]) -> Result<Vec<(Rational, Label)>> {
    Ok(complex_segments(points)?
        .into_iter()
        .map(|s| (s.frac, s.label))
        .collect())
}

fn complex_segments(points: &[BendPoint]) -> Result<Vec<Segment>> {
    if points.len() < 2 {
        return Err(Error::TooFewBendPoints(points.len()));
    }
    check_points(points).map_err(Error::InvalidBendPoints)?;
    let eighth = Rational::new(1, 8);
    let snap = |t: Rational| {
        let steps = (t / eighth + Rational::new(1, 2)).floor();
        steps * eighth
    };
    let mut segments: Vec<Segment> = Vec::new();
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let frac = snap(b.time) - snap(a.time);
        if frac <= Rational::from_integer(0) {
            continue;
        }
        let (label, arrival_qt) = match b.offset_qt.cmp(&a.offset_qt) {
            core::cmp::Ordering::Greater => (Label::Up, b.offset_qt),
            core::cmp::Ordering::Less => (Label::Down, 0),
            core::cmp::Ordering::Equal if a.offset_qt == 0 => (Label::None, 0),
            core::cmp::Ordering::Equal => (Label::Held, a.offset_qt),
        };
        match segments.last_mut() {
            Some(last) if last.label == label => {
                last.frac += frac;
                last.arrival_qt = match label {
                    Label::Up => arrival_qt,
                    _ => last.arrival_qt,
                };
            }
            _ => segments.push(Segment {
                frac,
                label,
                arrival_qt,
            }),
        }
    }
    Ok(segments)
}

fn bend_segments(bend: &BendAnnotation) -> Result<Vec<Segment>> {
    let whole = Rational::from_integer(1);
    let half = Rational::new(1, 2);
    let amp = bend.amplitude_qt;
    Ok(match bend.kind {
        BendKind::Basic => vec![Segment { frac: whole, label: Label::Up, arrival_qt: amp }],
        BendKind::Held => vec![Segment { frac: whole, label: Label::Held, arrival_qt: amp }],
        BendKind::Reverse => vec![Segment { frac: whole, label: Label::Down, arrival_qt: 0 }],
        BendKind::UpDown => vec![
            Segment { frac: half, label: Label::Up, arrival_qt: amp },
            Segment { frac: half, label: Label::Down, arrival_qt: 0 },
        ],
        BendKind::Complex => complex_segments(&bend.points)?,
    })
}

/// Shared segment layout, plus per-segment arrival offsets (quarter tones) per note.
type EventSegments = (Vec<(Rational, Label)>, Vec<Vec<u32>>);

/// Per-note segment lists of one event. The label sequence is shared by all
/// bent notes of a chord; unbent notes keep their fretted pitch throughout.
fn event_segments(ev: &NoteEvent, index: usize) -> Result<EventSegments> {
    let mut layout: Option<Vec<(Rational, Label)>> = None;
    let mut per_note: Vec<Option<Vec<Segment>>> = Vec::with_capacity(ev.notes.len());
    for note in &ev.notes {
        match &note.bend {
            None => per_note.push(None),
            Some(bend) => {
                let segs = bend_segments(bend)?;
                let this: Vec<(Rational, Label)> = segs.iter().map(|s| (s.frac, s.label)).collect();
                match &layout {
                    Some(l) if *l != this => return Err(Error::ConflictingBends { event: index }),
                    Some(_) => {}
                    None => layout = Some(this),
                }
                per_note.push(Some(segs));
            }
        }
    }
    let layout = layout.unwrap_or_else(|| vec![(Rational::from_integer(1), Label::None)]);
    let offsets = (0..layout.len())
        .map(|si| {
            per_note
                .iter()
                .map(|segs| segs.as_ref().map_or(0, |s| s[si].arrival_qt))
                .collect()
        })
        .collect();
    Ok((layout, offsets))
}

/// Labels every event of a tie-collapsed track, splitting up&down and complex
/// bends into consecutive segments, and computes arrival pitches.
pub fn label_events(track: &Track, track_id: &str) -> Result<Vec<LabeledEvent>> {
    let mut out = Vec::with_capacity(track.events.len());
    for (ei, ev) in track.events.iter().enumerate() {
        let (layout, offsets) = event_segments(ev, ei)?;
        let raw_notes: Vec<(u8, u8)> = ev.notes.iter().map(|n| (n.string, n.fret)).collect();
        let fretted: Vec<Pitch> = ev
            .notes
            .iter()
            .map(|n| track.tuning.pitch_of(n.string, n.fret))
            .collect::<Result<_>>()?;
        let mut elapsed = Rational::from_integer(0);
        for ((frac, label), seg_offsets) in layout.into_iter().zip(offsets) {
            let onset = ev.onset + ev.duration.scale(elapsed);
            let duration = ev.duration.scale(frac);
            elapsed += frac;
            let measure = track
                .measure_at(onset)
                .ok_or(Error::EventOutsideMeasures { event: ei })?;
            let arrival_pitches = fretted
                .iter()
                .zip(&seg_offsets)
                .map(|(p, &qt)| Pitch::new(p.midi() as i32 + round_semitones(qt) as i32))
                .collect::<Result<_>>()?;
            out.push(LabeledEvent {
                track_id: String::from(track_id),
                event_index: out.len(),
                source_event: ei,
                onset,
                duration,
                arrival_pitches,
                raw_notes: raw_notes.clone(),
                label,
                measure_offset: onset - measure.start,
                time_sig: measure.time_sig,
                key_sig: measure.key_sig,
            });
        }
    }
    Ok(out)
}

/// Tie collapsing followed by labeling; the usual entry point per track.
pub fn prepare_track(track: &Track, track_id: &str) -> Result<Vec<LabeledEvent>> {
    label_events(&collapse_ties(track), track_id)
}

/// Bend-less rendition of a tie-collapsed track: every bend segment becomes a
/// plain event, and each bent note is re-fretted on its own string so that
/// its fretted pitch equals the arrival pitch. Downstream features never read
/// the current note's string or fret, so this placement carries no
/// information; it only keeps the tablature playable and re-parsable.
pub fn simplify(track: &Track) -> Result<Track> {
    let labeled = label_events(track, &track.name)?;
    let events = labeled
        .iter()
        .map(|le| {
            let notes = le
                .raw_notes
                .iter()
                .zip(&le.arrival_pitches)
                .map(|(&(string, fret), arrival)| {
                    let fretted = track.tuning.pitch_of(string, fret)?;
                    let lift = arrival.midi() - fretted.midi();
                    Ok(Note::new(string, fret.saturating_add(lift)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(NoteEvent::new(le.onset, le.duration, notes))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Track {
        name: track.name.clone(),
        tuning: track.tuning,
        measures: track.measures.clone(),
        events,
    })
}

/// Copy of the track with every bend annotation removed (frets untouched).
pub fn strip_bends(track: &Track) -> (Track, usize) {
    let mut stripped = track.clone();
    let mut removed = 0;
    for ev in &mut stripped.events {
        for n in &mut ev.notes {
            if n.bend.take().is_some() {
                removed += 1;
            }
        }
    }
    (stripped, removed)
}
