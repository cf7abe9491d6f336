//! Structured (JSON) score documents, tagged `"bendlab-score/1"`.
//!
//! Rationals are `"p/q"` strings (`"3"` for integers). Measures are given by
//! `measure_count` plus `directives`: each directive sets the time and/or key
//! signature from `measure_index` on; measure 0 defaults to 4/4 and key 0.

use serde::{Deserialize, Serialize};

use bendlab_core::model::Rational;
use bendlab_core::{
    BendAnnotation, BendKind, BendPoint, KeySignature, Note, NoteEvent, Score, TimeSignature, Track, Tuning,
};

use super::{ensure_valid, format_ratio, parse_ql, parse_ratio, ParseError, SerializeError};

pub const SCORE_VERSION: &str = "bendlab-score/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreDoc {
    version: String,
    #[serde(default)]
    title: String,
    tracks: Vec<TrackDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackDoc {
    name: String,
    tuning: [i64; 6],
    measure_count: usize,
    #[serde(default)]
    directives: Vec<DirectiveDoc>,
    #[serde(default)]
    events: Vec<EventDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectiveDoc {
    measure_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    onset: String,
    duration: String,
    #[serde(default)]
    tie: bool,
    notes: Vec<NoteDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteDoc {
    string: u8,
    fret: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bend: Option<BendDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BendDoc {
    kind: String,
    amplitude_qt: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    points: Vec<PointDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    time: String,
    offset_qt: u32,
}

const KINDS: [(&str, BendKind); 5] = [
    ("basic", BendKind::Basic),
    ("held", BendKind::Held),
    ("reverse", BendKind::Reverse),
    ("up_down", BendKind::UpDown),
    ("complex", BendKind::Complex),
];

fn kind_name(kind: BendKind) -> &'static str {
    KINDS.iter().find(|(_, k)| *k == kind).map(|(n, _)| *n).expect("all kinds listed")
}

pub fn serialize_structured(score: &Score) -> Result<String, SerializeError> {
    ensure_valid(score)?;
    let doc = ScoreDoc {
        version: SCORE_VERSION.to_string(),
        title: score.title.clone(),
        tracks: score.tracks.iter().map(track_doc).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| SerializeError(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn track_doc(t: &Track) -> TrackDoc {
    let mut directives = Vec::new();
    for (i, m) in t.measures.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &t.measures[p]);
        let ts = (prev.is_none_or(|p| p.time_sig != m.time_sig))
            .then(|| format!("{}/{}", m.time_sig.numerator, m.time_sig.denominator));
        let key = (prev.is_none_or(|p| p.key_sig != m.key_sig)).then(|| m.key_sig.accidentals() as i64);
        if ts.is_some() || key.is_some() {
            directives.push(DirectiveDoc {
                measure_index: i,
                ts,
                key,
            });
        }
    }
    TrackDoc {
        name: t.name.clone(),
        tuning: (*t.tuning.open_pitches()).map(|p| p.midi() as i64),
        measure_count: t.measures.len(),
        directives,
        events: t
            .events
            .iter()
            .map(|e| EventDoc {
                onset: e.onset.to_string(),
                duration: e.duration.to_string(),
                tie: e.tied_to_next,
                notes: e
                    .notes
                    .iter()
                    .map(|n| NoteDoc {
                        string: n.string,
                        fret: n.fret,
                        bend: n.bend.as_ref().map(|b| BendDoc {
                            kind: kind_name(b.kind).to_string(),
                            amplitude_qt: b.amplitude_qt,
                            points: b
                                .points
                                .iter()
                                .map(|p| PointDoc {
                                    time: format_ratio(p.time),
                                    offset_qt: p.offset_qt,
                                })
                                .collect(),
                        }),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Schema-level parse: types, enums and rationals are checked here; musical
/// invariants are left to `validate_score`.
pub fn parse_structured(source: &str) -> Result<Score, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(source);
    let doc: ScoreDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ParseError::at_path(path, e.inner().to_string(), "")
    })?;
    if doc.version != SCORE_VERSION {
        return Err(ParseError::at_path(
            "version",
            format!("unsupported version \"{}\"", doc.version),
            format!("\"{SCORE_VERSION}\""),
        ));
    }
    let mut score = Score {
        title: doc.title,
        tracks: Vec::with_capacity(doc.tracks.len()),
    };
    for (ti, t) in doc.tracks.into_iter().enumerate() {
        score.tracks.push(track_from(&format!("tracks[{ti}]"), t)?);
    }
    Ok(score)
}

fn track_from(path: &str, t: TrackDoc) -> Result<Track, ParseError> {
    let mut track = Track::new(t.name);
    let mut midi = [0i32; 6];
    for (i, (&m, slot)) in t.tuning.iter().zip(midi.iter_mut()).enumerate() {
        *slot = i32::try_from(m)
            .ok()
            .filter(|v| (0..=127).contains(v))
            .ok_or_else(|| ParseError::at_path(format!("{path}.tuning[{i}]"), format!("midi pitch {m} out of range"), "0..=127"))?;
    }
    track.tuning = Tuning::from_midi(midi).expect("range checked");

    let mut ts = TimeSignature::COMMON;
    let mut key = KeySignature::default();
    let mut directives = t.directives.iter().enumerate().peekable();
    let mut last_index = None;
    for mi in 0..t.measure_count {
        while let Some((di, d)) = directives.next_if(|(_, d)| d.measure_index == mi) {
            let dpath = format!("{path}.directives[{di}]");
            if last_index == Some(mi) {
                return Err(ParseError::at_path(format!("{dpath}.measure_index"), "duplicate directive index", "strictly increasing measure indices"));
            }
            last_index = Some(mi);
            if let Some(s) = &d.ts {
                ts = parse_ts(s).ok_or_else(|| {
                    ParseError::at_path(format!("{dpath}.ts"), format!("invalid time signature \"{s}\""), "\"N/D\" with D a power of two")
                })?;
            }
            if let Some(k) = d.key {
                key = i32::try_from(k)
                    .ok()
                    .and_then(|k| KeySignature::new(k).ok())
                    .ok_or_else(|| ParseError::at_path(format!("{dpath}.key"), format!("key {k} out of range"), "-7..=7"))?;
            }
        }
        track.push_measure(ts, key);
    }
    if let Some((di, d)) = directives.next() {
        return Err(ParseError::at_path(
            format!("{path}.directives[{di}].measure_index"),
            format!("directive index {} is out of order or beyond measure_count {}", d.measure_index, t.measure_count),
            "strictly increasing indices below measure_count",
        ));
    }

    for (ei, e) in t.events.into_iter().enumerate() {
        let epath = format!("{path}.events[{ei}]");
        let onset = parse_ql(&e.onset)
            .ok_or_else(|| ParseError::at_path(format!("{epath}.onset"), format!("invalid rational \"{}\"", e.onset), "\"p/q\""))?;
        let duration = parse_ql(&e.duration).ok_or_else(|| {
            ParseError::at_path(format!("{epath}.duration"), format!("invalid rational \"{}\"", e.duration), "\"p/q\"")
        })?;
        let mut notes = Vec::with_capacity(e.notes.len());
        for (ni, n) in e.notes.into_iter().enumerate() {
            let npath = format!("{epath}.notes[{ni}]");
            let bend = match n.bend {
                None => None,
                Some(b) => Some(bend_from(&format!("{npath}.bend"), b)?),
            };
            notes.push(Note {
                string: n.string,
                fret: n.fret,
                bend,
            });
        }
        let mut ev = NoteEvent::new(onset, duration, notes);
        ev.tied_to_next = e.tie;
        track.events.push(ev);
    }
    Ok(track)
}

fn parse_ts(s: &str) -> Option<TimeSignature> {
    let (n, d) = s.split_once('/')?;
    TimeSignature::new(n.parse().ok()?, d.parse().ok()?).ok()
}

fn bend_from(path: &str, b: BendDoc) -> Result<BendAnnotation, ParseError> {
    let kind = KINDS
        .iter()
        .find(|(n, _)| *n == b.kind)
        .map(|(_, k)| *k)
        .ok_or_else(|| {
            ParseError::at_path(
                format!("{path}.kind"),
                format!("unknown BendKind \"{}\"", b.kind),
                "one of basic, held, reverse, up_down, complex",
            )
        })?;
    let mut points = Vec::with_capacity(b.points.len());
    for (pi, p) in b.points.into_iter().enumerate() {
        let time: Rational = parse_ratio(&p.time).ok_or_else(|| {
            ParseError::at_path(format!("{path}.points[{pi}].time"), format!("invalid rational \"{}\"", p.time), "\"p/q\"")
        })?;
        points.push(BendPoint::new(time, p.offset_qt));
    }
    Ok(BendAnnotation {
        kind,
        amplitude_qt: b.amplitude_qt,
        points,
    })
}
