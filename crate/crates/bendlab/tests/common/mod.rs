//! Seeded corpus generator with planted bend rules.
//!
//! Every track is 4/4 and made of single notes on an eighth-note grid. The
//! labels are a deterministic function of observable features:
//!
//! * ↑ iff duration ≥ 1, on beat 1 or 3 (beat strength ≥ 0.5) and arrival
//!   pitch in 69..=75; played as a full bend on string 1.
//! * → iff the previous event has the same arrival pitch: half the ↑ events
//!   are followed by an eighth-note re-pluck of the held bend.
//! * ↓ iff the pitch falls by exactly a whole tone from the previous event:
//!   every ↑ run closes with an eighth-note release.
//!
//! Plain notes never repeat the previous pitch or fall by a whole tone, so
//! the rules are exact.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use bendlab::tabio::serialize_text;
use bendlab_core::*;

const OPEN: [i32; 6] = [64, 59, 55, 50, 45, 40];

pub fn planted_track(rng: &mut SeededStream, name: &str) -> Track {
    let key = KeySignature::new(rng.below(7) as i32 - 3).unwrap();
    let n_measures = 6 + rng.below(6) as i64;
    let mut t = Track::new(name);
    for _ in 0..n_measures {
        t.push_measure(TimeSignature::COMMON, key);
    }
    let end = n_measures * 8; // eighths
    let mut pos = 0i64;
    let mut prev: Option<i32> = None;
    let eighths = |n: i64| QL::new(n, 2).unwrap();
    while pos < end {
        let room = 8 - pos % 8;
        let dur = loop {
            let d = [1, 2, 2, 4][rng.below(4)];
            if d <= room {
                break d;
            }
        };
        let (string, fret, pitch) = loop {
            let s = 1 + rng.below(6);
            let f = rng.below(18) as i32;
            let p = OPEN[s - 1] + f;
            if prev.is_none_or(|q| p != q && p != q - 2) {
                break (s as u8, f as u8, p);
            }
        };
        let up = dur >= 2 && pos % 4 == 0 && (69..=75).contains(&pitch);
        if !up {
            t.events.push(NoteEvent::new(eighths(pos), eighths(dur), vec![Note::new(string, fret)]));
            prev = Some(pitch);
            pos += dur;
            continue;
        }
        let fret = (pitch - 2 - OPEN[0]) as u8;
        let bent = |kind| vec![Note::bent(1, fret, BendAnnotation::simple(kind, 4))];
        t.events.push(NoteEvent::new(eighths(pos), eighths(dur), bent(BendKind::Basic)));
        pos += dur;
        prev = Some(pitch);
        if pos < end && rng.below(2) == 0 {
            t.events.push(NoteEvent::new(eighths(pos), eighths(1), bent(BendKind::Held)));
            pos += 1;
        }
        if pos < end {
            t.events.push(NoteEvent::new(eighths(pos), eighths(1), bent(BendKind::Reverse)));
            pos += 1;
            prev = Some(pitch - 2);
        }
    }
    t
}

/// One single-track score per file.
pub fn planted_corpus(seed: u64, n_tracks: usize) -> Vec<Score> {
    let mut rng = SeededStream::new(seed);
    (0..n_tracks)
        .map(|i| Score {
            title: format!("planted {i}"),
            tracks: vec![planted_track(&mut rng, &format!("track {i}"))],
        })
        .collect()
}

/// Writes the corpus as `song_NNN.tab` files and returns their paths.
pub fn write_corpus(dir: &Path, scores: &[Score]) -> Vec<PathBuf> {
    scores
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = dir.join(format!("song_{i:03}.tab"));
            std::fs::write(&p, serialize_text(s).unwrap()).unwrap();
            p
        })
        .collect()
}

/// Runs the command line in-process, returning (exit code, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["bendlab"];
    full.extend_from_slice(args);
    let code = bendlab::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
