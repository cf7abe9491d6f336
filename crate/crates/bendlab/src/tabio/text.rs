//! Line-oriented text format.
//!
//! ```text
//! tab v1
//! title "Example"                 # optional, once
//! track "lead"
//! tuning 64 59 55 50 45 40        # midi, string 1 first
//! ts 4/4
//! key -3
//! | 1.5*1 1.7*1/2 r*1/2 (2.8 3.7)*1 3.9{up:4}*1~
//! | 3.9*1 1.15{cx:0/0,1/2/4,1/0}*3
//! ```
//!
//! `ts`/`key` apply from the next measure on and reset to 4/4 and 0 at every
//! `track`. A line may hold several `|` measures and end with a closing `|`.
//! Every measure must be filled exactly by its events and rests.

use std::fmt::Write as _;

use bendlab_core::model::{Measure, Rational, MAX_FRET, STRINGS};
use bendlab_core::{
    BendAnnotation, BendKind, BendPoint, KeySignature, Note, NoteEvent, Score, TimeSignature, Track, Tuning, QL,
};

use super::{ensure_valid, format_ratio, ParseError, SerializeError};

const STATEMENTS: &str = "`track`, `tuning`, `ts`, `key`, `title` or `|`";

pub fn parse_text(source: &str) -> Result<Score, ParseError> {
    let mut p = Parser {
        score: Score::default(),
        seen_header: false,
        seen_title: false,
        ts: TimeSignature::COMMON,
        key: KeySignature::default(),
    };
    for (i, raw) in source.lines().enumerate() {
        p.line(i + 1, raw)?;
    }
    if !p.seen_header {
        let line = source.lines().count().max(1);
        return Err(ParseError::at(line, 1, "missing header", "`tab v1`"));
    }
    Ok(p.score)
}

struct Parser {
    score: Score,
    seen_header: bool,
    seen_title: bool,
    ts: TimeSignature,
    key: KeySignature,
}

/// Character cursor over one line; columns are 1-based character counts.
struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(line: usize, src: &str) -> Self {
        Cursor {
            line,
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += c.is_some() as usize;
        c
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn err_at(&self, pos: usize, message: impl Into<String>, expected: impl Into<String>) -> ParseError {
        ParseError::at(self.line, pos + 1, message, expected)
    }

    fn err(&self, message: impl Into<String>, expected: impl Into<String>) -> ParseError {
        self.err_at(self.pos, message, expected)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!("unexpected `{c}`"),
            None => "unexpected end of line".to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(self.found(), format!("`{c}`")))
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn uint(&mut self, what: &str) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(self.found(), what.to_string()));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits
            .parse()
            .map_err(|_| self.err_at(start, "number too large", what.to_string()))
    }

    fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        let start = self.pos;
        let neg = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let v = self.uint(what)?;
        let v = i64::try_from(v).map_err(|_| self.err_at(start, "number too large", what.to_string()))?;
        Ok(if neg { -v } else { v })
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string", "closing `\"`")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    _ => return Err(self.err_at(self.pos - 1, "unknown escape", "`\\\"` or `\\\\`")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(self.found(), "end of line"))
        }
    }

    /// Duration `INT ("/" INT)?`, strictly positive.
    fn duration(&mut self) -> Result<QL, ParseError> {
        let start = self.pos;
        let n = self.uint("a duration")?;
        let d = if self.peek() == Some('/') {
            self.pos += 1;
            self.uint("a denominator")?
        } else {
            1
        };
        let (Ok(n), Ok(d)) = (i64::try_from(n), i64::try_from(d)) else {
            return Err(self.err_at(start, "number too large", "a duration"));
        };
        if n == 0 || d == 0 {
            return Err(self.err_at(start, "duration must be positive", "a positive duration"));
        }
        QL::new(n, d).map_err(|_| self.err_at(start, "invalid duration", "a positive duration"))
    }
}

/// Cuts a `#` comment, ignoring `#` inside quoted names.
fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_quote => escaped = true,
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

enum Item {
    Rest(QL),
    Event(Vec<Note>, QL, bool),
}

impl Parser {
    fn line(&mut self, no: usize, raw: &str) -> Result<(), ParseError> {
        let content = strip_comment(raw);
        let mut c = Cursor::new(no, content);
        c.skip_ws();
        if c.at_end() {
            return Ok(());
        }
        if !self.seen_header {
            let start = c.pos;
            let ok = c.word() == "tab" && {
                c.skip_ws();
                c.word() == "v1"
            };
            if !ok {
                return Err(c.err_at(start, "missing header", "`tab v1`"));
            }
            c.end_of_statement()?;
            self.seen_header = true;
            return Ok(());
        }
        if c.peek() == Some('|') {
            return self.measures(&mut c);
        }
        let start = c.pos;
        let keyword = c.word();
        c.skip_ws();
        match keyword.as_str() {
            "title" => {
                if self.seen_title {
                    return Err(c.err_at(start, "duplicate title", "a single `title` statement"));
                }
                self.score.title = c.quoted()?;
                self.seen_title = true;
            }
            "track" => {
                let name = c.quoted()?;
                self.score.tracks.push(Track::new(name));
                self.ts = TimeSignature::COMMON;
                self.key = KeySignature::default();
            }
            "tuning" | "ts" | "key" if self.score.tracks.is_empty() => {
                return Err(c.err_at(start, format!("`{keyword}` before any track"), "`track`"));
            }
            "tuning" => {
                let mut midi = [0i32; STRINGS];
                for (i, m) in midi.iter_mut().enumerate() {
                    if i > 0 {
                        c.skip_ws();
                    }
                    let at = c.pos;
                    let v = c.int("a midi pitch")?;
                    if !(0..=127).contains(&v) {
                        return Err(c.err_at(at, format!("midi pitch {v} out of range"), "0..=127"));
                    }
                    *m = v as i32;
                }
                let tuning = Tuning::from_midi(midi).expect("range checked");
                if !tuning.is_strictly_descending() {
                    return Err(c.err_at(start, "tuning must strictly descend from string 1 to 6", "six descending pitches"));
                }
                self.score.tracks.last_mut().expect("checked").tuning = tuning;
            }
            "ts" => {
                let at = c.pos;
                let n = c.uint("a numerator")?;
                c.expect('/')?;
                let d = c.uint("a denominator")?;
                self.ts = u32::try_from(n)
                    .ok()
                    .zip(u32::try_from(d).ok())
                    .and_then(|(n, d)| TimeSignature::new(n, d).ok())
                    .ok_or_else(|| {
                        c.err_at(at, format!("invalid time signature {n}/{d}"), "1..=64 over a power of two up to 64")
                    })?;
            }
            "key" => {
                let at = c.pos;
                let v = c.int("an accidental count")?;
                self.key = i32::try_from(v)
                    .ok()
                    .and_then(|v| KeySignature::new(v).ok())
                    .ok_or_else(|| c.err_at(at, format!("key {v} out of range"), "-7..=7"))?;
            }
            "" => return Err(c.err_at(start, c.found(), STATEMENTS)),
            other => return Err(c.err_at(start, format!("unknown statement `{other}`"), STATEMENTS)),
        }
        c.end_of_statement()
    }

    fn measures(&mut self, c: &mut Cursor) -> Result<(), ParseError> {
        if self.score.tracks.is_empty() {
            return Err(c.err("measure before any track", "`track`"));
        }
        let mut first = true;
        while c.peek() == Some('|') {
            let bar = c.pos;
            c.pos += 1;
            c.skip_ws();
            if c.at_end() && !first {
                break; // closing bar
            }
            first = false;
            let (ts, key) = (self.ts, self.key);
            let track = self.score.tracks.last_mut().expect("checked");
            let index = track.measures.len() + 1;
            let measure = *track.push_measure(ts, key);
            let mut cursor = measure.start;
            let mut items = Vec::new();
            while !c.at_end() && c.peek() != Some('|') {
                let at = c.pos;
                let item = parse_item(c)?;
                let dur = match &item {
                    Item::Rest(d) | Item::Event(_, d, _) => *d,
                };
                if cursor + dur > measure.end() {
                    return Err(c.err_at(
                        at,
                        format!(
                            "measure {index} is over-full: {} exceeds {}",
                            cursor - measure.start + dur,
                            measure.length()
                        ),
                        format!("items totalling {}", measure.length()),
                    ));
                }
                items.push((cursor, item));
                cursor += dur;
                if !c.at_end() && c.peek() != Some('|') {
                    if !c.peek().is_some_and(char::is_whitespace) {
                        return Err(c.err(c.found(), "whitespace between items"));
                    }
                    c.skip_ws();
                }
            }
            if cursor < measure.end() {
                return Err(c.err_at(
                    bar,
                    format!(
                        "measure {index} is under-full: {} of {}",
                        cursor - measure.start,
                        measure.length()
                    ),
                    "explicit rests (`r*d`) to fill the measure",
                ));
            }
            push_items(track, items);
        }
        if !c.at_end() {
            return Err(c.err(c.found(), "`|`"));
        }
        Ok(())
    }
}

fn push_items(track: &mut Track, items: Vec<(QL, Item)>) {
    for (onset, item) in items {
        if let Item::Event(notes, duration, tied) = item {
            let mut ev = NoteEvent::new(onset, duration, notes);
            ev.tied_to_next = tied;
            track.events.push(ev);
        }
    }
}

fn parse_item(c: &mut Cursor) -> Result<Item, ParseError> {
    match c.peek() {
        Some('r') => {
            c.pos += 1;
            c.expect('*')?;
            Ok(Item::Rest(c.duration()?))
        }
        Some('(') => {
            let open = c.pos;
            c.pos += 1;
            c.skip_ws();
            let mut notes = Vec::new();
            while c.peek() != Some(')') {
                if !notes.is_empty() {
                    if !c.peek().is_some_and(char::is_whitespace) && c.peek().is_some() {
                        return Err(c.err(c.found(), "whitespace between chord notes"));
                    }
                    c.skip_ws();
                    if c.peek() == Some(')') {
                        break;
                    }
                }
                if c.at_end() {
                    return Err(c.err("unterminated chord", "`)`"));
                }
                let at = c.pos;
                let note = parse_note(c)?;
                if notes.iter().any(|n: &Note| n.string == note.string) {
                    return Err(c.err_at(at, format!("string {} used twice in a chord", note.string), "distinct strings"));
                }
                notes.push(note);
            }
            c.pos += 1;
            if notes.len() < 2 {
                return Err(c.err_at(open, "a chord needs at least two notes", "two or more notes"));
            }
            event_tail(c, notes)
        }
        Some(d) if d.is_ascii_digit() => {
            let note = parse_note(c)?;
            event_tail(c, vec![note])
        }
        _ => Err(c.err(c.found(), "a note, a chord `(...)` or a rest `r*d`")),
    }
}

fn event_tail(c: &mut Cursor, notes: Vec<Note>) -> Result<Item, ParseError> {
    c.expect('*')?;
    let dur = c.duration()?;
    let tied = c.peek() == Some('~');
    c.pos += tied as usize;
    Ok(Item::Event(notes, dur, tied))
}

fn parse_note(c: &mut Cursor) -> Result<Note, ParseError> {
    let at = c.pos;
    let string = c.uint("a string number")?;
    if !(1..=STRINGS as u64).contains(&string) {
        return Err(c.err_at(at, format!("string {string} out of range"), "a string number 1..=6"));
    }
    c.expect('.')?;
    let fret_at = c.pos;
    let fret = c.uint("a fret number")?;
    if fret > MAX_FRET as u64 {
        return Err(c.err_at(fret_at, format!("fret {fret} out of range"), "a fret 0..=30"));
    }
    let bend = if c.peek() == Some('{') { Some(parse_bend(c)?) } else { None };
    Ok(Note {
        string: string as u8,
        fret: fret as u8,
        bend,
    })
}

fn parse_bend(c: &mut Cursor) -> Result<BendAnnotation, ParseError> {
    let open = c.pos;
    c.expect('{')?;
    let kind_at = c.pos;
    let kind = match c.word().as_str() {
        "up" => BendKind::Basic,
        "held" => BendKind::Held,
        "rel" => BendKind::Reverse,
        "ud" => BendKind::UpDown,
        "cx" => BendKind::Complex,
        other => {
            return Err(c.err_at(kind_at, format!("unknown bend kind `{other}`"), "`up`, `held`, `rel`, `ud` or `cx`"))
        }
    };
    let bend = if kind == BendKind::Complex {
        c.expect(':')?;
        let mut points = Vec::new();
        loop {
            points.push(parse_point(c)?);
            if c.peek() != Some(',') {
                break;
            }
            c.pos += 1;
        }
        BendAnnotation::complex(points)
    } else if c.peek() == Some(':') {
        c.pos += 1;
        let at = c.pos;
        let amp = c.uint("an amplitude in quarter tones")?;
        let amp = u32::try_from(amp)
            .ok()
            .filter(|&a| a >= 1)
            .ok_or_else(|| c.err_at(at, "bend amplitude must be at least 1", "a positive amplitude"))?;
        BendAnnotation::simple(kind, amp)
    } else {
        BendAnnotation::simple(kind, BendAnnotation::FULL)
    };
    c.expect('}')?;
    bend.check().map_err(|why| c.err_at(open, why, "a valid bend"))?;
    Ok(bend)
}

/// `frac "/" offset` where frac is `INT` or `INT/INT`.
fn parse_point(c: &mut Cursor) -> Result<BendPoint, ParseError> {
    let at = c.pos;
    let mut nums = vec![c.uint("a bend point")?];
    while c.peek() == Some('/') && nums.len() < 3 {
        c.pos += 1;
        nums.push(c.uint("a number")?);
    }
    let bad = |c: &Cursor, why: &str| c.err_at(at, why.to_string(), "`time/offset` or `p/q/offset`");
    let (num, den, off) = match nums[..] {
        [t, o] => (t, 1, o),
        [p, q, o] => (p, q, o),
        _ => return Err(bad(c, "incomplete bend point")),
    };
    if den == 0 {
        return Err(bad(c, "zero denominator"));
    }
    let (Ok(num), Ok(den), Ok(off)) = (i64::try_from(num), i64::try_from(den), u32::try_from(off)) else {
        return Err(bad(c, "number too large"));
    };
    let time = Rational::new(num, den);
    if time > Rational::from_integer(1) {
        return Err(bad(c, "bend point time beyond the note"));
    }
    Ok(BendPoint::new(time, off))
}

/// Canonical text; fails when the score is invalid or an event crosses a
/// barline (the text format has no way to write it).
pub fn serialize_text(score: &Score) -> Result<String, SerializeError> {
    ensure_valid(score)?;
    let mut out = String::from("tab v1\n");
    if !score.title.is_empty() {
        writeln!(out, "title {}", quote(&score.title)).unwrap();
    }
    for track in &score.tracks {
        writeln!(out, "track {}", quote(&track.name)).unwrap();
        let t: Vec<String> = track.tuning.open_pitches().iter().map(|p| p.midi().to_string()).collect();
        writeln!(out, "tuning {}", t.join(" ")).unwrap();
        let mut next = 0;
        let mut prev: Option<&Measure> = None;
        for (mi, m) in track.measures.iter().enumerate() {
            if prev.is_none_or(|p| p.time_sig != m.time_sig) {
                writeln!(out, "ts {}/{}", m.time_sig.numerator, m.time_sig.denominator).unwrap();
            }
            if prev.is_none_or(|p| p.key_sig != m.key_sig) {
                writeln!(out, "key {}", m.key_sig.accidentals()).unwrap();
            }
            prev = Some(m);
            let mut items = Vec::new();
            let mut cursor = m.start;
            while next < track.events.len() && track.events[next].onset < m.end() {
                let ev = &track.events[next];
                if ev.end() > m.end() {
                    return Err(SerializeError(format!(
                        "track \"{}\", measure {}: event {} crosses the barline",
                        track.name,
                        mi + 1,
                        next + 1
                    )));
                }
                if ev.onset > cursor {
                    items.push(format!("r*{}", ev.onset - cursor));
                }
                items.push(event_token(ev));
                cursor = ev.end();
                next += 1;
            }
            if cursor < m.end() {
                items.push(format!("r*{}", m.end() - cursor));
            }
            writeln!(out, "| {}", items.join(" ")).unwrap();
        }
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

fn event_token(ev: &NoteEvent) -> String {
    let notes: Vec<String> = ev.notes.iter().map(note_token).collect();
    let atoms = if notes.len() == 1 {
        notes.into_iter().next().unwrap()
    } else {
        format!("({})", notes.join(" "))
    };
    format!("{atoms}*{}{}", ev.duration, if ev.tied_to_next { "~" } else { "" })
}

fn note_token(n: &Note) -> String {
    let mut s = format!("{}.{}", n.string, n.fret);
    if let Some(b) = &n.bend {
        let kind = match b.kind {
            BendKind::Basic => "up",
            BendKind::Held => "held",
            BendKind::Reverse => "rel",
            BendKind::UpDown => "ud",
            BendKind::Complex => "cx",
        };
        if b.kind == BendKind::Complex {
            let pts: Vec<String> = b
                .points
                .iter()
                .map(|p| format!("{}/{}", format_ratio(p.time), p.offset_qt))
                .collect();
            write!(s, "{{cx:{}}}", pts.join(",")).unwrap();
        } else {
            write!(s, "{{{kind}:{}}}", b.amplitude_qt).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabio::Location;

    fn q(n: i64, d: i64) -> QL {
        QL::new(n, d).unwrap()
    }

    fn pos(e: &ParseError) -> (usize, usize) {
        match e.location {
            Location::Text { line, column } => (line, column),
            _ => panic!("text error without position"),
        }
    }

    #[test]
    fn four_quarter_notes() {
        let s = parse_text("tab v1\ntrack \"t\"\nts 4/4\nkey 0\n| 1.5*1 1.7*1 1.5*1 1.7*1").unwrap();
        assert_eq!(s.tracks.len(), 1);
        let onsets: Vec<QL> = s.tracks[0].events.iter().map(|e| e.onset).collect();
        assert_eq!(onsets, vec![q(0, 1), q(1, 1), q(2, 1), q(3, 1)]);
    }

    #[test]
    fn basic_bend_token() {
        let s = parse_text("tab v1\ntrack \"t\"\nts 1/8\n| 1.15{up:4}*1/2").unwrap();
        let ev = &s.tracks[0].events;
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].notes[0].string, ev[0].notes[0].fret), (1, 15));
        assert_eq!(ev[0].notes[0].bend, Some(BendAnnotation::simple(BendKind::Basic, 4)));
        let s = parse_text("tab v1\ntrack \"t\"\nts 1/8\n| 1.15{up}*1/2").unwrap();
        assert_eq!(s.tracks[0].events[0].notes[0].bend.as_ref().unwrap().amplitude_qt, 4);
    }

    #[test]
    fn over_full_measure() {
        let e = parse_text("tab v1\ntrack \"t\"\nts 2/4\n| 1.5*3").unwrap_err();
        assert!(e.message.contains("over-full"), "{e}");
        assert!(e.message.contains("measure 1"));
        assert_eq!(pos(&e), (4, 3));
    }

    #[test]
    fn under_full_measure() {
        let e = parse_text("tab v1\ntrack \"t\"\n| 1.5*1\n").unwrap_err();
        assert!(e.message.contains("under-full"), "{e}");
        assert_eq!(pos(&e), (3, 1));
    }

    #[test]
    fn error_positions() {
        let e = parse_text("tab v1\ntrack \"t\"\n| 1.5*1 7.2*3").unwrap_err();
        assert_eq!(pos(&e), (3, 9));
        let e = parse_text("tab v1\ntrack \"t\"\n| 1.5{wobble}*4").unwrap_err();
        assert_eq!(pos(&e), (3, 7));
        let e = parse_text("track \"t\"").unwrap_err();
        assert_eq!((pos(&e), e.expected.as_str()), ((1, 1), "`tab v1`"));
        let e = parse_text("tab v1\nbogus 3").unwrap_err();
        assert!(e.message.contains("bogus"));
        let e = parse_text("tab v1\ntrack \"t\"\n| (1.5 1.7)*4").unwrap_err();
        assert!(e.message.contains("twice"));
        assert_eq!(pos(&e), (3, 8));
    }

    #[test]
    fn rests_chords_ties_and_signature_changes() {
        let src = "# leading comment\ntab v1\ntitle \"A # B\"\ntrack \"x\" # name\ntuning 64 59 55 50 45 38\nts 3/4\nkey -2\n\
                   | r*1/2 (2.8 3.7{held:3})*1/2~ 2.8*2 | 1.1{rel}*3 |\nts 6/8\n| 3.5{ud:2}*3\n";
        let s = parse_text(src).unwrap();
        assert_eq!(s.title, "A # B");
        let t = &s.tracks[0];
        assert_eq!(t.measures.len(), 3);
        assert_eq!(t.measures[2].time_sig, TimeSignature::new(6, 8).unwrap());
        assert_eq!(t.measures[0].key_sig.accidentals(), -2);
        assert_eq!(t.events.len(), 4);
        assert_eq!(t.events[0].onset, q(1, 2));
        assert!(t.events[0].tied_to_next);
        assert_eq!(t.events[3].notes[0].bend.as_ref().unwrap().kind, BendKind::UpDown);
        let out = serialize_text(&s).unwrap();
        assert_eq!(parse_text(&out).unwrap(), s);
        assert_eq!(serialize_text(&parse_text(&out).unwrap()).unwrap(), out);
        assert!(out.contains("{ud:2}"));
    }

    #[test]
    fn complex_points() {
        let s = parse_text("tab v1\ntrack \"t\"\n| 1.12{cx:0/0,1/2/4,1/0}*4").unwrap();
        let b = s.tracks[0].events[0].notes[0].bend.clone().unwrap();
        assert_eq!(b.kind, BendKind::Complex);
        assert_eq!(b.amplitude_qt, 4);
        assert_eq!(b.points[1], BendPoint::new(Rational::new(1, 2), 4));
        let text = serialize_text(&s).unwrap();
        assert!(text.contains("{cx:0/0,1/2/4,1/0}"), "{text}");
        assert!(parse_text("tab v1\ntrack \"t\"\n| 1.12{cx:0/0,1/2/4}*4").is_err());
    }

    #[test]
    fn canonical_output_shape() {
        let s = parse_text("tab v1\ntrack \"t\"\n|1.5*2/2  r*3 |").unwrap();
        let out = serialize_text(&s).unwrap();
        assert_eq!(out, "tab v1\ntrack \"t\"\ntuning 64 59 55 50 45 40\nts 4/4\nkey 0\n| 1.5*1 r*3\n");
        assert!(out.lines().all(|l| l == l.trim_end()));
    }
}
