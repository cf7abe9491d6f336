//! Tablature interchange: the line-oriented text format and the structured
//! (JSON) format.

mod structured;
mod text;

use std::fmt;
use std::path::Path;

use bendlab_core::model::{validate_score, Rational};
use bendlab_core::{Score, QL};

pub use structured::{parse_structured, serialize_structured, SCORE_VERSION};
pub use text::{parse_text, serialize_text};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// 1-based line and column (in characters).
    Text { line: usize, column: usize },
    /// Path inside a structured document, e.g. `tracks[0].events[3].onset`.
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub location: Location,
    pub message: String,
    /// What the parser would have accepted; empty when not applicable.
    pub expected: String,
}

fn expected_suffix(expected: &str) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {expected})")
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Text { line, column } => write!(f, "line {line}, column {column}"),
            Location::Path(p) if p.is_empty() => f.write_str("document root"),
            Location::Path(p) => write!(f, "at {p}"),
        }
    }
}

impl ParseError {
    pub fn at(line: usize, column: usize, message: impl Into<String>, expected: impl Into<String>) -> Self {
        ParseError {
            location: Location::Text { line, column },
            message: message.into(),
            expected: expected.into(),
        }
    }

    pub fn at_path(path: impl Into<String>, message: impl Into<String>, expected: impl Into<String>) -> Self {
        ParseError {
            location: Location::Path(path.into()),
            message: message.into(),
            expected: expected.into(),
        }
    }
}

/// A score the chosen format cannot encode.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot serialize score: {0}")]
pub struct SerializeError(pub String);

pub(crate) fn ensure_valid(score: &Score) -> Result<(), SerializeError> {
    match validate_score(score).first() {
        None => Ok(()),
        Some(v) => Err(SerializeError(v.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

impl Format {
    /// `.json` files and documents starting with `{` are structured.
    pub fn detect(path: &Path, source: &str) -> Format {
        let json_ext = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json_ext || source.trim_start().starts_with('{') {
            Format::Structured
        } else {
            Format::Text
        }
    }

    pub fn parse(self, source: &str) -> Result<Score, ParseError> {
        match self {
            Format::Text => parse_text(source),
            Format::Structured => parse_structured(source),
        }
    }

    pub fn serialize(self, score: &Score) -> Result<String, SerializeError> {
        match self {
            Format::Text => serialize_text(score),
            Format::Structured => serialize_structured(score),
        }
    }
}

/// `p` or `p/q` with `q > 0`; the result is reduced.
pub(crate) fn parse_ratio(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || !digits(d) {
        return None;
    }
    let n: i64 = n.parse().ok()?;
    let d: i64 = d.parse().ok()?;
    (d > 0).then(|| Rational::new(n, d))
}

pub(crate) fn parse_ql(s: &str) -> Option<QL> {
    parse_ratio(s).and_then(|r| QL::from_ratio(r).ok())
}

pub(crate) fn format_ratio(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
