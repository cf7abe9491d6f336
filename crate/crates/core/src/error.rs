use alloc::string::String;

use crate::bendsem::Label;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("string {string} is outside the tuning (1..=6)")]
    StringOutOfRange { string: u8 },

    #[error("midi pitch {0} is outside 0..=127")]
    PitchOutOfRange(i32),

    #[error("key signature {0} is outside -7..=7 accidentals")]
    KeyOutOfRange(i32),

    #[error("invalid time signature {numerator}/{denominator}")]
    InvalidTimeSignature { numerator: u32, denominator: u32 },

    #[error("offset {offset} lies outside a measure of length {measure_length}")]
    OffsetOutOfMeasure { offset: String, measure_length: String },

    #[error("complex bend needs at least 2 points, got {0}")]
    TooFewBendPoints(usize),

    #[error("invalid complex bend points: {0}")]
    InvalidBendPoints(&'static str),

    #[error("event {event} mixes conflicting bend kinds across its notes")]
    ConflictingBends { event: usize },

    #[error("event at index {event} lies outside every measure")]
    EventOutsideMeasures { event: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("feature vector has {got} values, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} truth labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("class {0} has a single sample; SMOTE needs a neighbor to interpolate toward")]
    SingletonClass(Label),

    #[error("k must be at least 1")]
    InvalidNeighborCount,

    #[error("cannot split without leaking a track: only {0} track(s) available")]
    TooFewTracks(usize),

    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
