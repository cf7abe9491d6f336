//! Core algorithms for bend modeling in guitar tablature.
//!
//! The crate is `no_std` and only needs an allocator. It holds the tablature
//! model with exact rational time, the bend labeling and bend-less
//! simplification, per-event feature extraction, a deterministic CART
//! implementation (plus SMOTE and random forests) and the evaluation
//! protocol. Parsing, file formats and the command line live in the
//! `bendlab` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod rng;

pub mod bendsem;
pub mod evalstats;
pub mod featex;
pub mod learn;
pub mod model;

pub use error::{Error, Result};
pub use rng::{Seed, SeededStream};

pub use bendsem::{Label, LabeledEvent};
pub use featex::{FeatureRecord, FeatureRegistry, NUM_FEATURES};
pub use learn::{DecisionTree, Forest, TreeParams};
pub use model::{
    BendAnnotation, BendKind, BendPoint, KeySignature, Measure, Note, NoteEvent, Pitch, Score,
    TimeSignature, Track, Tuning, QL,
};
