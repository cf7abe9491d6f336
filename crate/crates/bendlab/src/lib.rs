//! Tablature file formats, feature dumps, model files and the `bendlab`
//! command line, built on `bendlab-core`.

pub mod cli;
pub mod dump;
pub mod modelfile;
pub mod pipeline;
pub mod report;
pub mod tabio;
