//! Phoneme-to-viseme map derivation from phoneme confusions, with the
//! analysis tools around it: homophene counting, recognition scoring,
//! exact signed-rank speaker comparison and weighted ranking tables.

pub mod clustering;
pub mod dictionary;
pub mod error;
pub mod model;
pub mod scoring;
pub mod simulator;
pub mod stats;
pub mod transcription;
mod union_find;

pub use error::{Error, Result};
