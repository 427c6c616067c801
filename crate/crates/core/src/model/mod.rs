//! Domain types shared by every stage: phoneme inventories, confusion
//! matrices, phoneme-to-viseme maps and experiment designations.

mod map;
mod matrix;
mod phoneme;
mod tag;

pub use map::{
    validate_map, MapIssue, P2VMap, ValidationReport, VisemeClass, GARBAGE_CLASS, RECOMMENDED_VISEMES,
    SHORT_PAUSE_CLASS, SILENCE_CLASS,
};
pub use matrix::{merge_matrices, ConfusionMatrix};
pub use phoneme::{PhonemeClass, PhonemeInventory, PhonemeLabel};
pub use tag::{CrossingKind, ExperimentTag, MapSource, SpeakerId};
