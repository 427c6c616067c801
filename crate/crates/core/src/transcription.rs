//! Word to viseme transcription and homophene counting.

use std::collections::HashMap;

use crate::dictionary::PronunciationDictionary;
use crate::error::{Error, Result};
use crate::model::{P2VMap, GARBAGE_CLASS, SHORT_PAUSE_CLASS, SILENCE_CLASS};
use crate::union_find::DisjointSets;

/// Maps a phoneme sequence through `map`. Garbage phonemes come out as `gar`.
pub fn phonemes_to_visemes<S: AsRef<str>>(phonemes: &[S], map: &P2VMap) -> Result<Vec<String>> {
    phonemes
        .iter()
        .map(|p| {
            map.class_of(p.as_ref())
                .map(str::to_string)
                .ok_or_else(|| Error::UnmappedPhoneme(p.as_ref().to_string()))
        })
        .collect()
}

/// One viseme sequence per pronunciation variant of `word`.
pub fn word_to_viseme_strings(word: &str, map: &P2VMap, dict: &PronunciationDictionary) -> Result<Vec<Vec<String>>> {
    dict.phonemize(word)?
        .iter()
        .map(|pron| phonemes_to_visemes(pron, map))
        .collect()
}

/// Transcription level for homophene counting.
#[derive(Debug, Clone, Copy)]
pub enum HomopheneLevel<'a> {
    /// Words are tokens; only repeated words collapse.
    Word,
    /// Words collapse when they share a phoneme transcription.
    Phoneme,
    /// Words collapse when they share a viseme transcription under the map.
    Viseme(&'a P2VMap),
}

impl HomopheneLevel<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            HomopheneLevel::Word => "word",
            HomopheneLevel::Phoneme => "phoneme",
            HomopheneLevel::Viseme(_) => "viseme",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomopheneStats {
    /// Total words, `W`.
    pub words: usize,
    /// Visually distinct word classes, `T`.
    pub tokens: usize,
    /// `1 - T/W`.
    pub effect: f64,
}

impl HomopheneStats {
    pub fn from_counts(words: usize, tokens: usize) -> Self {
        HomopheneStats {
            words,
            tokens,
            effect: 1.0 - tokens as f64 / words as f64,
        }
    }
}

/// Counts homophenes over `words` (which may repeat, as in a transcript).
///
/// Two words fall into one token when any of their pronunciation variants
/// share a transcription at the chosen level; the relation is closed
/// transitively. Silence and short-pause symbols are dropped before
/// comparison.
pub fn homophene_stats<S: AsRef<str>>(
    words: &[S],
    level: HomopheneLevel<'_>,
    dict: &PronunciationDictionary,
) -> Result<HomopheneStats> {
    if words.is_empty() {
        return Err(Error::EmptyInput("vocabulary is empty"));
    }
    let missing = dict.missing(words.iter().map(AsRef::as_ref));
    if !missing.is_empty() {
        return Err(Error::OutOfVocabulary(missing));
    }

    let mut sets = DisjointSets::new(words.len());
    let mut first_with: HashMap<Vec<String>, usize> = HashMap::new();
    for (i, word) in words.iter().enumerate() {
        for key in transcription_keys(word.as_ref(), level, dict)? {
            match first_with.get(&key) {
                Some(&j) => {
                    sets.union(i, j);
                }
                None => {
                    first_with.insert(key, i);
                }
            }
        }
    }
    Ok(HomopheneStats::from_counts(words.len(), sets.set_count()))
}

fn transcription_keys(word: &str, level: HomopheneLevel<'_>, dict: &PronunciationDictionary) -> Result<Vec<Vec<String>>> {
    if let HomopheneLevel::Word = level {
        return Ok(vec![vec![word.to_uppercase()]]);
    }
    dict.phonemize(word)?
        .iter()
        .map(|pron| {
            let phones: Vec<&String> = pron.iter().filter(|p| !dict.is_reserved(p)).collect();
            match level {
                HomopheneLevel::Viseme(map) => Ok(phonemes_to_visemes(&phones, map)?
                    .into_iter()
                    .filter(|v| v != SILENCE_CLASS && v != SHORT_PAUSE_CLASS)
                    .collect()),
                _ => Ok(phones.into_iter().cloned().collect()),
            }
        })
        .collect()
}

/// Word, phoneme and viseme rows, in that order.
pub fn homophene_table<S: AsRef<str>>(
    words: &[S],
    map: &P2VMap,
    dict: &PronunciationDictionary,
) -> Result<Vec<(&'static str, HomopheneStats)>> {
    [HomopheneLevel::Word, HomopheneLevel::Phoneme, HomopheneLevel::Viseme(map)]
        .into_iter()
        .map(|level| Ok((level.name(), homophene_stats(words, level, dict)?)))
        .collect()
}

/// CSV `level,W,T,H` with `H` to five decimals.
pub fn format_homophene_csv(rows: &[(&str, HomopheneStats)]) -> String {
    let mut out = String::from("level,W,T,H\n");
    for (level, s) in rows {
        out.push_str(&format!("{level},{},{},{:.5}\n", s.words, s.tokens, s.effect));
    }
    out
}

/// True if the phoneme is one the map sends to the garbage class.
pub fn is_garbage(map: &P2VMap, phoneme: &str) -> bool {
    map.class_of(phoneme) == Some(GARBAGE_CLASS)
}
