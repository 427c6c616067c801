//! Pronunciation dictionaries in the `WORD ph1 ph2 ...` layout used by BEEP
//! and HTK-style lexicons.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::PhonemeInventory;

pub type Pronunciation = Vec<String>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PronunciationDictionary {
    entries: BTreeMap<String, Vec<Pronunciation>>,
    // Silence and short-pause phones seen while parsing.
    reserved: BTreeSet<String>,
}

impl PronunciationDictionary {
    /// Parses dictionary text, checking every phone against `inv`.
    ///
    /// Words are uppercased, phones lowercased. Repeated words add variants
    /// in file order. Lines starting with `#` are comments, and bracketed
    /// output-symbol fields such as `[HELLO]` are skipped.
    pub fn parse(text: &str, inv: &PhonemeInventory) -> Result<Self> {
        let mut entries: BTreeMap<String, Vec<Pronunciation>> = BTreeMap::new();
        let mut reserved = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let word = tokens.next().unwrap_or_default().to_uppercase();
            let mut pron = Vec::new();
            for tok in tokens {
                if tok.starts_with('[') && tok.ends_with(']') {
                    continue;
                }
                let phone = tok.to_lowercase();
                match inv.class_of(&phone) {
                    None => return Err(Error::UnknownPhoneme { phoneme: phone, line: n + 1 }),
                    Some(c) if c.is_reserved() => {
                        reserved.insert(phone.clone());
                    }
                    Some(_) => {}
                }
                pron.push(phone);
            }
            if pron.is_empty() {
                return Err(Error::parse("dictionary", n + 1, format!("{word} has no pronunciation")));
            }
            entries.entry(word).or_default().push(pron);
        }
        Ok(PronunciationDictionary { entries, reserved })
    }

    /// True for silence/short-pause phones, which carry no lexical identity.
    pub fn is_reserved(&self, phone: &str) -> bool {
        self.reserved.contains(phone)
    }

    /// All pronunciation variants of `word`, in file order.
    pub fn phonemize(&self, word: &str) -> Result<&[Pronunciation]> {
        self.entries
            .get(&word.to_uppercase())
            .map(Vec::as_slice)
            .ok_or_else(|| Error::OutOfVocabulary(vec![word.to_string()]))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&word.to_uppercase())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words from `words` that are not in the dictionary, deduplicated in
    /// first-seen order.
    pub fn missing<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for w in words {
            if !self.contains(w) && !out.iter().any(|o| o == w) {
                out.push(w.to_string());
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (word, prons) in &self.entries {
            for p in prons {
                out.push_str(word);
                out.push('\t');
                out.push_str(&p.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

/// Whitespace-separated words, uppercased; lines starting with `#` are
/// comments. Order and repeats are kept.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(str::to_uppercase)
        .collect()
}

/// One line of a transcript file: `utt_id<TAB>word word ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub words: Vec<String>,
}

pub fn parse_transcripts(text: &str) -> Result<Vec<Utterance>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (id, rest) = line.split_once('\t').unwrap_or((line.trim(), ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::parse("transcript", n + 1, "missing utterance id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse("transcript", n + 1, format!("duplicate utterance id {id:?}")));
        }
        out.push(Utterance {
            id: id.to_string(),
            words: rest.split_whitespace().map(str::to_string).collect(),
        });
    }
    Ok(out)
}

pub fn format_transcripts(utts: &[Utterance]) -> String {
    utts.iter()
        .map(|u| format!("{}\t{}\n", u.id, u.words.join(" ")))
        .collect()
}
