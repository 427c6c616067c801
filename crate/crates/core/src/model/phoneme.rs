use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Articulatory class of a phoneme label.
///
/// Vowels and consonants never share a viseme; silence and short pause
/// are carried through to reserved map classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhonemeClass {
    Vowel,
    Consonant,
    Silence,
    ShortPause,
}

impl PhonemeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PhonemeClass::Vowel => "vowel",
            PhonemeClass::Consonant => "consonant",
            PhonemeClass::Silence => "silence",
            PhonemeClass::ShortPause => "short-pause",
        }
    }

    /// True for silence and short pause.
    pub fn is_reserved(self) -> bool {
        matches!(self, PhonemeClass::Silence | PhonemeClass::ShortPause)
    }
}

impl fmt::Display for PhonemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhonemeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vowel" | "v" => Ok(PhonemeClass::Vowel),
            "consonant" | "c" => Ok(PhonemeClass::Consonant),
            "silence" | "sil" => Ok(PhonemeClass::Silence),
            "short-pause" | "short_pause" | "sp" => Ok(PhonemeClass::ShortPause),
            other => Err(format!("unknown phoneme class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhonemeLabel {
    symbol: String,
    class: PhonemeClass,
}

impl PhonemeLabel {
    pub fn new(symbol: impl Into<String>, class: PhonemeClass) -> Result<Self> {
        let symbol = symbol.into();
        if symbol.is_empty() {
            return Err(Error::InvalidLabel {
                symbol,
                reason: "empty symbol".into(),
            });
        }
        if symbol.chars().any(char::is_whitespace) {
            return Err(Error::InvalidLabel {
                symbol,
                reason: "symbol contains whitespace".into(),
            });
        }
        Ok(PhonemeLabel { symbol, class })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn class(&self) -> PhonemeClass {
        self.class
    }
}

/// Ordered set of phoneme labels with unique symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeInventory {
    entries: Vec<PhonemeLabel>,
    index: HashMap<String, usize>,
}

impl PhonemeInventory {
    pub fn new(entries: impl IntoIterator<Item = PhonemeLabel>) -> Result<Self> {
        let entries: Vec<PhonemeLabel> = entries.into_iter().collect();
        let mut index = HashMap::with_capacity(entries.len());
        let mut silence: Option<&str> = None;
        let mut short_pause: Option<&str> = None;
        for (i, label) in entries.iter().enumerate() {
            if index.insert(label.symbol.clone(), i).is_some() {
                return Err(Error::InvalidLabel {
                    symbol: label.symbol.clone(),
                    reason: "duplicate symbol in inventory".into(),
                });
            }
            let slot = match label.class {
                PhonemeClass::Silence => &mut silence,
                PhonemeClass::ShortPause => &mut short_pause,
                _ => continue,
            };
            if let Some(prev) = slot {
                return Err(Error::InvalidLabel {
                    symbol: label.symbol.clone(),
                    reason: format!("inventory already has a {} label ({prev})", label.class),
                });
            }
            *slot = Some(&label.symbol);
        }
        Ok(PhonemeInventory { entries, index })
    }

    /// Convenience constructor from `(symbol, class)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, PhonemeClass)>) -> Result<Self> {
        let labels = pairs
            .into_iter()
            .map(|(s, c)| PhonemeLabel::new(s, c))
            .collect::<Result<Vec<_>>>()?;
        PhonemeInventory::new(labels)
    }

    pub fn get(&self, symbol: &str) -> Option<&PhonemeLabel> {
        self.index.get(symbol).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn class_of(&self, symbol: &str) -> Option<PhonemeClass> {
        self.get(symbol).map(PhonemeLabel::class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PhonemeLabel> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn silence(&self) -> Option<&PhonemeLabel> {
        self.entries.iter().find(|l| l.class == PhonemeClass::Silence)
    }

    pub fn short_pause(&self) -> Option<&PhonemeLabel> {
        self.entries.iter().find(|l| l.class == PhonemeClass::ShortPause)
    }

    /// Parses `symbol<TAB>class` lines. Blank lines and `#` comments are skipped;
    /// symbols are lowercased.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t').map(str::trim).filter(|f| !f.is_empty());
            let (Some(symbol), Some(class), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::parse("inventory", n + 1, "expected `symbol<TAB>class`"));
            };
            let class: PhonemeClass = class.parse().map_err(|e| Error::parse("inventory", n + 1, e))?;
            labels.push(
                PhonemeLabel::new(symbol.to_lowercase(), class)
                    .map_err(|e| Error::parse("inventory", n + 1, e.to_string()))?,
            );
        }
        PhonemeInventory::new(labels)
    }

    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|l| format!("{}\t{}\n", l.symbol, l.class))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_whitespace_and_empty_symbols() {
        assert!(PhonemeLabel::new("a b", PhonemeClass::Vowel).is_err());
        assert!(PhonemeLabel::new("", PhonemeClass::Vowel).is_err());
        assert!(PhonemeLabel::new("iy", PhonemeClass::Vowel).is_ok());
    }

    #[test]
    fn inventory_rejects_duplicates_and_second_silence() {
        let dup = PhonemeInventory::from_pairs([("b", PhonemeClass::Consonant), ("b", PhonemeClass::Vowel)]);
        assert!(dup.is_err());
        let two_sil =
            PhonemeInventory::from_pairs([("sil", PhonemeClass::Silence), ("h#", PhonemeClass::Silence)]);
        assert!(two_sil.is_err());
    }

    #[test]
    fn parses_tab_separated_inventory() {
        let inv = PhonemeInventory::parse("# BEEP subset\nB\tconsonant\niy\tvowel\n\nsil\tsilence\nsp\tshort-pause\n")
            .unwrap();
        assert_eq!(inv.len(), 4);
        assert_eq!(inv.class_of("b"), Some(PhonemeClass::Consonant));
        assert_eq!(inv.silence().unwrap().symbol(), "sil");
        assert_eq!(inv.short_pause().unwrap().symbol(), "sp");
        assert_eq!(PhonemeInventory::parse(&inv.to_tsv()).unwrap(), inv);
    }

    #[test]
    fn reports_line_of_bad_class() {
        let err = PhonemeInventory::parse("b\tconsonant\nq\tglide\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
