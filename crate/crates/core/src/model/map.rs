use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::phoneme::{PhonemeClass, PhonemeInventory};
use super::tag::MapSource;
use crate::error::{Error, Result};

pub const SILENCE_CLASS: &str = "sil";
pub const SHORT_PAUSE_CLASS: &str = "sp";
pub const GARBAGE_CLASS: &str = "gar";

/// Size range outside which a map draws a warning.
pub const RECOMMENDED_VISEMES: std::ops::RangeInclusive<usize> = 11..=35;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisemeClass {
    pub id: String,
    pub phonemes: Vec<String>,
}

/// Phoneme-to-viseme map: viseme classes plus the reserved `sil`, `sp` and
/// `gar` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P2VMap {
    designation: Option<MapSource>,
    classes: Vec<VisemeClass>,
    silence: Option<String>,
    short_pause: Option<String>,
    garbage: Vec<String>,
    lookup: HashMap<String, usize>,
}

// Lookup slots past the viseme classes.
const SIL_SLOT: usize = usize::MAX;
const SP_SLOT: usize = usize::MAX - 1;
const GAR_SLOT: usize = usize::MAX - 2;

impl P2VMap {
    /// Assembles a map without checking it; see [`validate_map`].
    pub fn new(
        designation: Option<MapSource>,
        classes: Vec<VisemeClass>,
        silence: Option<String>,
        short_pause: Option<String>,
        garbage: Vec<String>,
    ) -> Self {
        let mut lookup = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            for p in &c.phonemes {
                lookup.entry(p.clone()).or_insert(i);
            }
        }
        for (slot, syms) in [
            (SIL_SLOT, silence.as_slice()),
            (SP_SLOT, short_pause.as_slice()),
            (GAR_SLOT, garbage.as_slice()),
        ] {
            for p in syms {
                lookup.entry(p.clone()).or_insert(slot);
            }
        }
        P2VMap {
            designation,
            classes,
            silence,
            short_pause,
            garbage,
            lookup,
        }
    }

    pub fn designation(&self) -> Option<&MapSource> {
        self.designation.as_ref()
    }

    pub fn with_designation(mut self, designation: MapSource) -> Self {
        self.designation = Some(designation);
        self
    }

    pub fn classes(&self) -> &[VisemeClass] {
        &self.classes
    }

    pub fn viseme_count(&self) -> usize {
        self.classes.len()
    }

    pub fn silence(&self) -> Option<&str> {
        self.silence.as_deref()
    }

    pub fn short_pause(&self) -> Option<&str> {
        self.short_pause.as_deref()
    }

    pub fn garbage(&self) -> &[String] {
        &self.garbage
    }

    /// Class id a phoneme maps to (`v01`, `sil`, `sp`, `gar`, ...).
    pub fn class_of(&self, phoneme: &str) -> Option<&str> {
        self.lookup.get(phoneme).map(|&slot| match slot {
            SIL_SLOT => SILENCE_CLASS,
            SP_SLOT => SHORT_PAUSE_CLASS,
            GAR_SLOT => GARBAGE_CLASS,
            i => self.classes[i].id.as_str(),
        })
    }

    /// Viseme classes as sorted phoneme sets, ignoring ids.
    pub fn partition(&self) -> Vec<Vec<String>> {
        let mut groups: Vec<Vec<String>> = self
            .classes
            .iter()
            .map(|c| {
                let mut g = c.phonemes.clone();
                g.sort();
                g
            })
            .collect();
        groups.sort();
        groups
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let designation = self.designation.as_ref().map_or("-".to_string(), ToString::to_string);
        out.push_str(&format!("# designation: {designation}\n"));
        let mut line = |id: &str, phonemes: &[String]| {
            out.push_str(id);
            out.push('\t');
            out.push_str(&phonemes.join(" "));
            out.push('\n');
        };
        for c in &self.classes {
            line(&c.id, &c.phonemes);
        }
        if let Some(s) = &self.silence {
            line(SILENCE_CLASS, std::slice::from_ref(s));
        }
        if let Some(s) = &self.short_pause {
            line(SHORT_PAUSE_CLASS, std::slice::from_ref(s));
        }
        if !self.garbage.is_empty() {
            line(GARBAGE_CLASS, &self.garbage);
        }
        out
    }

    /// Parses the map file format. Class ids may be written with slashes
    /// (`/v01/`) and `garb` is accepted for the garbage class.
    pub fn parse(text: &str) -> Result<Self> {
        const KIND: &str = "map";
        let mut designation = None;
        let mut classes = Vec::new();
        let (mut silence, mut short_pause, mut garbage) = (None, None, Vec::new());
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("designation:") {
                    let value = value.trim();
                    if value != "-" {
                        designation = Some(value.parse().map_err(|e: Error| Error::parse(KIND, n + 1, e.to_string()))?);
                    }
                }
                continue;
            }
            let mut tokens = line.split_whitespace();
            let id = tokens.next().unwrap_or_default().trim_matches('/').to_string();
            let phonemes: Vec<String> = tokens.map(|t| t.trim_matches('/').to_lowercase()).collect();
            match id.as_str() {
                SILENCE_CLASS | SHORT_PAUSE_CLASS => {
                    let [sym] = phonemes.as_slice() else {
                        return Err(Error::parse(KIND, n + 1, format!("{id} class takes exactly one phoneme")));
                    };
                    let slot = if id == SILENCE_CLASS { &mut silence } else { &mut short_pause };
                    if slot.replace(sym.clone()).is_some() {
                        return Err(Error::parse(KIND, n + 1, format!("repeated {id} class")));
                    }
                }
                GARBAGE_CLASS | "garb" => garbage.extend(phonemes),
                _ => classes.push(VisemeClass { id, phonemes }),
            }
        }
        Ok(P2VMap::new(designation, classes, silence, short_pause, garbage))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapIssue {
    DuplicateMembership { phoneme: String, classes: Vec<String> },
    MixedVowelConsonant { class: String },
    ReservedInViseme { class: String, phoneme: String },
    UnknownSymbol { phoneme: String },
    DuplicateId { id: String },
    EmptyClass { id: String },
    ReservedId { id: String },
    WrongReservedClass { class: String, phoneme: String },
    SizeOutOfRange { visemes: usize },
}

impl fmt::Display for MapIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapIssue::DuplicateMembership { phoneme, classes } => {
                write!(f, "phoneme {phoneme} appears in more than one class: {}", classes.join(", "))
            }
            MapIssue::MixedVowelConsonant { class } => write!(f, "class {class} mixes vowels and consonants"),
            MapIssue::ReservedInViseme { class, phoneme } => {
                write!(f, "class {class} contains silence/pause phoneme {phoneme}")
            }
            MapIssue::UnknownSymbol { phoneme } => write!(f, "phoneme {phoneme} is not in the inventory"),
            MapIssue::DuplicateId { id } => write!(f, "viseme id {id} is used more than once"),
            MapIssue::EmptyClass { id } => write!(f, "viseme {id} is empty"),
            MapIssue::ReservedId { id } => write!(f, "viseme id {id} is reserved"),
            MapIssue::WrongReservedClass { class, phoneme } => {
                write!(f, "reserved class {class} holds {phoneme}, which has a different phoneme class")
            }
            MapIssue::SizeOutOfRange { visemes } => write!(
                f,
                "{visemes} visemes is outside the recommended range {}..={}",
                RECOMMENDED_VISEMES.start(),
                RECOMMENDED_VISEMES.end()
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<MapIssue>,
    pub warnings: Vec<MapIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate_map(map: &P2VMap, inv: &PhonemeInventory) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut membership: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut ids = HashSet::new();

    for c in &map.classes {
        if matches!(c.id.as_str(), SILENCE_CLASS | SHORT_PAUSE_CLASS | GARBAGE_CLASS | "garb") {
            report.errors.push(MapIssue::ReservedId { id: c.id.clone() });
        }
        if !ids.insert(c.id.as_str()) {
            report.errors.push(MapIssue::DuplicateId { id: c.id.clone() });
        }
        if c.phonemes.is_empty() {
            report.errors.push(MapIssue::EmptyClass { id: c.id.clone() });
        }
        let (mut vowel, mut consonant) = (false, false);
        for p in &c.phonemes {
            membership.entry(p).or_default().push(c.id.clone());
            match inv.class_of(p) {
                Some(PhonemeClass::Vowel) => vowel = true,
                Some(PhonemeClass::Consonant) => consonant = true,
                Some(_) => report.errors.push(MapIssue::ReservedInViseme {
                    class: c.id.clone(),
                    phoneme: p.clone(),
                }),
                None => {}
            }
        }
        if vowel && consonant {
            report.errors.push(MapIssue::MixedVowelConsonant { class: c.id.clone() });
        }
    }

    for (class, sym, expected) in [
        (SILENCE_CLASS, &map.silence, PhonemeClass::Silence),
        (SHORT_PAUSE_CLASS, &map.short_pause, PhonemeClass::ShortPause),
    ] {
        if let Some(s) = sym {
            membership.entry(s).or_default().push(class.to_string());
            if inv.class_of(s).is_some_and(|c| c != expected) {
                report.errors.push(MapIssue::WrongReservedClass {
                    class: class.to_string(),
                    phoneme: s.clone(),
                });
            }
        }
    }
    for g in &map.garbage {
        membership.entry(g).or_default().push(GARBAGE_CLASS.to_string());
    }

    for (phoneme, classes) in membership {
        if !inv.contains(phoneme) {
            report.errors.push(MapIssue::UnknownSymbol {
                phoneme: phoneme.to_string(),
            });
        }
        if classes.len() > 1 {
            report.errors.push(MapIssue::DuplicateMembership {
                phoneme: phoneme.to_string(),
                classes,
            });
        }
    }

    if !RECOMMENDED_VISEMES.contains(&map.viseme_count()) {
        report.warnings.push(MapIssue::SizeOutOfRange {
            visemes: map.viseme_count(),
        });
    }
    report
}
