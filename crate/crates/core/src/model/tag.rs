use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeakerId(String);

impl SpeakerId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let bad = id.is_empty()
            || id == "all"
            || id == "-"
            || id.starts_with('!')
            || id.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')'));
        if bad {
            return Err(Error::Config(format!("invalid speaker id {id:?}")));
        }
        Ok(SpeakerId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which speakers' confusions a map was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapSource {
    Speaker(SpeakerId),
    AllSpeakers,
    AllBut(SpeakerId),
}

impl MapSource {
    pub fn speaker(&self) -> Option<&SpeakerId> {
        match self {
            MapSource::Speaker(s) | MapSource::AllBut(s) => Some(s),
            MapSource::AllSpeakers => None,
        }
    }
}

impl fmt::Display for MapSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSource::Speaker(s) => write!(f, "{s}"),
            MapSource::AllSpeakers => f.write_str("all"),
            MapSource::AllBut(s) => write!(f, "!{s}"),
        }
    }
}

impl FromStr for MapSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(s);
        if s == "all" {
            Ok(MapSource::AllSpeakers)
        } else if let Some(rest) = s.strip_prefix('!') {
            Ok(MapSource::AllBut(SpeakerId::new(rest)?))
        } else {
            Ok(MapSource::Speaker(SpeakerId::new(s)?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrossingKind {
    /// Same speaker for map, training and test.
    SameSpeaker,
    MultiSpeaker,
    /// Another speaker's map, trained and tested on the test speaker.
    DifferentMap,
    /// Another speaker's map and training data.
    DifferentMapAndData,
    SpeakerIndependent,
    Other,
}

impl CrossingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingKind::SameSpeaker => "SSD",
            CrossingKind::MultiSpeaker => "MS",
            CrossingKind::DifferentMap => "DSD",
            CrossingKind::DifferentMapAndData => "DSD&D",
            CrossingKind::SpeakerIndependent => "SI",
            CrossingKind::Other => "other",
        }
    }
}

impl FromStr for CrossingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SSD" | "SD" => Ok(CrossingKind::SameSpeaker),
            "MS" => Ok(CrossingKind::MultiSpeaker),
            "DSD" => Ok(CrossingKind::DifferentMap),
            "DSD&D" | "DSDD" => Ok(CrossingKind::DifferentMapAndData),
            "SI" => Ok(CrossingKind::SpeakerIndependent),
            other => Err(Error::Config(format!("unknown crossing kind {other:?}"))),
        }
    }
}

/// `M_n(p, q)`: map from source `n`, recogniser trained on speaker `p`,
/// tested on speaker `q`. Text form is `M<n>(<p>,<q>)`, e.g. `M1(2,3)`,
/// `Mall(1,1)` or `M!4(4,4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExperimentTag {
    pub map: MapSource,
    pub train: SpeakerId,
    pub test: SpeakerId,
}

impl ExperimentTag {
    pub fn new(map: MapSource, train: SpeakerId, test: SpeakerId) -> Self {
        ExperimentTag { map, train, test }
    }

    pub fn kind(&self) -> CrossingKind {
        let same_data = self.train == self.test;
        match &self.map {
            MapSource::Speaker(n) if same_data && *n == self.test => CrossingKind::SameSpeaker,
            MapSource::Speaker(_) if same_data => CrossingKind::DifferentMap,
            MapSource::Speaker(n) if *n == self.train => CrossingKind::DifferentMapAndData,
            MapSource::AllSpeakers if same_data => CrossingKind::MultiSpeaker,
            MapSource::AllBut(n) if same_data && *n == self.test => CrossingKind::SpeakerIndependent,
            _ => CrossingKind::Other,
        }
    }

    /// Fails with the first speaker id that is not declared.
    pub fn check_speakers(&self, declared: &[SpeakerId]) -> Result<()> {
        let ids = self.map.speaker().into_iter().chain([&self.train, &self.test]);
        for id in ids {
            if !declared.contains(id) {
                return Err(Error::UnknownSpeaker(id.to_string()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExperimentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}({},{})", self.map, self.train, self.test)
    }
}

impl FromStr for ExperimentTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed experiment tag {s:?}"));
        let body = s.trim().strip_prefix('M').ok_or_else(bad)?;
        let open = body.find('(').ok_or_else(bad)?;
        let args = body[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let (p, q) = args.split_once(',').ok_or_else(bad)?;
        Ok(ExperimentTag {
            map: body[..open].parse()?,
            train: SpeakerId::new(p.trim())?,
            test: SpeakerId::new(q.trim())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(s: &str) -> SpeakerId {
        SpeakerId::new(s).unwrap()
    }

    #[test]
    fn tag_text_form_round_trips() {
        for text in ["M1(2,3)", "Mall(1,1)", "M!4(4,4)", "M[all](2,2)"] {
            let tag: ExperimentTag = text.parse().unwrap();
            let again: ExperimentTag = tag.to_string().parse().unwrap();
            assert_eq!(tag, again);
        }
        assert!("X1(2,3)".parse::<ExperimentTag>().is_err());
        assert!("M1(2)".parse::<ExperimentTag>().is_err());
    }

    #[test]
    fn classifies_crossings() {
        let k = |s: &str| s.parse::<ExperimentTag>().unwrap().kind();
        assert_eq!(k("M1(1,1)"), CrossingKind::SameSpeaker);
        assert_eq!(k("M2(1,1)"), CrossingKind::DifferentMap);
        assert_eq!(k("M2(2,1)"), CrossingKind::DifferentMapAndData);
        assert_eq!(k("Mall(3,3)"), CrossingKind::MultiSpeaker);
        assert_eq!(k("M!3(3,3)"), CrossingKind::SpeakerIndependent);
        assert_eq!(k("M1(2,3)"), CrossingKind::Other);
    }

    #[test]
    fn speaker_checks() {
        let tag: ExperimentTag = "M1(2,3)".parse().unwrap();
        assert!(tag.check_speakers(&[sp("1"), sp("2"), sp("3")]).is_ok());
        assert!(matches!(tag.check_speakers(&[sp("1"), sp("2")]), Err(Error::UnknownSpeaker(s)) if s == "3"));
        assert!(SpeakerId::new("all").is_err());
        assert!(SpeakerId::new("a b").is_err());
    }
}
