//! Stochastic phoneme recogniser used to drive the analysis pipeline
//! end to end. Outcomes are independent per phoneme; there is no context model.

mod experiment;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{PhonemeClass, PhonemeInventory};

pub use experiment::{
    run_experiment, Experiment, ExperimentConfig, ExperimentReport, SpeakerConfig, TagResult,
};

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Same,
    Substitute(String),
    Delete,
}

/// Explicit substitution `from -> to` with probability `prob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionSpec {
    pub from: String,
    pub to: String,
    pub prob: f64,
}

/// Declarative profile as written in experiment configs. The empty spec is
/// the identity recogniser.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSpec {
    /// Deletion probability for every non-reserved phoneme.
    pub deletion: f64,
    /// Mass spread evenly over the other phonemes of the same class.
    pub spread: f64,
    /// Chance of an inserted phoneme at each boundary.
    pub insertion_rate: f64,
    /// Permit explicit substitutions across the vowel/consonant divide.
    pub allow_cross_class: bool,
    pub substitutions: Vec<SubstitutionSpec>,
    /// Phonemes drawn for insertions; defaults to every non-reserved phoneme.
    pub insertion_pool: Option<Vec<String>>,
}

/// Per-phoneme categorical outcome distributions plus an insertion process.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionProfile {
    outcomes: BTreeMap<String, Vec<(Outcome, f64)>>,
    insertion_rate: f64,
    insertion_pool: Vec<String>,
}

impl ConfusionProfile {
    /// Validates that each distribution is non-negative and sums to 1.
    pub fn new(
        outcomes: BTreeMap<String, Vec<(Outcome, f64)>>,
        insertion_rate: f64,
        insertion_pool: Vec<String>,
    ) -> Result<Self> {
        for (phone, dist) in &outcomes {
            if let Some((o, p)) = dist.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
                return Err(Error::Profile(format!("{phone}: probability {p} for {o:?}")));
            }
            let sum: f64 = dist.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::Profile(format!("{phone}: outcome probabilities sum to {sum}")));
            }
        }
        if !(0.0..=1.0).contains(&insertion_rate) {
            return Err(Error::Profile(format!("insertion rate {insertion_rate} outside [0, 1]")));
        }
        if insertion_rate > 0.0 && insertion_pool.is_empty() {
            return Err(Error::Profile("insertions need a non-empty pool".into()));
        }
        Ok(ConfusionProfile {
            outcomes,
            insertion_rate,
            insertion_pool,
        })
    }

    /// Every inventory phoneme always recognised correctly, no insertions.
    pub fn identity(inv: &PhonemeInventory) -> Self {
        let outcomes = inv
            .iter()
            .map(|l| (l.symbol().to_string(), vec![(Outcome::Same, 1.0)]))
            .collect();
        ConfusionProfile {
            outcomes,
            insertion_rate: 0.0,
            insertion_pool: Vec::new(),
        }
    }

    /// Expands a spec over `inv`. Silence and short pause always pass through.
    pub fn from_spec(spec: &ProfileSpec, inv: &PhonemeInventory) -> Result<Self> {
        for (name, p) in [("deletion", spec.deletion), ("spread", spec.spread)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Profile(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        let mut explicit: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
        for s in &spec.substitutions {
            let (Some(from), Some(to)) = (inv.class_of(&s.from), inv.class_of(&s.to)) else {
                return Err(Error::Profile(format!("substitution {} -> {} uses an unknown phoneme", s.from, s.to)));
            };
            if from.is_reserved() || to.is_reserved() || s.from == s.to {
                return Err(Error::Profile(format!("substitution {} -> {} not allowed", s.from, s.to)));
            }
            if from != to && !spec.allow_cross_class {
                return Err(Error::Profile(format!(
                    "substitution {} -> {} crosses {} and {}",
                    s.from,
                    s.to,
                    from.as_str(),
                    to.as_str()
                )));
            }
            explicit.entry(s.from.as_str()).or_default().push((s.to.as_str(), s.prob));
        }

        let mut outcomes = BTreeMap::new();
        for label in inv.iter() {
            let sym = label.symbol();
            if label.class().is_reserved() {
                outcomes.insert(sym.to_string(), vec![(Outcome::Same, 1.0)]);
                continue;
            }
            let mut targets: BTreeMap<&str, f64> = BTreeMap::new();
            for (to, p) in explicit.get(sym).into_iter().flatten() {
                *targets.entry(to).or_insert(0.0) += p;
            }
            let peers: Vec<&str> = inv
                .iter()
                .filter(|o| o.class() == label.class() && o.symbol() != sym)
                .map(|o| o.symbol())
                .collect();
            // With no same-class peers the spread mass stays on the phoneme.
            let spread = if peers.is_empty() { 0.0 } else { spec.spread };
            for peer in &peers {
                *targets.entry(peer).or_insert(0.0) += spread / peers.len() as f64;
            }
            let moved: f64 = spec.deletion + targets.values().sum::<f64>();
            let same = 1.0 - moved;
            if same < -SUM_TOLERANCE {
                return Err(Error::Profile(format!("{sym}: error mass {moved} exceeds 1")));
            }
            let mut dist = vec![(Outcome::Same, same.max(0.0))];
            dist.extend(targets.into_iter().map(|(t, p)| (Outcome::Substitute(t.to_string()), p)));
            dist.push((Outcome::Delete, spec.deletion));
            dist.retain(|(_, p)| *p > 0.0);
            outcomes.insert(sym.to_string(), dist);
        }

        let pool = match &spec.insertion_pool {
            Some(pool) => {
                for p in pool {
                    match inv.class_of(p) {
                        Some(PhonemeClass::Vowel | PhonemeClass::Consonant) => {}
                        _ => return Err(Error::Profile(format!("insertion pool phoneme {p:?} not usable"))),
                    }
                }
                pool.clone()
            }
            None => inv
                .iter()
                .filter(|l| !l.class().is_reserved())
                .map(|l| l.symbol().to_string())
                .collect(),
        };
        ConfusionProfile::new(outcomes, spec.insertion_rate, pool)
    }

    pub fn outcomes(&self, phoneme: &str) -> Option<&[(Outcome, f64)]> {
        self.outcomes.get(phoneme).map(Vec::as_slice)
    }

    pub fn insertion_rate(&self) -> f64 {
        self.insertion_rate
    }

    fn covers(&self, phoneme: &str) -> bool {
        self.outcomes.contains_key(phoneme)
    }

    fn maybe_insert(&self, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
        if self.insertion_rate > 0.0 && rng.gen::<f64>() < self.insertion_rate {
            let k = rng.gen_range(0..self.insertion_pool.len());
            out.push(self.insertion_pool[k].clone());
        }
    }

    fn emit(&self, phoneme: &str, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
        let dist = &self.outcomes[phoneme];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        // Falls back to the last outcome when rounding leaves `u` past the total.
        let mut chosen = &dist[dist.len() - 1].0;
        for (o, p) in dist {
            acc += p;
            if u < acc {
                chosen = o;
                break;
            }
        }
        match chosen {
            Outcome::Same => out.push(phoneme.to_string()),
            Outcome::Substitute(t) => out.push(t.clone()),
            Outcome::Delete => {}
        }
    }
}

/// Samples one hypothesis per reference transcript. Each phoneme's outcome
/// is drawn independently; an insertion may occur at each of the `len + 1`
/// boundaries of a transcript.
pub fn simulate_recognition<R: AsRef<[S]>, S: AsRef<str>>(
    refs: &[R],
    profile: &ConfusionProfile,
    seed: u64,
) -> Result<Vec<Vec<String>>> {
    for p in refs.iter().flat_map(|r| r.as_ref()) {
        if !profile.covers(p.as_ref()) {
            return Err(Error::Profile(format!("phoneme {:?} not covered by profile", p.as_ref())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(refs
        .iter()
        .map(|r| {
            let r = r.as_ref();
            let mut out = Vec::with_capacity(r.len() + 1);
            for p in r {
                profile.maybe_insert(&mut rng, &mut out);
                profile.emit(p.as_ref(), &mut rng, &mut out);
            }
            profile.maybe_insert(&mut rng, &mut out);
            out
        })
        .collect())
}

/// Derives an independent seed from a master seed and a path of labels.
/// Labels are length-prefixed so distinct paths never collide by concatenation.
pub fn sub_seed(master: u64, path: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for part in path {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhonemeClass::*;
    use crate::scoring::{align, confusions_from_alignments, AlignCosts};

    fn inv() -> PhonemeInventory {
        PhonemeInventory::from_pairs([
            ("b", Consonant),
            ("d", Consonant),
            ("p", Consonant),
            ("iy", Vowel),
            ("ey", Vowel),
            ("sil", Silence),
        ])
        .unwrap()
    }

    fn refs() -> Vec<Vec<String>> {
        ["sil b iy sil", "d iy", "p ey b", "b b d"]
            .iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn identity_profile_copies_refs() {
        let hyps = simulate_recognition(&refs(), &ConfusionProfile::identity(&inv()), 7).unwrap();
        assert_eq!(hyps, refs());
        let spec = ConfusionProfile::from_spec(&ProfileSpec::default(), &inv()).unwrap();
        assert_eq!(simulate_recognition(&refs(), &spec, 7).unwrap(), refs());
    }

    #[test]
    fn certain_substitution_fills_one_cell() {
        let spec = ProfileSpec {
            substitutions: vec![SubstitutionSpec { from: "b".into(), to: "d".into(), prob: 1.0 }],
            ..Default::default()
        };
        let inv = inv();
        let profile = ConfusionProfile::from_spec(&spec, &inv).unwrap();
        let refs = refs();
        let hyps = simulate_recognition(&refs, &profile, 1).unwrap();
        let b_count = refs.iter().flatten().filter(|p| *p == "b").count() as u64;
        let alignments: Vec<_> = refs.iter().zip(&hyps).map(|(r, h)| align(r, h, &AlignCosts::HTK)).collect();
        let tally = confusions_from_alignments(&alignments, &inv).unwrap();
        assert_eq!(tally.matrix.count("b", "d").unwrap(), b_count);
        assert!(tally.matrix.index_of("b").is_some());
        assert_eq!(tally.matrix.col_sum(tally.matrix.index_of("b").unwrap()), 0);
    }

    #[test]
    fn same_seed_same_output() {
        let spec = ProfileSpec { deletion: 0.1, spread: 0.3, insertion_rate: 0.1, ..Default::default() };
        let profile = ConfusionProfile::from_spec(&spec, &inv()).unwrap();
        let a = simulate_recognition(&refs(), &profile, 99).unwrap();
        assert_eq!(a, simulate_recognition(&refs(), &profile, 99).unwrap());
        let others: Vec<_> = (0..8).map(|s| simulate_recognition(&refs(), &profile, s).unwrap()).collect();
        assert!(others.iter().any(|o| *o != a));
    }

    #[test]
    fn uncovered_phoneme_fails() {
        let refs = vec![vec!["zz".to_string()]];
        assert!(matches!(
            simulate_recognition(&refs, &ConfusionProfile::identity(&inv()), 0),
            Err(Error::Profile(_))
        ));
    }

    #[test]
    fn spec_validation() {
        let cross = ProfileSpec {
            substitutions: vec![SubstitutionSpec { from: "b".into(), to: "iy".into(), prob: 0.2 }],
            ..Default::default()
        };
        assert!(ConfusionProfile::from_spec(&cross, &inv()).is_err());
        let allowed = ProfileSpec { allow_cross_class: true, ..cross };
        let p = ConfusionProfile::from_spec(&allowed, &inv()).unwrap();
        assert!(p.outcomes("b").unwrap().contains(&(Outcome::Substitute("iy".into()), 0.2)));
        let heavy = ProfileSpec { deletion: 0.7, spread: 0.5, ..Default::default() };
        assert!(ConfusionProfile::from_spec(&heavy, &inv()).is_err());
        let unknown = ProfileSpec {
            substitutions: vec![SubstitutionSpec { from: "b".into(), to: "q".into(), prob: 0.2 }],
            ..Default::default()
        };
        assert!(ConfusionProfile::from_spec(&unknown, &inv()).is_err());
    }

    #[test]
    fn raw_profiles_must_sum_to_one() {
        let bad = BTreeMap::from([("b".to_string(), vec![(Outcome::Same, 0.5), (Outcome::Delete, 0.4)])]);
        assert!(ConfusionProfile::new(bad, 0.0, vec![]).is_err());
        let ok = BTreeMap::from([("b".to_string(), vec![(Outcome::Same, 0.6), (Outcome::Delete, 0.4)])]);
        assert!(ConfusionProfile::new(ok, 0.0, vec![]).is_ok());
    }

    #[test]
    fn empirical_rates_converge() {
        let spec = ProfileSpec {
            deletion: 0.1,
            substitutions: vec![
                SubstitutionSpec { from: "b".into(), to: "d".into(), prob: 0.25 },
                SubstitutionSpec { from: "b".into(), to: "p".into(), prob: 0.15 },
            ],
            ..Default::default()
        };
        let profile = ConfusionProfile::from_spec(&spec, &inv()).unwrap();
        let refs: Vec<Vec<&str>> = vec![vec!["b"]; 10_000];
        let hyps = simulate_recognition(&refs, &profile, 2024).unwrap();
        let rate = |target: Option<&str>| {
            hyps.iter().filter(|h| h.first().map(String::as_str) == target).count() as f64 / 10_000.0
        };
        assert!((rate(Some("d")) - 0.25).abs() < 0.02);
        assert!((rate(Some("p")) - 0.15).abs() < 0.02);
        assert!((rate(None) - 0.1).abs() < 0.02);
        assert!((rate(Some("b")) - 0.5).abs() < 0.02);
    }

    #[test]
    fn sub_seeds_are_path_sensitive() {
        assert_eq!(sub_seed(1, &["a", "b"]), sub_seed(1, &["a", "b"]));
        assert_ne!(sub_seed(1, &["a", "b"]), sub_seed(2, &["a", "b"]));
        assert_ne!(sub_seed(1, &["ab"]), sub_seed(1, &["a", "b"]));
    }
}
