use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{simulate_recognition, sub_seed, ConfusionProfile, ProfileSpec};
use crate::clustering::{derive_multi_speaker, derive_speaker_dependent, derive_speaker_independent, ClusterOptions};
use crate::dictionary::{parse_word_list, PronunciationDictionary};
use crate::error::{Error, Result};
use crate::model::{
    merge_matrices, ConfusionMatrix, CrossingKind, ExperimentTag, MapSource, P2VMap, PhonemeInventory, SpeakerId,
    GARBAGE_CLASS, SHORT_PAUSE_CLASS, SILENCE_CLASS,
};
use crate::scoring::{align, fold_summary, AlignCosts, EditCounts, FoldScores};
use crate::stats::{format_wilcoxon_csv, rank_score, rank_table, wilcoxon_exact, RankTable, WilcoxonResult};

const MANIFEST: &str = "manifest.toml";

fn one() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

/// Experiment config, read from TOML. Paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub folds: usize,
    /// Times each vocabulary word is spoken per fold.
    #[serde(default = "one")]
    pub repetitions: usize,
    pub inventory: PathBuf,
    pub dictionary: PathBuf,
    pub vocabulary: PathBuf,
    /// Crossing kinds (`SSD`, `MS`, `DSD`, `DSD&D`, `SI`) or explicit tags
    /// such as `M1(2,3)`. `SSD` and `DSD` always run.
    #[serde(default)]
    pub crossings: Vec<String>,
    #[serde(default = "one_u64")]
    pub threshold: u64,
    #[serde(rename = "speaker")]
    pub speakers: Vec<SpeakerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerConfig {
    pub id: String,
    #[serde(default)]
    pub profile: ProfileSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A validated experiment with all inputs loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    seed: u64,
    folds: usize,
    repetitions: usize,
    options: ClusterOptions,
    inventory: PhonemeInventory,
    dictionary: PronunciationDictionary,
    vocabulary: Vec<String>,
    speakers: Vec<(SpeakerId, ConfusionProfile)>,
    tags: BTreeSet<ExperimentTag>,
}

impl Experiment {
    /// Reads the config and the files it names.
    pub fn load(path: &Path) -> Result<Self> {
        let config = ExperimentConfig::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let inventory = PhonemeInventory::parse(&fs::read_to_string(base.join(&config.inventory))?)?;
        let dictionary = PronunciationDictionary::parse(&fs::read_to_string(base.join(&config.dictionary))?, &inventory)?;
        let vocabulary = parse_word_list(&fs::read_to_string(base.join(&config.vocabulary))?);
        Experiment::new(&config, inventory, dictionary, vocabulary)
    }

    pub fn new(
        config: &ExperimentConfig,
        inventory: PhonemeInventory,
        dictionary: PronunciationDictionary,
        vocabulary: Vec<String>,
    ) -> Result<Self> {
        if config.folds < 2 {
            return Err(Error::InsufficientFolds(config.folds));
        }
        if config.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if config.speakers.is_empty() {
            return Err(Error::Config("no speakers declared".into()));
        }
        if vocabulary.is_empty() {
            return Err(Error::EmptyInput("vocabulary is empty"));
        }
        let missing = dictionary.missing(vocabulary.iter().map(String::as_str));
        if !missing.is_empty() {
            return Err(Error::OutOfVocabulary(missing));
        }
        let mut speakers = Vec::new();
        for s in &config.speakers {
            let id = SpeakerId::new(s.id.as_str())?;
            if speakers.iter().any(|(other, _)| *other == id) {
                return Err(Error::Config(format!("speaker {id} declared twice")));
            }
            let profile = ConfusionProfile::from_spec(&s.profile, &inventory)
                .map_err(|e| Error::Profile(format!("speaker {id}: {e}")))?;
            speakers.push((id, profile));
        }
        let ids: Vec<SpeakerId> = speakers.iter().map(|(id, _)| id.clone()).collect();
        let tags = expand_crossings(&config.crossings, &ids)?;
        Ok(Experiment {
            seed: config.seed,
            folds: config.folds,
            repetitions: config.repetitions,
            options: ClusterOptions::with_threshold(config.threshold),
            inventory,
            dictionary,
            vocabulary: vocabulary.iter().map(|w| w.to_uppercase()).collect(),
            speakers,
            tags,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Every tag that will be run, in report order.
    pub fn tags(&self) -> impl Iterator<Item = &ExperimentTag> {
        self.tags.iter()
    }

    pub fn speakers(&self) -> impl Iterator<Item = &SpeakerId> {
        self.speakers.iter().map(|(id, _)| id)
    }

    fn profile(&self, id: &SpeakerId) -> &ConfusionProfile {
        &self.speakers.iter().find(|(s, _)| s == id).expect("tags are checked against speakers").1
    }
}

fn expand_crossings(crossings: &[String], ids: &[SpeakerId]) -> Result<BTreeSet<ExperimentTag>> {
    let mut tags = BTreeSet::new();
    let kinds = ["SSD", "DSD"].iter().map(|k| k.to_string()).chain(crossings.iter().cloned());
    for entry in kinds {
        let kind = match entry.parse::<CrossingKind>() {
            Ok(kind) => kind,
            Err(_) => {
                let tag: ExperimentTag = entry
                    .parse()
                    .map_err(|_| Error::Config(format!("unknown crossing {entry:?}")))?;
                tag.check_speakers(ids)?;
                tags.insert(tag);
                continue;
            }
        };
        if kind == CrossingKind::SpeakerIndependent && ids.len() < 2 {
            return Err(Error::InsufficientSpeakers(ids.len()));
        }
        for q in ids {
            for p in ids {
                let tag = match kind {
                    CrossingKind::SameSpeaker if p == q => ExperimentTag::new(MapSource::Speaker(q.clone()), q.clone(), q.clone()),
                    CrossingKind::MultiSpeaker if p == q => ExperimentTag::new(MapSource::AllSpeakers, q.clone(), q.clone()),
                    CrossingKind::SpeakerIndependent if p == q => {
                        ExperimentTag::new(MapSource::AllBut(q.clone()), q.clone(), q.clone())
                    }
                    CrossingKind::DifferentMap if p != q => ExperimentTag::new(MapSource::Speaker(p.clone()), q.clone(), q.clone()),
                    CrossingKind::DifferentMapAndData if p != q => {
                        ExperimentTag::new(MapSource::Speaker(p.clone()), p.clone(), q.clone())
                    }
                    _ => continue,
                };
                tags.insert(tag);
            }
        }
    }
    Ok(tags)
}

/// Per-fold word scores for one crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct TagResult {
    pub tag: ExperimentTag,
    pub folds: Vec<EditCounts>,
    pub scores: FoldScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub seed: u64,
    pub folds: usize,
    pub repetitions: usize,
    pub speakers: Vec<SpeakerId>,
    pub maps: BTreeMap<MapSource, P2VMap>,
    pub results: Vec<TagResult>,
    /// Speaker × speaker tests on same-speaker fold correctness.
    pub wilcoxon: Vec<Vec<WilcoxonResult>>,
    /// Rows are test speakers, columns the speaker-dependent maps.
    pub ranks: RankTable,
}

/// Simulates phoneme recognition, derives maps, then decodes the vocabulary
/// through every requested crossing and compares speakers.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport> {
    let prons: Vec<&[String]> = exp
        .vocabulary
        .iter()
        .map(|w| exp.dictionary.phonemize(w).map(|p| p[0].as_slice()))
        .collect::<Result<_>>()?;
    let spoken: Vec<&[String]> = (0..exp.repetitions).flat_map(|_| prons.iter().copied()).collect();

    let mut fold_cms: BTreeMap<SpeakerId, Vec<ConfusionMatrix>> = BTreeMap::new();
    for (id, profile) in &exp.speakers {
        let mut cms = Vec::with_capacity(exp.folds);
        for f in 0..exp.folds {
            let seed = sub_seed(exp.seed, &["train", id.as_str(), &f.to_string()]);
            let hyps = simulate_recognition(&spoken, profile, seed)?;
            cms.push(fold_matrix(&spoken, &hyps, &exp.inventory)?);
        }
        fold_cms.insert(id.clone(), cms);
    }

    let mut maps = BTreeMap::new();
    for source in exp.tags.iter().map(|t| &t.map) {
        if maps.contains_key(source) {
            continue;
        }
        let map = match source {
            MapSource::Speaker(n) => derive_speaker_dependent(n, &fold_cms[n], &exp.inventory, &exp.options)?,
            MapSource::AllSpeakers => {
                let all: Vec<ConfusionMatrix> = fold_cms.values().flatten().cloned().collect();
                derive_multi_speaker(&all, &exp.inventory, &exp.options)?
            }
            MapSource::AllBut(n) => {
                let merged = fold_cms
                    .iter()
                    .map(|(id, cms)| Ok((id.clone(), merge_matrices(cms)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                derive_speaker_independent(&merged, n, &exp.inventory, &exp.options)?
            }
        };
        maps.insert(source.clone(), map);
    }

    let reference_words: Vec<&str> = (0..exp.repetitions)
        .flat_map(|_| exp.vocabulary.iter().map(String::as_str))
        .collect();
    let mut recognised: HashMap<(SpeakerId, SpeakerId, usize), Vec<Vec<String>>> = HashMap::new();
    let mut results = Vec::with_capacity(exp.tags.len());
    for tag in &exp.tags {
        let decoder = Decoder::new(&maps[&tag.map], exp)?;
        let mut folds = Vec::with_capacity(exp.folds);
        for f in 0..exp.folds {
            let key = (tag.train.clone(), tag.test.clone(), f);
            if !recognised.contains_key(&key) {
                recognised.insert(key.clone(), test_recognition(exp, &tag.train, &tag.test, f, &spoken)?);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(exp.seed, &["decode", &tag.to_string(), &f.to_string()]));
            let hyps: Vec<&str> = recognised[&key].iter().map(|h| decoder.decode(h, &mut rng)).collect();
            folds.push(align(&reference_words, &hyps, &AlignCosts::HTK).counts);
        }
        let values = folds.iter().map(EditCounts::correctness).collect::<Result<Vec<_>>>()?;
        results.push(TagResult {
            tag: tag.clone(),
            scores: fold_summary(&values)?,
            folds,
        });
    }

    let speakers: Vec<SpeakerId> = exp.speakers().cloned().collect();
    let lookup = |map: MapSource, q: &SpeakerId| -> &TagResult {
        let tag = ExperimentTag::new(map, q.clone(), q.clone());
        results.iter().find(|r| r.tag == tag).expect("SSD and DSD always run")
    };
    let wilcoxon = speakers
        .iter()
        .map(|a| {
            speakers
                .iter()
                .map(|b| {
                    wilcoxon_exact(
                        &lookup(MapSource::Speaker(a.clone()), a).scores.values,
                        &lookup(MapSource::Speaker(b.clone()), b).scores.values,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = speakers
        .iter()
        .map(|q| {
            let own = &lookup(MapSource::Speaker(q.clone()), q).scores;
            speakers
                .iter()
                .map(|n| rank_score(own, &lookup(MapSource::Speaker(n.clone()), q).scores, n == q))
                .collect()
        })
        .collect();
    let ranks = rank_table(
        speakers.iter().map(ToString::to_string).collect(),
        speakers.iter().map(|n| format!("M{n}")).collect(),
        cells,
    )?;

    Ok(ExperimentReport {
        seed: exp.seed,
        folds: exp.folds,
        repetitions: exp.repetitions,
        speakers,
        maps,
        results,
        wilcoxon,
        ranks,
    })
}

/// Matrix over every phoneme in the references or hypotheses, so phonemes
/// that were always deleted still reach the map (as garbage).
fn fold_matrix(refs: &[&[String]], hyps: &[Vec<String>], inv: &PhonemeInventory) -> Result<ConfusionMatrix> {
    let used: BTreeSet<&str> = refs
        .iter()
        .flat_map(|r| r.iter())
        .chain(hyps.iter().flatten())
        .map(String::as_str)
        .collect();
    let labels = inv.iter().filter(|l| used.contains(l.symbol())).cloned().collect();
    let mut cm = ConfusionMatrix::zeros(labels)?;
    for (r, h) in refs.iter().zip(hyps) {
        for pair in align(r, h, &AlignCosts::HTK).pairs {
            if let (Some(r), Some(h)) = pair {
                cm.add(&r, &h, 1)?;
            }
        }
    }
    Ok(cm)
}

/// Test speaker `q` produces the phonemes; a recogniser trained on another
/// speaker `p` adds `p`'s confusions on top.
fn test_recognition(
    exp: &Experiment,
    train: &SpeakerId,
    test: &SpeakerId,
    fold: usize,
    spoken: &[&[String]],
) -> Result<Vec<Vec<String>>> {
    let f = fold.to_string();
    let own = simulate_recognition(spoken, exp.profile(test), sub_seed(exp.seed, &["test", test.as_str(), &f]))?;
    if train == test {
        return Ok(own);
    }
    let seed = sub_seed(exp.seed, &["adapt", train.as_str(), test.as_str(), &f]);
    simulate_recognition(&own, exp.profile(train), seed)
}

/// Isolated-word decoder: picks the vocabulary word whose viseme string is
/// closest to the hypothesis, breaking ties at random.
struct Decoder<'a> {
    map: &'a P2VMap,
    words: Vec<(&'a str, Vec<Vec<String>>)>,
}

impl<'a> Decoder<'a> {
    fn new(map: &'a P2VMap, exp: &'a Experiment) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut words = Vec::new();
        for w in &exp.vocabulary {
            if !seen.insert(w.as_str()) {
                continue;
            }
            let strings = exp.dictionary.phonemize(w)?.iter().map(|p| visemes(map, p)).collect();
            words.push((w.as_str(), strings));
        }
        Ok(Decoder { map, words })
    }

    fn decode(&self, phones: &[String], rng: &mut ChaCha8Rng) -> &'a str {
        let hyp = visemes(self.map, phones);
        let mut best = u64::MAX;
        let mut tied: Vec<&'a str> = Vec::new();
        for (word, strings) in &self.words {
            let cost = strings
                .iter()
                .map(|s| align(s, &hyp, &AlignCosts::HTK).counts.cost(&AlignCosts::HTK))
                .min()
                .unwrap_or(u64::MAX);
            if cost < best {
                best = cost;
                tied.clear();
            }
            if cost == best {
                tied.push(word);
            }
        }
        if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        }
    }
}

/// Viseme string with silences dropped. Phonemes the map has never seen are
/// read as garbage.
fn visemes(map: &P2VMap, phones: &[String]) -> Vec<String> {
    phones
        .iter()
        .map(|p| map.class_of(p).unwrap_or(GARBAGE_CLASS))
        .filter(|v| *v != SILENCE_CLASS && *v != SHORT_PAUSE_CLASS)
        .map(str::to_string)
        .collect()
}

fn map_file(source: &MapSource) -> String {
    match source {
        MapSource::Speaker(n) => format!("maps/sd_{n}.txt"),
        MapSource::AllSpeakers => "maps/ms.txt".into(),
        MapSource::AllBut(n) => format!("maps/si_{n}.txt"),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    folds: usize,
    repetitions: usize,
    speakers: Vec<&'a str>,
    tags: Vec<String>,
    files: Vec<String>,
}

impl ExperimentReport {
    pub fn result(&self, tag: &ExperimentTag) -> Option<&TagResult> {
        self.results.iter().find(|r| r.tag == *tag)
    }

    /// Report files as `(relative path, contents)`, manifest last.
    pub fn files(&self) -> Result<Vec<(String, String)>> {
        let mut files = Vec::new();

        let mut folds = String::from("tag,kind,fold,N,D,S,I,C\n");
        let mut summary = String::from("tag,kind,folds,mean,stderr\n");
        for r in &self.results {
            let kind = r.tag.kind().as_str();
            for (f, c) in r.folds.iter().enumerate() {
                folds.push_str(&format!(
                    "{},{kind},{},{},{},{},{},{:.6}\n",
                    r.tag,
                    f + 1,
                    c.n,
                    c.deletions,
                    c.substitutions,
                    c.insertions,
                    c.correctness()?
                ));
            }
            summary.push_str(&format!(
                "{},{kind},{},{:.6},{:.6}\n",
                r.tag,
                r.folds.len(),
                r.scores.mean,
                r.scores.stderr
            ));
        }
        files.push(("fold_scores.csv".to_string(), folds));
        files.push(("summary.csv".to_string(), summary));
        for (source, map) in &self.maps {
            files.push((map_file(source), map.to_text()));
        }
        let labels: Vec<String> = self.speakers.iter().map(ToString::to_string).collect();
        let (p, sig) = format_wilcoxon_csv(&labels, &self.wilcoxon);
        files.push(("wilcoxon.csv".to_string(), p));
        files.push(("wilcoxon_sig.csv".to_string(), sig));
        files.push(("ranks.csv".to_string(), self.ranks.to_csv()));

        let manifest = Manifest {
            seed: self.seed,
            folds: self.folds,
            repetitions: self.repetitions,
            speakers: self.speakers.iter().map(SpeakerId::as_str).collect(),
            tags: self.results.iter().map(|r| r.tag.to_string()).collect(),
            files: files.iter().map(|(name, _)| name.clone()).collect(),
        };
        let manifest = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        files.push((MANIFEST.to_string(), manifest));
        Ok(files)
    }

    /// Writes the report into `dir`. The directory is assembled next to the
    /// target and renamed into place, so a failure leaves nothing behind.
    /// An existing `dir` is replaced only if it holds a previous report.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let files = self.files()?;
        if dir.exists() {
            let is_report = dir.join(MANIFEST).is_file();
            let is_empty = dir.is_dir() && fs::read_dir(dir)?.next().is_none();
            if !is_report && !is_empty {
                return Err(Error::Config(format!(
                    "{} exists and is not a report directory",
                    dir.display()
                )));
            }
        }
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let staging = tempfile::Builder::new().prefix(".report-").tempdir_in(&parent)?;
        for (name, contents) in &files {
            let path = staging.path().join(name);
            if let Some(p) = path.parent() {
                fs::create_dir_all(p)?;
            }
            fs::write(path, contents)?;
        }
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        let staged = staging.keep();
        if let Err(e) = fs::rename(&staged, dir) {
            let _ = fs::remove_dir_all(&staged);
            return Err(e.into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhonemeClass::*;
    use crate::simulator::SubstitutionSpec;

    fn inventory() -> PhonemeInventory {
        PhonemeInventory::from_pairs([
            ("b", Consonant),
            ("d", Consonant),
            ("p", Consonant),
            ("k", Consonant),
            ("s", Consonant),
            ("iy", Vowel),
            ("ey", Vowel),
            ("eh", Vowel),
            ("sil", Silence),
        ])
        .unwrap()
    }

    fn dictionary() -> PronunciationDictionary {
        let text = "B b iy\nD d iy\nP p iy\nK k ey\nS eh s\nA ey\nE iy\nBEAD b iy d\n";
        PronunciationDictionary::parse(text, &inventory()).unwrap()
    }

    fn vocabulary() -> Vec<String> {
        ["B", "D", "P", "K", "S", "A", "E", "BEAD"].map(String::from).to_vec()
    }

    fn config(speakers: &[(&str, ProfileSpec)], crossings: &[&str], folds: usize) -> ExperimentConfig {
        ExperimentConfig {
            seed: 11,
            folds,
            repetitions: 2,
            inventory: "inv.tsv".into(),
            dictionary: "dict.txt".into(),
            vocabulary: "words.txt".into(),
            crossings: crossings.iter().map(|c| c.to_string()).collect(),
            threshold: 1,
            speakers: speakers
                .iter()
                .map(|(id, p)| SpeakerConfig { id: id.to_string(), profile: p.clone() })
                .collect(),
        }
    }

    fn experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
        Experiment::new(cfg, inventory(), dictionary(), vocabulary())
    }

    fn noisy() -> ProfileSpec {
        ProfileSpec {
            deletion: 0.05,
            spread: 0.1,
            substitutions: vec![SubstitutionSpec { from: "b".into(), to: "p".into(), prob: 0.3 }],
            ..Default::default()
        }
    }

    #[test]
    fn identity_profiles_score_perfectly() {
        let cfg = config(&[("1", ProfileSpec::default()), ("2", ProfileSpec::default())], &["MS", "SI", "DSD&D"], 3);
        let report = run_experiment(&experiment(&cfg).unwrap()).unwrap();
        assert_eq!(report.results.len(), 2 + 2 + 2 + 2 + 2);
        for r in &report.results {
            assert!(r.scores.values.iter().all(|c| *c == 1.0), "{}", r.tag);
        }
        for map in report.maps.values() {
            assert!(map.classes().iter().all(|c| c.phonemes.len() == 1));
            assert!(map.garbage().is_empty());
        }
        assert!(report.ranks.cells.iter().flatten().all(|v| *v == 0 || *v == 1));
        assert!(report.wilcoxon.iter().flatten().all(|w| w.p_value == 1.0));
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = config(&[("1", noisy()), ("2", ProfileSpec { deletion: 0.2, ..noisy() })], &["MS"], 4);
        let a = run_experiment(&experiment(&cfg).unwrap()).unwrap();
        let b = run_experiment(&experiment(&cfg).unwrap()).unwrap();
        assert_eq!(a.files().unwrap(), b.files().unwrap());
        let c = run_experiment(&experiment(&cfg).unwrap().with_seed(12)).unwrap();
        assert_ne!(a.files().unwrap(), c.files().unwrap());
    }

    #[test]
    fn adding_a_speaker_leaves_existing_draws_alone() {
        let one = config(&[("1", noisy())], &[], 3);
        let two = config(&[("1", noisy()), ("2", ProfileSpec::default())], &[], 3);
        let a = run_experiment(&experiment(&one).unwrap()).unwrap();
        let b = run_experiment(&experiment(&two).unwrap()).unwrap();
        let tag: ExperimentTag = "M1(1,1)".parse().unwrap();
        assert_eq!(a.result(&tag), b.result(&tag));
    }

    #[test]
    fn shared_profile_makes_ssd_and_dsd_indistinguishable() {
        let cfg = config(&[("1", noisy()), ("2", noisy())], &[], 20);
        let report = run_experiment(&experiment(&cfg).unwrap()).unwrap();
        for (own, other) in [("M1(1,1)", "M2(1,1)"), ("M2(2,2)", "M1(2,2)")] {
            let ssd = report.result(&own.parse().unwrap()).unwrap();
            let dsd = report.result(&other.parse().unwrap()).unwrap();
            let w = wilcoxon_exact(&ssd.scores.values, &dsd.scores.values).unwrap();
            assert!(w.p_value > 0.05, "{own} vs {other}: p = {}", w.p_value);
        }
    }

    #[test]
    fn config_errors() {
        let single = config(&[("1", ProfileSpec::default())], &["SI"], 3);
        assert!(matches!(experiment(&single), Err(Error::InsufficientSpeakers(1))));
        let unknown = config(&[("1", ProfileSpec::default())], &["M1(1,9)"], 3);
        assert!(matches!(experiment(&unknown), Err(Error::UnknownSpeaker(s)) if s == "9"));
        let bogus = config(&[("1", ProfileSpec::default())], &["XYZ"], 3);
        assert!(matches!(experiment(&bogus), Err(Error::Config(_))));
        let few = config(&[("1", ProfileSpec::default())], &[], 1);
        assert!(matches!(experiment(&few), Err(Error::InsufficientFolds(1))));
        let dup = config(&[("1", ProfileSpec::default()), ("1", noisy())], &[], 3);
        assert!(matches!(experiment(&dup), Err(Error::Config(_))));
        let cfg = config(&[("1", ProfileSpec::default())], &[], 3);
        let oov = Experiment::new(&cfg, inventory(), dictionary(), vec!["ZED".into()]);
        assert!(matches!(oov, Err(Error::OutOfVocabulary(_))));
    }

    #[test]
    fn toml_config() {
        let text = r#"
            seed = 5
            folds = 3
            inventory = "inv.tsv"
            dictionary = "dict.txt"
            vocabulary = "words.txt"
            crossings = ["MS"]

            [[speaker]]
            id = "1"

            [[speaker]]
            id = "2"
            [speaker.profile]
            deletion = 0.1
            substitutions = [{ from = "b", to = "d", prob = 0.2 }]
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.repetitions, 1);
        assert_eq!(cfg.speakers[1].profile.substitutions[0].to, "d");
        assert!(ExperimentConfig::from_toml("seed = 1\nbogus = 2\n").is_err());
    }

    #[test]
    fn write_to_refuses_foreign_directories() {
        let cfg = config(&[("1", ProfileSpec::default())], &[], 2);
        let report = run_experiment(&experiment(&cfg).unwrap()).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("report");
        report.write_to(&out).unwrap();
        report.write_to(&out).unwrap();
        assert!(out.join("maps/sd_1.txt").is_file());
        let foreign = tmp.path().join("foreign");
        fs::create_dir(&foreign).unwrap();
        fs::write(foreign.join("keep.txt"), "x").unwrap();
        assert!(report.write_to(&foreign).is_err());
        assert!(foreign.join("keep.txt").is_file());
        let leftovers = fs::read_dir(tmp.path()).unwrap().count();
        assert_eq!(leftovers, 2);
    }
}
