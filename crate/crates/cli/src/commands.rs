use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use viseme_core::clustering::{derive_speaker_independent, derive_visemes, ClusterOptions};
use viseme_core::dictionary::{format_transcripts, parse_transcripts, parse_word_list, PronunciationDictionary, Utterance};
use viseme_core::model::{
    merge_matrices, validate_map, ConfusionMatrix, MapSource, P2VMap, PhonemeClass, PhonemeInventory, PhonemeLabel,
    SpeakerId,
};
use viseme_core::scoring::{align, confusions_from_alignments, format_fold_csv, AlignCosts, EditCounts, FoldScores};
use viseme_core::simulator::{run_experiment, Experiment};
use viseme_core::stats::{format_wilcoxon_csv, rank_score, rank_table, wilcoxon_matrix, RankTable};
use viseme_core::transcription::{format_homophene_csv, homophene_table, phonemes_to_visemes};

use crate::args::*;
use crate::io::{data_lines, emit, fields, read};

/// A command line that parsed but cannot be acted on.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Cluster(a) => cluster(a),
        Command::Merge(a) => merge(a),
        Command::Transcribe(a) => transcribe(a),
        Command::Homophenes(a) => homophenes(a),
        Command::Score(a) => score(a),
        Command::Wilcoxon(a) => wilcoxon(a),
        Command::Rank(a) => rank(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
    }
}

fn inventory(path: &Path) -> Result<PhonemeInventory> {
    PhonemeInventory::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn matrix(path: &Path, inv: &PhonemeInventory) -> Result<ConfusionMatrix> {
    ConfusionMatrix::from_csv(&read(path)?, inv).with_context(|| format!("in {}", path.display()))
}

fn map(path: &Path) -> Result<P2VMap> {
    P2VMap::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Dictionary parsed against the given inventory, or against one built from
/// the map's symbols plus whatever else the dictionary uses. Classes in the
/// built inventory only distinguish silence and short pause.
fn dictionary(path: &Path, inv: Option<&Path>, map: &P2VMap) -> Result<PronunciationDictionary> {
    let text = read(path)?;
    let inv = match inv {
        Some(p) => inventory(p)?,
        None => inferred_inventory(map, &text)?,
    };
    PronunciationDictionary::parse(&text, &inv).with_context(|| format!("in {}", path.display()))
}

fn inferred_inventory(map: &P2VMap, dict_text: &str) -> Result<PhonemeInventory> {
    let mut labels: Vec<PhonemeLabel> = Vec::new();
    let push = |sym: &str, class: PhonemeClass, labels: &mut Vec<PhonemeLabel>| -> Result<()> {
        if !labels.iter().any(|l| l.symbol() == sym) {
            labels.push(PhonemeLabel::new(sym, class)?);
        }
        Ok(())
    };
    if let Some(s) = map.silence() {
        push(s, PhonemeClass::Silence, &mut labels)?;
    }
    if let Some(s) = map.short_pause() {
        push(s, PhonemeClass::ShortPause, &mut labels)?;
    }
    for p in map.classes().iter().flat_map(|c| &c.phonemes).chain(map.garbage()) {
        push(p, PhonemeClass::Consonant, &mut labels)?;
    }
    for (_, line) in data_lines(dict_text) {
        for tok in line.split_whitespace().skip(1) {
            if tok.starts_with('[') && tok.ends_with(']') {
                continue;
            }
            let tok = tok.to_lowercase();
            let class = match tok.as_str() {
                "sil" if map.silence().is_none() => PhonemeClass::Silence,
                "sp" if map.short_pause().is_none() => PhonemeClass::ShortPause,
                _ => PhonemeClass::Consonant,
            };
            push(&tok, class, &mut labels)?;
        }
    }
    Ok(PhonemeInventory::new(labels)?)
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let inv = inventory(&a.inventory)?;
    let opts = ClusterOptions::with_threshold(a.threshold);
    let designation = a.designation.as_deref().map(str::parse::<MapSource>).transpose()?;

    let mut speakers = BTreeMap::new();
    for (id, path) in &a.speakers {
        let id = SpeakerId::new(id.as_str())?;
        if speakers.insert(id.clone(), matrix(path, &inv)?).is_some() {
            return Err(UsageError(format!("speaker {id} given twice")).into());
        }
    }
    let result = if let Some(holdout) = &a.holdout {
        derive_speaker_independent(&speakers, &SpeakerId::new(holdout.as_str())?, &inv, &opts)?
    } else {
        let mut cms = a.cms.iter().map(|p| matrix(p, &inv)).collect::<Result<Vec<_>>>()?;
        cms.extend(speakers.into_values());
        if cms.is_empty() {
            return Err(UsageError("give at least one --cm or --speaker".into()).into());
        }
        derive_visemes(&merge_matrices(&cms)?, &inv, &opts)?
    };
    let result = match designation {
        Some(d) => result.with_designation(d),
        None => result,
    };
    let report = validate_map(&result, &inv);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{} visemes, {} garbage phonemes", result.viseme_count(), result.garbage().len());
    emit(a.out.as_deref(), &result.to_text())
}

fn merge(a: MergeArgs) -> Result<()> {
    let inv = inventory(&a.inventory)?;
    let cms = a.cms.iter().map(|p| matrix(p, &inv)).collect::<Result<Vec<_>>>()?;
    emit(a.out.as_deref(), &merge_matrices(&cms)?.to_csv())
}

fn transcribe(a: TranscribeArgs) -> Result<()> {
    let m = map(&a.map)?;
    let dict = dictionary(&a.dict, a.inventory.as_deref(), &m)?;
    let out = if let Some(path) = &a.words {
        let mut out = String::new();
        let mut seen = std::collections::HashSet::new();
        for word in parse_word_list(&read(path)?) {
            if !seen.insert(word.clone()) {
                continue;
            }
            for pron in dict.phonemize(&word)? {
                out.push_str(&format!("{word}\t{}\n", phonemes_to_visemes(pron, &m)?.join(" ")));
            }
        }
        out
    } else {
        let path = a.transcripts.as_ref().expect("clap requires --words or --transcripts");
        let utts = parse_transcripts(&read(path)?)?;
        let missing = dict.missing(utts.iter().flat_map(|u| u.words.iter().map(String::as_str)));
        if !missing.is_empty() {
            return Err(viseme_core::Error::OutOfVocabulary(missing).into());
        }
        let mut out = Vec::with_capacity(utts.len());
        for u in &utts {
            let mut visemes = Vec::new();
            for w in &u.words {
                // First listed pronunciation of each word.
                visemes.extend(phonemes_to_visemes(&dict.phonemize(w)?[0], &m)?);
            }
            out.push(Utterance {
                id: u.id.clone(),
                words: visemes,
            });
        }
        format_transcripts(&out)
    };
    emit(a.out.as_deref(), &out)
}

fn homophenes(a: HomophenesArgs) -> Result<()> {
    let m = map(&a.map)?;
    let dict = dictionary(&a.dict, a.inventory.as_deref(), &m)?;
    let words = parse_word_list(&read(&a.words)?);
    let rows = homophene_table(&words, &m, &dict)?;
    emit(a.out.as_deref(), &format_homophene_csv(&rows))
}

fn score(a: ScoreArgs) -> Result<()> {
    if a.refs.len() != a.hyps.len() {
        return Err(UsageError(format!("{} --ref files but {} --hyp files", a.refs.len(), a.hyps.len())).into());
    }
    let costs = match a.costs {
        Costs::Htk => AlignCosts::HTK,
        Costs::Unit => AlignCosts::UNIT,
    };
    let inv = a.inventory.as_deref().map(inventory).transpose()?;
    let mut folds: Vec<(String, EditCounts)> = Vec::new();
    let mut alignments = Vec::new();
    for (i, (rp, hp)) in a.refs.iter().zip(&a.hyps).enumerate() {
        let refs = parse_transcripts(&read(rp)?).with_context(|| format!("in {}", rp.display()))?;
        let hyps = parse_transcripts(&read(hp)?).with_context(|| format!("in {}", hp.display()))?;
        let by_id: HashMap<&str, &Utterance> = hyps.iter().map(|u| (u.id.as_str(), u)).collect();
        if let Some(extra) = hyps.iter().find(|h| !refs.iter().any(|r| r.id == h.id)) {
            bail!("{}: utterance {} has no reference", hp.display(), extra.id);
        }
        let mut counts = EditCounts::default();
        for r in &refs {
            let h = by_id
                .get(r.id.as_str())
                .ok_or_else(|| anyhow!("{}: no hypothesis for utterance {}", hp.display(), r.id))?;
            let al = align(&r.words, &h.words, &costs);
            counts += al.counts;
            if inv.is_some() {
                alignments.push(al);
            }
        }
        folds.push(((i + 1).to_string(), counts));
    }
    let table = format_fold_csv(&folds)?;
    let confusions = match (&a.confusions, &inv) {
        (Some(_), Some(inv)) => Some(confusions_from_alignments(&alignments, inv)?.matrix.to_csv()),
        _ => None,
    };
    if let (Some(path), Some(csv)) = (&a.confusions, &confusions) {
        emit(Some(path), csv)?;
    }
    emit(a.out.as_deref(), &table)
}

fn wilcoxon(a: WilcoxonArgs) -> Result<()> {
    let text = read(&a.scores)?;
    let mut lines = data_lines(&text);
    let (_, header) = lines.next().ok_or_else(|| anyhow!("{} is empty", a.scores.display()))?;
    let names: Vec<String> = fields(header).into_iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        bail!("{}: header names no score columns", a.scores.display());
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (n, line) in lines {
        let f = fields(line);
        if f.len() != names.len() + 1 {
            bail!("{} line {n}: expected {} fields, found {}", a.scores.display(), names.len() + 1, f.len());
        }
        for (col, v) in columns.iter_mut().zip(&f[1..]) {
            col.push(v.parse::<f64>().with_context(|| format!("{} line {n}: bad score {v:?}", a.scores.display()))?);
        }
    }
    let results = wilcoxon_matrix(&columns)?;
    let (p, sig) = format_wilcoxon_csv(&names, &results);
    match (&a.out, &a.sig_out) {
        (out, Some(sig_path)) => {
            emit(Some(sig_path), &sig)?;
            emit(out.as_deref(), &p)
        }
        (out, None) => emit(out.as_deref(), &format!("{p}\n{sig}")),
    }
}

fn rank(a: RankArgs) -> Result<()> {
    let table = if let Some(path) = &a.grid {
        RankTable::from_csv(&read(path)?).with_context(|| format!("in {}", path.display()))?
    } else {
        let path = a.scores.as_ref().expect("clap requires --grid or --scores");
        rank_from_scores(&read(path)?).with_context(|| format!("in {}", path.display()))?
    };
    let best: Vec<&str> = table.best().into_iter().map(|j| table.columns[j].as_str()).collect();
    eprintln!("best: {}", best.join(" "));
    emit(a.out.as_deref(), &table.to_csv())
}

fn rank_from_scores(text: &str) -> Result<RankTable> {
    let mut speakers: Vec<String> = Vec::new();
    let mut maps: Vec<String> = Vec::new();
    let mut scores: HashMap<(String, String), FoldScores> = HashMap::new();
    for (n, line) in data_lines(text) {
        let f = fields(line);
        if f.len() != 4 {
            bail!("line {n}: expected speaker,map,mean,stderr");
        }
        if n == 1 && f[2].eq_ignore_ascii_case("mean") {
            continue;
        }
        let mean: f64 = f[2].parse().with_context(|| format!("line {n}: bad mean {:?}", f[2]))?;
        let stderr: f64 = f[3].parse().with_context(|| format!("line {n}: bad stderr {:?}", f[3]))?;
        for (list, v) in [(&mut speakers, f[0]), (&mut maps, f[1])] {
            if !list.iter().any(|x| x == v) {
                list.push(v.to_string());
            }
        }
        let key = (f[0].to_string(), f[1].to_string());
        if scores.insert(key, FoldScores { values: Vec::new(), mean, stderr }).is_some() {
            bail!("line {n}: duplicate entry for {},{}", f[0], f[1]);
        }
    }
    let mut cells = Vec::with_capacity(speakers.len());
    for s in &speakers {
        let own = scores
            .get(&(s.clone(), s.clone()))
            .ok_or_else(|| anyhow!("speaker {s} has no row with its own map"))?;
        let mut row = Vec::with_capacity(maps.len());
        for m in &maps {
            let other = scores
                .get(&(s.clone(), m.clone()))
                .ok_or_else(|| anyhow!("missing score for speaker {s} with map {m}"))?;
            row.push(rank_score(own, other, m == s));
        }
        cells.push(row);
    }
    Ok(rank_table(speakers, maps, cells)?)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut exp = Experiment::load(&a.config).with_context(|| format!("loading {}", a.config.display()))?;
    if let Some(seed) = a.seed {
        exp = exp.with_seed(seed);
    }
    let report = run_experiment(&exp)?;
    report.write_to(&a.out)?;
    eprintln!(
        "{} crossings over {} folds, seed {}, report in {}",
        report.results.len(),
        report.folds,
        report.seed,
        a.out.display()
    );
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let m = map(&a.map)?;
    let inv = inventory(&a.inventory)?;
    let report = validate_map(&m, &inv);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    if !report.is_ok() {
        bail!("{} has {} error(s)", a.map.display(), report.errors.len());
    }
    eprintln!("{}: ok, {} visemes", a.map.display(), m.viseme_count());
    Ok(())
}
