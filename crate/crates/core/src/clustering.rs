//! Strictly-confused phoneme clustering.
//!
//! A phoneme that is only ever recognised as itself becomes a single-phoneme
//! viseme. The rest are grouped so that every pair inside a viseme has been
//! confused with each other (false positives plus false negatives reach the
//! threshold), vowels and consonants are kept apart, and each phoneme is
//! grouped at most once. Phonemes that never appear in the recogniser output
//! go to the garbage class.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    merge_matrices, ConfusionMatrix, MapSource, P2VMap, PhonemeClass, PhonemeInventory, SpeakerId, VisemeClass,
};

/// Order in which candidate pairs are offered to the greedy grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Descending symmetric confusion, then ascending by the pair's sorted symbols.
    #[default]
    ConfusionThenSymbols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterOptions {
    /// Minimum symmetric confusion for two phonemes to count as confused.
    pub confusion_threshold: u64,
    pub tie_break: TieBreak,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            confusion_threshold: 1,
            tie_break: TieBreak::default(),
        }
    }
}

impl ClusterOptions {
    pub fn with_threshold(confusion_threshold: u64) -> Self {
        ClusterOptions {
            confusion_threshold,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.confusion_threshold == 0 {
            return Err(Error::Config("confusion threshold must be at least 1".into()));
        }
        Ok(())
    }
}

/// Derives a P2V map from one confusion matrix. The result carries no
/// designation; the speaker-level wrappers below set one.
pub fn derive_visemes(cm: &ConfusionMatrix, inv: &PhonemeInventory, opts: &ClusterOptions) -> Result<P2VMap> {
    opts.check()?;
    if cm.is_empty() {
        return Err(Error::EmptyInput("confusion matrix has no labels"));
    }
    for label in cm.labels() {
        match inv.get(label.symbol()) {
            None => return Err(Error::LabelNotFound(label.symbol().to_string())),
            Some(known) if known.class() != label.class() => {
                return Err(Error::InventoryConflict {
                    symbol: label.symbol().to_string(),
                    first: known.class().to_string(),
                    second: label.class().to_string(),
                })
            }
            Some(_) => {}
        }
    }

    let clusterable: Vec<usize> = (0..cm.dim())
        .filter(|&i| !cm.labels()[i].class().is_reserved())
        .collect();
    let symbol = |i: usize| cm.labels()[i].symbol();

    let (garbage, active): (Vec<usize>, Vec<usize>) = clusterable.iter().partition(|&&i| cm.col_sum(i) == 0);

    let off_diagonal = |i: usize| {
        clusterable
            .iter()
            .filter(|&&j| j != i)
            .any(|&j| cm.at(i, j) > 0 || cm.at(j, i) > 0)
    };
    let (isolated, candidates): (Vec<usize>, Vec<usize>) =
        active.iter().partition(|&&i| cm.at(i, i) > 0 && !off_diagonal(i));

    let groups = greedy_groups(cm, &candidates, opts.confusion_threshold);

    let mut grouped = vec![false; cm.dim()];
    for g in &groups {
        for &i in g {
            grouped[i] = true;
        }
    }
    let sorted_symbols = |idx: &[usize]| {
        let mut s: Vec<String> = idx.iter().map(|&i| symbol(i).to_string()).collect();
        s.sort();
        s
    };

    let mut sets: Vec<Vec<String>> = Vec::new();
    sets.extend(sorted_symbols(&isolated).into_iter().map(|s| vec![s]));
    sets.extend(groups.iter().map(|g| sorted_symbols(g)));
    let leftovers: Vec<usize> = candidates.iter().copied().filter(|&i| !grouped[i]).collect();
    sets.extend(sorted_symbols(&leftovers).into_iter().map(|s| vec![s]));

    let classes = sets
        .into_iter()
        .enumerate()
        .map(|(k, phonemes)| VisemeClass {
            id: format!("v{:02}", k + 1),
            phonemes,
        })
        .collect();

    let reserved = |class: PhonemeClass| {
        cm.labels()
            .iter()
            .find(|l| l.class() == class)
            .or_else(|| inv.iter().find(|l| l.class() == class))
            .map(|l| l.symbol().to_string())
    };

    Ok(P2VMap::new(
        None,
        classes,
        reserved(PhonemeClass::Silence),
        reserved(PhonemeClass::ShortPause),
        sorted_symbols(&garbage),
    ))
}

/// Greedy clique building over candidate pairs. Groups are returned in the
/// order they were opened.
fn greedy_groups(cm: &ConfusionMatrix, candidates: &[usize], threshold: u64) -> Vec<Vec<usize>> {
    let class = |i: usize| cm.labels()[i].class();
    let symbol = |i: usize| cm.labels()[i].symbol();

    let mut pairs: Vec<(u64, &str, &str, usize, usize)> = Vec::new();
    for (k, &a) in candidates.iter().enumerate() {
        for &b in &candidates[k + 1..] {
            if class(a) != class(b) {
                continue;
            }
            let c = cm.pair_confusion(a, b);
            if c >= threshold {
                let (lo, hi) = if symbol(a) <= symbol(b) { (a, b) } else { (b, a) };
                pairs.push((c, symbol(lo), symbol(hi), lo, hi));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then_with(|| (x.1, x.2).cmp(&(y.1, y.2))));

    let mut group_of: Vec<Option<usize>> = vec![None; cm.dim()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let confused_with_all = |p: usize, members: &[usize]| members.iter().all(|&m| cm.pair_confusion(p, m) >= threshold);

    for &(_, _, _, a, b) in &pairs {
        match (group_of[a], group_of[b]) {
            (None, None) => {
                group_of[a] = Some(groups.len());
                group_of[b] = Some(groups.len());
                groups.push(vec![a, b]);
            }
            (Some(g), None) | (None, Some(g)) => {
                let newcomer = if group_of[a].is_none() { a } else { b };
                if confused_with_all(newcomer, &groups[g]) {
                    group_of[newcomer] = Some(g);
                    groups[g].push(newcomer);
                }
            }
            (Some(_), Some(_)) => {}
        }
    }
    groups
}

/// Sums one speaker's per-fold matrices and derives that speaker's map.
pub fn derive_speaker_dependent(
    speaker: &SpeakerId,
    folds: &[ConfusionMatrix],
    inv: &PhonemeInventory,
    opts: &ClusterOptions,
) -> Result<P2VMap> {
    let merged = merge_matrices(folds)?;
    Ok(derive_visemes(&merged, inv, opts)?.with_designation(MapSource::Speaker(speaker.clone())))
}

pub fn derive_multi_speaker(cms: &[ConfusionMatrix], inv: &PhonemeInventory, opts: &ClusterOptions) -> Result<P2VMap> {
    let merged = merge_matrices(cms)?;
    Ok(derive_visemes(&merged, inv, opts)?.with_designation(MapSource::AllSpeakers))
}

/// Map from every speaker's confusions except the held-out test speaker.
pub fn derive_speaker_independent(
    cms: &BTreeMap<SpeakerId, ConfusionMatrix>,
    holdout: &SpeakerId,
    inv: &PhonemeInventory,
    opts: &ClusterOptions,
) -> Result<P2VMap> {
    if cms.len() < 2 {
        return Err(Error::InsufficientSpeakers(cms.len()));
    }
    if !cms.contains_key(holdout) {
        return Err(Error::UnknownSpeaker(holdout.to_string()));
    }
    let others: Vec<ConfusionMatrix> = cms
        .iter()
        .filter(|(id, _)| *id != holdout)
        .map(|(_, cm)| cm.clone())
        .collect();
    let merged = merge_matrices(&others)?;
    Ok(derive_visemes(&merged, inv, opts)?.with_designation(MapSource::AllBut(holdout.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_map, PhonemeLabel};

    fn inv_of(pairs: &[(&str, PhonemeClass)]) -> PhonemeInventory {
        PhonemeInventory::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn cm_of(inv: &PhonemeInventory, syms: &[&str], rows: &[Vec<u64>]) -> ConfusionMatrix {
        let labels: Vec<PhonemeLabel> = syms.iter().map(|s| inv.get(s).unwrap().clone()).collect();
        ConfusionMatrix::from_rows(labels, rows).unwrap()
    }

    fn table2() -> (ConfusionMatrix, PhonemeInventory) {
        let syms = ["p1", "p2", "p3", "p4", "p5", "p6", "p7"];
        let inv = inv_of(&syms.map(|s| (s, PhonemeClass::Consonant)));
        let rows = vec![
            vec![1, 0, 0, 0, 0, 0, 4],
            vec![0, 0, 0, 2, 0, 0, 0],
            vec![1, 0, 0, 0, 0, 0, 1],
            vec![0, 2, 1, 0, 2, 0, 0],
            vec![3, 0, 1, 1, 1, 0, 0],
            vec![0, 0, 0, 0, 0, 4, 0],
            vec![1, 0, 3, 0, 0, 0, 1],
        ];
        (cm_of(&inv, &syms, &rows), inv)
    }

    fn ids_and_sets(map: &P2VMap) -> Vec<(String, Vec<String>)> {
        map.classes().iter().map(|c| (c.id.clone(), c.phonemes.clone())).collect()
    }

    #[test]
    fn reproduces_worked_example_including_ids() {
        let (cm, inv) = table2();
        let map = derive_visemes(&cm, &inv, &ClusterOptions::default()).unwrap();
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(
            ids_and_sets(&map),
            vec![
                ("v01".into(), s(&["p6"])),
                ("v02".into(), s(&["p1", "p3", "p7"])),
                ("v03".into(), s(&["p2", "p4"])),
                ("v04".into(), s(&["p5"])),
            ]
        );
        assert!(map.garbage().is_empty());
    }

    #[test]
    fn diagonal_matrix_gives_singletons() {
        let inv = inv_of(&[("a", PhonemeClass::Vowel), ("b", PhonemeClass::Consonant), ("c", PhonemeClass::Consonant)]);
        let cm = cm_of(&inv, &["a", "b", "c"], &[vec![3, 0, 0], vec![0, 1, 0], vec![0, 0, 7]]);
        let map = derive_visemes(&cm, &inv, &ClusterOptions::default()).unwrap();
        assert_eq!(map.partition(), vec![vec!["a"], vec!["b"], vec!["c"]]);
    }

    #[test]
    fn mutual_confusion_merges_pair() {
        let inv = inv_of(&[("b", PhonemeClass::Consonant), ("d", PhonemeClass::Consonant)]);
        let cm = cm_of(&inv, &["b", "d"], &[vec![2, 1], vec![1, 2]]);
        let map = derive_visemes(&cm, &inv, &ClusterOptions::default()).unwrap();
        assert_eq!(map.partition(), vec![vec!["b", "d"]]);
    }

    #[test]
    fn vowel_and_consonant_never_merge() {
        let inv = inv_of(&[("a", PhonemeClass::Vowel), ("k", PhonemeClass::Consonant)]);
        let cm = cm_of(&inv, &["a", "k"], &[vec![1, 5], vec![5, 1]]);
        let map = derive_visemes(&cm, &inv, &ClusterOptions::default()).unwrap();
        assert_eq!(map.partition(), vec![vec!["a"], vec!["k"]]);
    }

    #[test]
    fn never_output_phonemes_go_to_garbage() {
        let inv = inv_of(&[
            ("a", PhonemeClass::Consonant),
            ("b", PhonemeClass::Consonant),
            ("z", PhonemeClass::Consonant),
            ("sil", PhonemeClass::Silence),
        ]);
        // z is spoken (recognised as b) but never appears in the output.
        let cm = cm_of(
            &inv,
            &["a", "b", "z", "sil"],
            &[vec![2, 0, 0, 0], vec![0, 2, 0, 0], vec![0, 3, 0, 0], vec![0, 0, 0, 4]],
        );
        let map = derive_visemes(&cm, &inv, &ClusterOptions::default()).unwrap();
        assert_eq!(map.garbage(), ["z"]);
        assert_eq!(map.silence(), Some("sil"));
        assert_eq!(map.class_of("z"), Some("gar"));
        assert!(validate_map(&map, &inv).is_ok());
    }

    #[test]
    fn threshold_gates_merges() {
        let inv = inv_of(&[("b", PhonemeClass::Consonant), ("d", PhonemeClass::Consonant)]);
        let cm = cm_of(&inv, &["b", "d"], &[vec![2, 1], vec![1, 2]]);
        let map = derive_visemes(&cm, &inv, &ClusterOptions::with_threshold(3)).unwrap();
        assert_eq!(map.viseme_count(), 2);
        assert!(derive_visemes(&cm, &inv, &ClusterOptions::with_threshold(0)).is_err());
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let inv = inv_of(&[("b", PhonemeClass::Consonant)]);
        let cm = ConfusionMatrix::zeros(vec![]).unwrap();
        assert!(matches!(
            derive_visemes(&cm, &inv, &ClusterOptions::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn multi_speaker_matches_single_for_copies() {
        let (cm, inv) = table2();
        let opts = ClusterOptions::default();
        let single = derive_visemes(&cm, &inv, &opts).unwrap();
        let one = derive_multi_speaker(std::slice::from_ref(&cm), &inv, &opts).unwrap();
        let three = derive_multi_speaker(&[cm.clone(), cm.clone(), cm], &inv, &opts).unwrap();
        assert_eq!(one.classes(), single.classes());
        assert_eq!(three.classes(), single.classes());
        assert_eq!(three.designation(), Some(&MapSource::AllSpeakers));
    }

    #[test]
    fn disjoint_confusions_union_under_merge() {
        let syms = ["a", "b", "c", "d"];
        let inv = inv_of(&syms.map(|s| (s, PhonemeClass::Consonant)));
        let x = cm_of(&inv, &syms, &[vec![1, 2, 0, 0], vec![1, 1, 0, 0], vec![0, 0, 3, 0], vec![0, 0, 0, 3]]);
        let y = cm_of(&inv, &syms, &[vec![3, 0, 0, 0], vec![0, 3, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 2, 1]]);

        // Oracle: enumerate every unordered pair of the merged matrix and keep
        // those with non-zero symmetric confusion.
        let merged = merge_matrices(&[x.clone(), y.clone()]).unwrap();
        let mut confused = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                if merged.at(i, j) + merged.at(j, i) > 0 {
                    confused.push(vec![syms[i].to_string(), syms[j].to_string()]);
                }
            }
        }
        assert_eq!(confused, vec![vec!["a", "b"], vec!["c", "d"]]);

        let opts = ClusterOptions::default();
        let ms = derive_multi_speaker(&[x.clone(), y.clone()], &inv, &opts).unwrap();
        assert_eq!(ms.partition(), confused);
        let mut union = derive_visemes(&x, &inv, &opts).unwrap().partition();
        union.retain(|g| g.len() > 1);
        union.extend(derive_visemes(&y, &inv, &opts).unwrap().partition().into_iter().filter(|g| g.len() > 1));
        union.sort();
        assert_eq!(union, confused);
    }

    #[test]
    fn speaker_independent_leaves_out_holdout() {
        let (cm, inv) = table2();
        let sp = |s: &str| SpeakerId::new(s).unwrap();
        let syms: Vec<&str> = cm.symbols().collect();
        let diag = cm_of(&inv, &syms, &(0..7).map(|i| (0..7).map(|j| u64::from(i == j)).collect()).collect::<Vec<_>>());
        let opts = ClusterOptions::default();

        let two: BTreeMap<_, _> = [(sp("1"), cm.clone()), (sp("2"), diag.clone())].into();
        let si = derive_speaker_independent(&two, &sp("1"), &inv, &opts).unwrap();
        assert_eq!(si.classes(), derive_visemes(&diag, &inv, &opts).unwrap().classes());
        assert_eq!(si.designation(), Some(&MapSource::AllBut(sp("1"))));

        let three: BTreeMap<_, _> = [(sp("1"), cm.clone()), (sp("2"), diag.clone()), (sp("3"), cm.clone())].into();
        let si = derive_speaker_independent(&three, &sp("2"), &inv, &opts).unwrap();
        let expected = derive_multi_speaker(&[cm.clone(), cm.clone()], &inv, &opts).unwrap();
        assert_eq!(si.classes(), expected.classes());

        assert!(matches!(
            derive_speaker_independent(&three, &sp("99"), &inv, &opts),
            Err(Error::UnknownSpeaker(_))
        ));
        let one: BTreeMap<_, _> = [(sp("1"), cm)].into();
        assert!(matches!(
            derive_speaker_independent(&one, &sp("1"), &inv, &opts),
            Err(Error::InsufficientSpeakers(1))
        ));
    }

    #[test]
    fn speaker_dependent_sums_folds() {
        let (cm, inv) = table2();
        let sp = SpeakerId::new("2").unwrap();
        let map = derive_speaker_dependent(&sp, &[cm.clone(), cm], &inv, &ClusterOptions::default()).unwrap();
        assert_eq!(map.designation(), Some(&MapSource::Speaker(sp)));
        assert_eq!(map.viseme_count(), 4);
    }

    #[test]
    fn labels_outside_inventory_fail() {
        let (cm, _) = table2();
        let inv = inv_of(&[("p1", PhonemeClass::Consonant)]);
        assert!(matches!(
            derive_visemes(&cm, &inv, &ClusterOptions::default()),
            Err(Error::LabelNotFound(_))
        ));
    }
}
