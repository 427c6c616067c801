//! Reference/hypothesis alignment, correctness and fold summaries.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::model::{ConfusionMatrix, PhonemeInventory, PhonemeLabel};

/// Edit costs for alignment. The default matches HResults (10/7/7).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignCosts {
    pub substitution: u32,
    pub deletion: u32,
    pub insertion: u32,
}

impl AlignCosts {
    pub const HTK: AlignCosts = AlignCosts {
        substitution: 10,
        deletion: 7,
        insertion: 7,
    };
    pub const UNIT: AlignCosts = AlignCosts {
        substitution: 1,
        deletion: 1,
        insertion: 1,
    };
}

impl Default for AlignCosts {
    fn default() -> Self {
        AlignCosts::HTK
    }
}

/// Edit counts. `n` is the reference length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub n: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub insertions: usize,
}

impl EditCounts {
    pub fn correct(&self) -> usize {
        self.n - self.deletions - self.substitutions
    }

    /// `(N - D - S) / N`.
    pub fn correctness(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::UndefinedMetric);
        }
        Ok(self.correct() as f64 / self.n as f64)
    }

    pub fn cost(&self, costs: &AlignCosts) -> u64 {
        u64::from(costs.substitution) * self.substitutions as u64
            + u64::from(costs.deletion) * self.deletions as u64
            + u64::from(costs.insertion) * self.insertions as u64
    }
}

impl AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.n += rhs.n;
        self.deletions += rhs.deletions;
        self.substitutions += rhs.substitutions;
        self.insertions += rhs.insertions;
    }
}

/// One aligned position: `(Some, Some)` is a match or substitution,
/// `(Some, None)` a deletion, `(None, Some)` an insertion.
pub type AlignedPair<T> = (Option<T>, Option<T>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentResult<T = String> {
    pub counts: EditCounts,
    pub pairs: Vec<AlignedPair<T>>,
}

impl<T> AlignmentResult<T> {
    pub fn correctness(&self) -> Result<f64> {
        self.counts.correctness()
    }
}

/// Minimum-cost alignment. Among equal-cost paths the traceback prefers a
/// diagonal step (match or substitution), then a deletion, then an insertion.
pub fn align<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T], costs: &AlignCosts) -> AlignmentResult<T> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut dp = vec![0u64; (n + 1) * w];
    for j in 1..=m {
        dp[j] = dp[j - 1] + u64::from(costs.insertion);
    }
    for i in 1..=n {
        dp[i * w] = dp[(i - 1) * w] + u64::from(costs.deletion);
        for j in 1..=m {
            let diag = dp[(i - 1) * w + j - 1]
                + if reference[i - 1] == hypothesis[j - 1] {
                    0
                } else {
                    u64::from(costs.substitution)
                };
            let del = dp[(i - 1) * w + j] + u64::from(costs.deletion);
            let ins = dp[i * w + j - 1] + u64::from(costs.insertion);
            dp[i * w + j] = diag.min(del).min(ins);
        }
    }

    let mut counts = EditCounts {
        n,
        ..Default::default()
    };
    let mut pairs = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            let step = if same { 0 } else { u64::from(costs.substitution) };
            if dp[(i - 1) * w + j - 1] + step == here {
                if !same {
                    counts.substitutions += 1;
                }
                pairs.push((Some(reference[i - 1].clone()), Some(hypothesis[j - 1].clone())));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * w + j] + u64::from(costs.deletion) == here {
            counts.deletions += 1;
            pairs.push((Some(reference[i - 1].clone()), None));
            i -= 1;
        } else {
            counts.insertions += 1;
            pairs.push((None, Some(hypothesis[j - 1].clone())));
            j -= 1;
        }
    }
    pairs.reverse();
    AlignmentResult { counts, pairs }
}

/// `(N - D - S) / N` for an alignment.
pub fn correctness<T>(a: &AlignmentResult<T>) -> Result<f64> {
    a.correctness()
}

/// Fraction of positions where the single-word answer matches.
pub fn word_accuracy<S: PartialEq>(refs: &[S], hyps: &[S]) -> Result<f64> {
    if refs.len() != hyps.len() {
        return Err(Error::LengthMismatch {
            left: refs.len(),
            right: hyps.len(),
        });
    }
    if refs.is_empty() {
        return Err(Error::EmptyInput("no classified words"));
    }
    let correct = refs.iter().zip(hyps).filter(|(r, h)| r == h).count();
    Ok(correct as f64 / refs.len() as f64)
}

/// Per-fold scores with mean and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldScores {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(folds)`.
    pub stderr: f64,
}

pub fn fold_summary(values: &[f64]) -> Result<FoldScores> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientFolds(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(FoldScores {
        values: values.to_vec(),
        // Clamp rounding noise so the mean stays inside the sample range.
        mean: mean.clamp(
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
        stderr: var.sqrt() / (n as f64).sqrt(),
    })
}

/// Confusion matrix from phoneme alignments plus the edits it leaves out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionTally {
    pub matrix: ConfusionMatrix,
    /// Deleted reference phonemes.
    pub deletions: BTreeMap<String, u64>,
    /// Inserted hypothesis phonemes.
    pub insertions: BTreeMap<String, u64>,
}

/// Accumulates correct and substituted pairs into a matrix (reference rows,
/// hypothesis columns). Deletions and insertions are kept as side counts.
/// The matrix covers the labels that occur, in inventory order.
pub fn confusions_from_alignments<S: AsRef<str>>(
    alignments: &[AlignmentResult<S>],
    inv: &PhonemeInventory,
) -> Result<ConfusionTally> {
    let mut used = std::collections::HashSet::new();
    for a in alignments {
        for (r, h) in &a.pairs {
            for s in [r, h].into_iter().flatten() {
                let s = s.as_ref();
                if !inv.contains(s) {
                    return Err(Error::LabelNotFound(s.to_string()));
                }
                used.insert(s);
            }
        }
    }
    let labels: Vec<PhonemeLabel> = inv.iter().filter(|l| used.contains(l.symbol())).cloned().collect();
    let mut matrix = ConfusionMatrix::zeros(labels)?;
    let mut deletions = BTreeMap::new();
    let mut insertions = BTreeMap::new();
    for a in alignments {
        for pair in &a.pairs {
            match pair {
                (Some(r), Some(h)) => matrix.add(r.as_ref(), h.as_ref(), 1)?,
                (Some(r), None) => *deletions.entry(r.as_ref().to_string()).or_insert(0) += 1,
                (None, Some(h)) => *insertions.entry(h.as_ref().to_string()).or_insert(0) += 1,
                (None, None) => {}
            }
        }
    }
    Ok(ConfusionTally {
        matrix,
        deletions,
        insertions,
    })
}

/// CSV `fold,N,D,S,I,C` rows, then a `mean` row (summed counts, mean fold
/// correctness) and, with two or more folds, an `stderr` row.
pub fn format_fold_csv(folds: &[(String, EditCounts)]) -> Result<String> {
    let mut out = String::from("fold,N,D,S,I,C\n");
    let mut total = EditCounts::default();
    let mut cs = Vec::with_capacity(folds.len());
    for (name, c) in folds {
        let corr = c.correctness()?;
        out.push_str(&format!(
            "{name},{},{},{},{},{corr:.6}\n",
            c.n, c.deletions, c.substitutions, c.insertions
        ));
        cs.push(corr);
        total += *c;
    }
    if cs.is_empty() {
        return Err(Error::EmptyInput("no folds to score"));
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    out.push_str(&format!(
        "mean,{},{},{},{},{mean:.6}\n",
        total.n, total.deletions, total.substitutions, total.insertions
    ));
    if cs.len() >= 2 {
        out.push_str(&format!("stderr,,,,,{:.6}\n", fold_summary(&cs)?.stderr));
    }
    Ok(out)
}
