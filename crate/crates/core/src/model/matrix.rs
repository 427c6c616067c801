use std::collections::HashMap;
use std::fmt::Write as _;

use super::phoneme::{PhonemeInventory, PhonemeLabel};
use crate::error::{Error, Result};

/// Square count matrix of recognition outcomes.
///
/// Rows are reference (ground-truth) phonemes and columns are hypothesised
/// phonemes, so `count(a, b)` is the number of times `a` was spoken and `b`
/// was recognised. The CSV codec keeps this orientation: the header row holds
/// hypothesis labels and the first column holds reference labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<PhonemeLabel>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<PhonemeLabel>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.symbol().to_string(), i).is_some() {
                return Err(Error::InvalidLabel {
                    symbol: l.symbol().to_string(),
                    reason: "duplicate matrix label".into(),
                });
            }
        }
        let n = labels.len();
        Ok(ConfusionMatrix {
            labels,
            index,
            counts: vec![0; n * n],
        })
    }

    /// Builds a matrix from row-major counts (`rows[reference][hypothesis]`).
    pub fn from_rows(labels: Vec<PhonemeLabel>, rows: &[Vec<u64>]) -> Result<Self> {
        let mut cm = ConfusionMatrix::zeros(labels)?;
        let n = cm.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                left: n,
                right: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(rows.len()),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            cm.counts[r * n..(r + 1) * n].copy_from_slice(row);
        }
        Ok(cm)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[PhonemeLabel] {
        &self.labels
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(PhonemeLabel::symbol)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    fn require(&self, symbol: &str) -> Result<usize> {
        self.index_of(symbol)
            .ok_or_else(|| Error::LabelNotFound(symbol.to_string()))
    }

    /// Count at (reference, hypothesis) by index.
    pub fn at(&self, reference: usize, hypothesis: usize) -> u64 {
        self.counts[reference * self.dim() + hypothesis]
    }

    pub fn count(&self, reference: &str, hypothesis: &str) -> Result<u64> {
        Ok(self.at(self.require(reference)?, self.require(hypothesis)?))
    }

    pub fn add(&mut self, reference: &str, hypothesis: &str, k: u64) -> Result<()> {
        let (r, h) = (self.require(reference)?, self.require(hypothesis)?);
        let n = self.dim();
        self.counts[r * n + h] += k;
        Ok(())
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        let n = self.dim();
        self.counts[i * n..(i + 1) * n].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.dim()).map(|i| self.at(i, j)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Symmetric confusion between two distinct phonemes: the false positives
    /// plus false negatives of the pair, `count(a, b) + count(b, a)`.
    pub fn confusion(&self, a: &str, b: &str) -> Result<u64> {
        if a == b {
            return Err(Error::InvalidPair(a.to_string()));
        }
        let (i, j) = (self.require(a)?, self.require(b)?);
        Ok(self.pair_confusion(i, j))
    }

    pub(crate) fn pair_confusion(&self, i: usize, j: usize) -> u64 {
        self.at(i, j) + self.at(j, i)
    }

    /// Parses the CSV form. Labels are resolved against `inv` to pick up
    /// their classes. Row order may differ from the header order, but both
    /// axes must carry the same label set.
    pub fn from_csv(text: &str, inv: &PhonemeInventory) -> Result<Self> {
        const KIND: &str = "confusion matrix";
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let Some((hn, header)) = lines.next() else {
            return Err(Error::EmptyInput("confusion matrix"));
        };
        let labels = header
            .split(',')
            .skip(1)
            .map(|s| {
                let sym = s.trim().to_lowercase();
                inv.get(&sym)
                    .cloned()
                    .ok_or(Error::UnknownPhoneme { phoneme: sym, line: hn + 1 })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cm = ConfusionMatrix::zeros(labels)?;
        let n = cm.dim();
        let mut seen = vec![false; n];
        for (ln, line) in lines {
            let mut fields = line.split(',').map(str::trim);
            let sym = fields.next().unwrap_or_default().to_lowercase();
            let r = cm
                .index_of(&sym)
                .ok_or_else(|| Error::parse(KIND, ln + 1, format!("row label {sym:?} not in header")))?;
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::parse(KIND, ln + 1, format!("duplicate row {sym:?}")));
            }
            let cells = fields
                .map(|f| {
                    f.parse::<u64>()
                        .map_err(|_| Error::parse(KIND, ln + 1, format!("bad count {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if cells.len() != n {
                return Err(Error::parse(KIND, ln + 1, format!("expected {n} counts, found {}", cells.len())));
            }
            cm.counts[r * n..(r + 1) * n].copy_from_slice(&cells);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::parse(
                KIND,
                0,
                format!("missing row for {:?}", cm.labels[missing].symbol()),
            ));
        }
        Ok(cm)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            out.push(',');
            out.push_str(l.symbol());
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l.symbol());
            for j in 0..self.dim() {
                let _ = write!(out, ",{}", self.at(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Element-wise sum over the union of the matrices' labels.
///
/// Labels keep first-seen order; cells a matrix does not carry count as zero.
pub fn merge_matrices(cms: &[ConfusionMatrix]) -> Result<ConfusionMatrix> {
    if cms.is_empty() {
        return Err(Error::EmptyInput("no confusion matrices to merge"));
    }
    let mut labels: Vec<PhonemeLabel> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for cm in cms {
        for l in cm.labels() {
            match seen.get(l.symbol()) {
                Some(&i) if labels[i].class() != l.class() => {
                    return Err(Error::InventoryConflict {
                        symbol: l.symbol().to_string(),
                        first: labels[i].class().to_string(),
                        second: l.class().to_string(),
                    });
                }
                Some(_) => {}
                None => {
                    seen.insert(l.symbol(), labels.len());
                    labels.push(l.clone());
                }
            }
        }
    }
    let mut merged = ConfusionMatrix::zeros(labels)?;
    let n = merged.dim();
    for cm in cms {
        let map: Vec<usize> = cm.symbols().map(|s| seen[s]).collect();
        for (i, &mi) in map.iter().enumerate() {
            for (j, &mj) in map.iter().enumerate() {
                merged.counts[mi * n + mj] += cm.at(i, j);
            }
        }
    }
    Ok(merged)
}
