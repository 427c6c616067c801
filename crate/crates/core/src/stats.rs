//! Exact Wilcoxon signed-rank test and weighted ranking tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scoring::FoldScores;

/// Significance level for [`WilcoxonResult::significant`].
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of signed ranks of the non-zero differences `x - y`.
    pub statistic: f64,
    pub n_effective: usize,
    /// Exact two-sided p-value.
    pub p_value: f64,
    pub significant: bool,
}

/// Average ranks of `values` (ascending, 1-based), doubled so ties stay integral.
pub fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // Positions start..=end share the average of ranks start+1 ..= end+1.
        let doubled = (start + 1 + end + 1) as u64;
        for &k in &order[start..=end] {
            ranks[k] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Paired two-sided signed-rank test with the exact null distribution.
///
/// Zero differences are dropped and tied magnitudes get average ranks. The
/// p-value counts sign assignments whose positive-rank sum lies at least as
/// far from its mean as the observed one. With no non-zero differences the
/// p-value is 1.
pub fn wilcoxon_exact(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("no paired samples"));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            n_effective: 0,
            p_value: 1.0,
            significant: false,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let positive: u64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let statistic = (2 * positive) as f64 / 2.0 - total as f64 / 2.0;

    let dist = positive_sum_distribution(&ranks);
    let observed = (2 * positive).abs_diff(total);
    let p_value: f64 = dist
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as u64).abs_diff(total) >= observed)
        .map(|(_, p)| p)
        .sum();
    let p_value = p_value.min(1.0);
    Ok(WilcoxonResult {
        statistic,
        n_effective: n,
        p_value,
        significant: p_value < ALPHA,
    })
}

/// Null distribution of the positive-rank sum: entry `s` is the probability
/// that the doubled ranks with a `+` sign add up to `s`.
fn positive_sum_distribution(ranks: &[u64]) -> Vec<f64> {
    let total: u64 = ranks.iter().sum();
    let mut dist = vec![0.0f64; total as usize + 1];
    dist[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach + r).rev() {
            let without = if s <= reach { dist[s] } else { 0.0 };
            let with = if s >= r { dist[s - r] } else { 0.0 };
            dist[s] = 0.5 * without + 0.5 * with;
        }
        reach += r;
    }
    dist
}

/// All pairwise tests between labelled samples, `[i][j]` comparing `i` with `j`.
pub fn wilcoxon_matrix(samples: &[Vec<f64>]) -> Result<Vec<Vec<WilcoxonResult>>> {
    samples
        .iter()
        .map(|a| samples.iter().map(|b| wilcoxon_exact(a, b)).collect())
        .collect()
}

/// p-values to three decimals, then a blank line, then the 0/1 significance matrix.
pub fn format_wilcoxon_csv(labels: &[String], results: &[Vec<WilcoxonResult>]) -> (String, String) {
    let header: String = labels.iter().map(|l| format!(",{l}")).collect();
    let mut p = format!("{header}\n");
    let mut sig = format!("{header}\n");
    for (label, row) in labels.iter().zip(results) {
        p.push_str(label);
        sig.push_str(label);
        for r in row {
            let _ = write!(p, ",{:.3}", r.p_value);
            let _ = write!(sig, ",{}", u8::from(r.significant));
        }
        p.push('\n');
        sig.push('\n');
    }
    (p, sig)
}

/// Weighted score for using another map instead of the baseline (own) map:
/// `+2`/`-2` when the mean moves by more than one baseline standard error,
/// otherwise `+1`/`-1` by direction. Self comparisons score 0.
pub fn rank_score(baseline: &FoldScores, other: &FoldScores, self_comparison: bool) -> i32 {
    if self_comparison {
        0
    } else if other.mean > baseline.mean + baseline.stderr {
        2
    } else if other.mean < baseline.mean - baseline.stderr {
        -2
    } else if other.mean >= baseline.mean {
        1
    } else {
        -1
    }
}

/// Speaker × map score grid with column totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<i32>>,
    pub totals: Vec<i32>,
}

impl RankTable {
    /// Indices of the columns with the highest total.
    pub fn best(&self) -> Vec<usize> {
        let Some(&max) = self.totals.iter().max() else {
            return Vec::new();
        };
        (0..self.totals.len()).filter(|&j| self.totals[j] == max).collect()
    }

    pub fn to_csv(&self) -> String {
        let sign = |v: i32| if v > 0 { format!("+{v}") } else { v.to_string() };
        let mut out: String = self.columns.iter().map(|c| format!(",{c}")).collect();
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(label);
            for &v in row {
                out.push(',');
                out.push_str(&sign(v));
            }
            out.push('\n');
        }
        out.push_str("Total");
        for &t in &self.totals {
            out.push(',');
            out.push_str(&sign(t));
        }
        out.push('\n');
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput("rank grid"))?;
        let columns: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for (n, line) in lines {
            let mut fields = line.split(',').map(str::trim);
            let label = fields.next().unwrap_or_default();
            if label.eq_ignore_ascii_case("total") {
                continue;
            }
            let row = fields
                .map(|f| {
                    f.trim_start_matches('+')
                        .parse::<i32>()
                        .map_err(|_| Error::parse("rank grid", n + 1, format!("bad score {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(label.to_string());
            cells.push(row);
        }
        rank_table(rows, columns, cells)
    }
}

/// Column totals of a rectangular grid of scores in `-2..=2`.
pub fn rank_table(rows: Vec<String>, columns: Vec<String>, cells: Vec<Vec<i32>>) -> Result<RankTable> {
    if rows.len() != cells.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: cells.len(),
        });
    }
    for row in &cells {
        if row.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: columns.len(),
                right: row.len(),
            });
        }
        if let Some(v) = row.iter().find(|v| !(-2..=2).contains(*v)) {
            return Err(Error::Config(format!("rank score {v} outside -2..=2")));
        }
    }
    let totals = (0..columns.len()).map(|j| cells.iter().map(|r| r[j]).sum()).collect();
    Ok(RankTable {
        rows,
        columns,
        cells,
        totals,
    })
}
