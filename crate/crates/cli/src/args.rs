use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "p2v", version, about = "Phoneme-to-viseme map derivation and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive a P2V map from one or more confusion matrices.
    Cluster(ClusterArgs),
    /// Sum confusion matrices into one.
    Merge(MergeArgs),
    /// Write viseme transcriptions of words or utterances.
    Transcribe(TranscribeArgs),
    /// Count homophenes at word, phoneme and viseme level.
    Homophenes(HomophenesArgs),
    /// Align reference and hypothesis transcripts and report correctness per fold.
    Score(ScoreArgs),
    /// Pairwise exact signed-rank tests between fold-score columns.
    Wilcoxon(WilcoxonArgs),
    /// Weighted ranking table with column totals.
    Rank(RankArgs),
    /// Run a simulated experiment and write a report directory.
    Simulate(SimulateArgs),
    /// Check a map against an inventory.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Confusion matrix CSV; repeat to sum several (folds or speakers).
    #[arg(long = "cm", value_name = "CSV")]
    pub cms: Vec<PathBuf>,
    /// Per-speaker matrix for speaker-independent maps.
    #[arg(long = "speaker", value_name = "ID=CSV", value_parser = parse_speaker)]
    pub speakers: Vec<(String, PathBuf)>,
    /// Speaker left out of a speaker-independent map.
    #[arg(long, requires = "speakers", conflicts_with = "cms")]
    pub holdout: Option<String>,
    #[arg(long)]
    pub inventory: PathBuf,
    /// Minimum symmetric confusion count for two phonemes to group.
    #[arg(long, default_value_t = 1)]
    pub threshold: u64,
    /// Source recorded in the map header, e.g. `3`, `all` or `!4`.
    #[arg(long)]
    pub designation: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long = "cm", value_name = "CSV", required = true)]
    pub cms: Vec<PathBuf>,
    #[arg(long)]
    pub inventory: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranscribeArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    /// Phoneme inventory for the dictionary; inferred from the map if absent.
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    /// Word list; writes one `WORD<TAB>visemes` line per pronunciation.
    #[arg(long, conflicts_with = "transcripts", required_unless_present = "transcripts")]
    pub words: Option<PathBuf>,
    /// Transcript file (`id<TAB>words`); writes `id<TAB>visemes`.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HomophenesArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    /// Words, whitespace separated; repeats count as separate tokens.
    #[arg(long)]
    pub words: PathBuf,
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Costs {
    /// Substitution 10, deletion 7, insertion 7.
    Htk,
    Unit,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Reference transcripts, one file per fold.
    #[arg(long = "ref", value_name = "FILE", required = true)]
    pub refs: Vec<PathBuf>,
    /// Hypothesis transcripts, paired with `--ref` in order.
    #[arg(long = "hyp", value_name = "FILE", required = true)]
    pub hyps: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "htk")]
    pub costs: Costs,
    /// Also write the phoneme confusion matrix of all folds.
    #[arg(long, requires = "inventory")]
    pub confusions: Option<PathBuf>,
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WilcoxonArgs {
    /// CSV with a header `fold,<name>,<name>...` and one row per fold.
    #[arg(long)]
    pub scores: PathBuf,
    /// p-value matrix; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// 0/1 significance matrix; follows the p-values on stdout if absent.
    #[arg(long)]
    pub sig_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Grid of scores with a header row of map names and speaker rows.
    #[arg(long, conflicts_with = "scores", required_unless_present = "scores")]
    pub grid: Option<PathBuf>,
    /// Summary rows `speaker,map,mean,stderr`; the row whose map equals the
    /// speaker is that speaker's baseline.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub inventory: PathBuf,
}

fn parse_speaker(s: &str) -> Result<(String, PathBuf), String> {
    let (id, path) = s.split_once('=').ok_or_else(|| format!("expected ID=CSV, got {s:?}"))?;
    if id.is_empty() || path.is_empty() {
        return Err(format!("expected ID=CSV, got {s:?}"));
    }
    Ok((id.to_string(), PathBuf::from(path)))
}
