use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "diachron", version, about = "Diachronic feature detection, ensembling and trend analysis")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Corpus manifest (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Pattern catalog (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub catalog: Option<PathBuf>,
    /// Neural predictions (JSON Lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub neural: Option<PathBuf>,
    /// Gold standard file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub gold: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "DIACHRON_OUT", default_value = "diachron-out", value_name = "DIR")]
    pub out: PathBuf,
    /// Calibration bins.
    #[arg(long, global = true, default_value_t = 10)]
    pub bins: usize,
    /// Regex weight w_r; the transformer weight is 1 − w_r.
    #[arg(long, global = true, default_value_t = 0.65)]
    pub regex_weight: f64,
    #[arg(long, global = true, default_value_t = 0.75)]
    pub high_conf: f64,
    #[arg(long, global = true, default_value_t = 0.25)]
    pub low_conf: f64,
    /// Context window in tokens on each side of a match.
    #[arg(long, global = true, default_value_t = 20)]
    pub window: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write only this format where both are available.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Number of flat clusters cut from the dendrogram.
    #[arg(long, global = true, default_value_t = 3)]
    pub cut: usize,
    /// Principal components to keep.
    #[arg(long, global = true, default_value_t = 5)]
    pub components: usize,
    /// Texts at each end of the chronology compared by Cohen's d.
    #[arg(long, global = true, default_value_t = 5)]
    pub effect_group: usize,
    /// Significance level for both trend tests.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load, normalize and tokenize the corpus; write a summary and token cache.
    Ingest,
    /// Scan the corpus with the catalog; write the regex frequency matrix.
    Detect,
    /// Export weak labels as JSON Lines.
    Labels,
    /// Combine regex and neural frequencies.
    Ensemble,
    /// Agreement, calibration and gold-standard metrics.
    Evaluate,
    /// Trend tests, effect sizes, ANOVA, PCA and clustering.
    Trends,
    /// Consolidated report and plot data.
    Report,
    /// Write the seeded synthetic corpus, catalog, stub predictions and gold file.
    Synth,
    /// Run every analysis command in order.
    Pipeline,
}
