//! `cultbias`: culture-level gender-bias pipeline.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3 oracle failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use cultbias::kv::KvFile;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "cultbias", version, about = "Culture-level gender bias in word embeddings")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, env = "CULTBIAS_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed (key `seed`).
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (key `threads`); 1 makes every output deterministic.
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Override any config key.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// More log output (-v debug, -vv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean raw records into capped per-region corpus files.
    Preprocess(PreprocessArgs),
    /// Train one model per region and algorithm.
    Train(TrainArgs),
    /// Correlate word-set bias with each statistic.
    Correlate(CorrelateArgs),
    /// Scan adjectives against statistics and compare affect scores.
    Adjectives(AdjectivesArgs),
    /// Grid of algorithms × metrics with selection on all cultures.
    Compare(CompareArgs),
    /// Generate a synthetic world, train it and check the oracles.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    /// Raw line-delimited JSON files (key `input`).
    #[arg(long)]
    input: Vec<String>,
    #[arg(long)]
    corpus_dir: Option<String>,
    #[arg(long)]
    sample_cap: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    corpus_dir: Option<String>,
    #[arg(long)]
    model_dir: Option<String>,
    /// Comma-separated: skipgram, cbow, glove, fasttext-sg.
    #[arg(long)]
    algorithms: Option<String>,
    /// `bin` or `vec`.
    #[arg(long)]
    model_format: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    min_count: Option<String>,
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    #[arg(long)]
    model_dir: Option<String>,
    #[arg(long)]
    wordset_dir: Option<String>,
    #[arg(long)]
    stats_dir: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    model_format: Option<String>,
    /// `unit` or `raw`.
    #[arg(long)]
    normalization: Option<String>,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    #[arg(long)]
    algorithm: Option<String>,
    /// axis-projection, l2-difference or l2-ratio.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    subset_frac: Option<String>,
    /// Number of random vocabulary sets added as extra columns.
    #[arg(long)]
    random_sets: Option<String>,
    #[arg(long)]
    random_set_size: Option<String>,
}

#[derive(Args, Debug)]
struct AdjectivesArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    /// Adjective list, one word per line.
    #[arg(long)]
    adjectives: Option<String>,
    /// `word,valence,dominance` CSV.
    #[arg(long)]
    affect: Option<String>,
    /// Only this statistic (default: all).
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    top_k: Option<String>,
    #[arg(long)]
    coverage: Option<String>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: AnalysisArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Synthetic spec file (default spec when absent).
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
}

type Overrides = Vec<(&'static str, Option<String>)>;

impl AnalysisArgs {
    fn overrides(&self) -> Overrides {
        vec![
            ("model_dir", self.model_dir.clone()),
            ("wordset_dir", self.wordset_dir.clone()),
            ("stats_dir", self.stats_dir.clone()),
            ("out_dir", self.out_dir.clone()),
            ("model_format", self.model_format.clone()),
            ("normalization", self.normalization.clone()),
        ]
    }
}

impl Command {
    fn overrides(&self) -> Overrides {
        match self {
            Command::Preprocess(a) => vec![
                ("input", (!a.input.is_empty()).then(|| a.input.join(","))),
                ("corpus_dir", a.corpus_dir.clone()),
                ("sample_cap", a.sample_cap.clone()),
            ],
            Command::Train(a) => vec![
                ("corpus_dir", a.corpus_dir.clone()),
                ("model_dir", a.model_dir.clone()),
                ("algorithms", a.algorithms.clone()),
                ("model_format", a.model_format.clone()),
                ("dim", a.dim.clone()),
                ("epochs", a.epochs.clone()),
                ("window", a.window.clone()),
                ("min_count", a.min_count.clone()),
            ],
            Command::Correlate(a) => {
                let mut o = a.common.overrides();
                o.extend([
                    ("algorithm", a.algorithm.clone()),
                    ("metric", a.metric.clone()),
                    ("repeats", a.repeats.clone()),
                    ("subset_frac", a.subset_frac.clone()),
                    ("random_sets", a.random_sets.clone()),
                    ("random_set_size", a.random_set_size.clone()),
                ]);
                o
            }
            Command::Adjectives(a) => {
                let mut o = a.common.overrides();
                o.extend([
                    ("algorithm", a.algorithm.clone()),
                    ("metric", a.metric.clone()),
                    ("adjectives", a.adjectives.clone()),
                    ("affect", a.affect.clone()),
                    ("statistic", a.statistic.clone()),
                    ("threshold", a.threshold.clone()),
                    ("top_k", a.top_k.clone()),
                    ("coverage", a.coverage.clone()),
                ]);
                o
            }
            Command::Compare(a) => a.common.overrides(),
            Command::Synth(a) => vec![
                ("spec", a.spec.clone()),
                ("out_dir", a.out_dir.clone()),
                ("algorithms", a.algorithms.clone()),
                ("metric", a.metric.clone()),
                ("dim", a.dim.clone()),
                ("epochs", a.epochs.clone()),
            ],
        }
    }
}

/// Config file, then `--set` pairs, then dedicated flags.
fn build_config(cli: &Cli) -> anyhow::Result<(RunConfig, KvFile)> {
    let mut kv = match &cli.config {
        Some(p) => KvFile::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => KvFile::default(),
    };
    for pair in &cli.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{pair}`"))?;
        kv.set(k.trim(), v.trim());
    }
    let mut flags = cli.command.overrides();
    flags.push(("seed", cli.seed.clone()));
    flags.push(("threads", cli.threads.clone()));
    for (k, v) in flags {
        if let Some(v) = v {
            kv.set(k, v);
        }
    }
    Ok((RunConfig::from_kv(&kv)?, kv))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    let (cfg, kv) = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            log::error!("config: {e:#}");
            return ExitCode::from(1);
        }
    };
    let res = match &cli.command {
        Command::Preprocess(_) => commands::preprocess(&cfg),
        Command::Train(_) => commands::train(&cfg),
        Command::Correlate(_) => commands::correlate(&cfg),
        Command::Adjectives(_) => commands::adjectives(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
        Command::Synth(_) => commands::synth(&cfg, kv.get("seed").is_some()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{f}");
            ExitCode::from(f.code())
        }
    }
}
