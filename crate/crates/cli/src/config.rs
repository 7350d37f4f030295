//! Run configuration: a flat `key = value` file whose keys every CLI flag can
//! override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cultbias::analysis::{PipelineParams, ScanParams};
use cultbias::bias::{Metric, Normalization};
use cultbias::corpus::DEFAULT_SAMPLE_CAP;
use cultbias::embedding::{Algorithm, ModelFormat, TrainConfig};
use cultbias::kv::KvFile;

/// Keys forwarded to [`TrainConfig::from_kv`].
const TRAIN_KEYS: &[&str] = &[
    "window",
    "dim",
    "min_count",
    "negatives",
    "epochs",
    "learning_rate",
    "subsample",
    "glove_xmax",
    "glove_alpha",
    "ngram_min",
    "ngram_max",
    "buckets",
    "cooccur_budget",
];

const RUN_KEYS: &[&str] = &[
    "input",
    "corpus_dir",
    "model_dir",
    "wordset_dir",
    "stats_dir",
    "adjectives",
    "affect",
    "out_dir",
    "spec",
    "sample_cap",
    "algorithms",
    "algorithm",
    "model_format",
    "metric",
    "normalization",
    "repeats",
    "subset_frac",
    "threshold",
    "top_k",
    "coverage",
    "statistic",
    "random_sets",
    "random_set_size",
    "seed",
    "threads",
];

pub fn known_key(key: &str) -> bool {
    RUN_KEYS.contains(&key) || TRAIN_KEYS.contains(&key)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Raw record files for `preprocess`.
    pub input: Vec<PathBuf>,
    pub corpus_dir: PathBuf,
    pub model_dir: PathBuf,
    /// `None` uses the built-in word sets.
    pub wordset_dir: Option<PathBuf>,
    pub stats_dir: PathBuf,
    pub adjectives: Option<PathBuf>,
    pub affect: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Synthetic spec; `None` uses the default spec.
    pub spec: Option<PathBuf>,
    pub sample_cap: usize,
    /// Algorithms trained by `train` and checked by `synth`.
    pub algorithms: Vec<Algorithm>,
    /// Algorithm whose models `correlate` and `adjectives` read.
    pub algorithm: Algorithm,
    pub model_format: ModelFormat,
    pub metric: Metric,
    pub normalization: Normalization,
    pub repeats: usize,
    pub subset_frac: f64,
    pub threshold: f64,
    pub top_k: usize,
    pub coverage: f64,
    /// Restricts `adjectives` to one statistic.
    pub statistic: Option<String>,
    pub random_sets: usize,
    pub random_set_size: usize,
    pub seed: u64,
    pub threads: usize,
    train_kv: KvFile,
}

fn parse_list<T>(raw: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::error::Error + Send + Sync + 'static,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(Into::into))
        .collect()
}

fn parse_format(raw: &str) -> Result<ModelFormat> {
    match raw {
        "bin" | "binary" => Ok(ModelFormat::Binary),
        "vec" | "text" => Ok(ModelFormat::Text),
        other => bail!("unknown model format `{other}` (want bin or vec)"),
    }
}

impl RunConfig {
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        if let Some(k) = kv.keys().find(|k| !known_key(k)) {
            bail!("unknown config key `{k}`");
        }
        let path = |k: &str, d: &str| PathBuf::from(kv.get(k).unwrap_or(d));
        let opt_path = |k: &str| kv.get(k).filter(|v| !v.is_empty()).map(PathBuf::from);

        let algorithms = match kv.get("algorithms") {
            Some(raw) => parse_list::<Algorithm>(raw).context("key `algorithms`")?,
            None => vec![Algorithm::SkipGram],
        };
        if algorithms.is_empty() {
            bail!("key `algorithms` lists no algorithm");
        }
        let mut train_kv = KvFile::default();
        for k in TRAIN_KEYS {
            if let Some(v) = kv.get(k) {
                train_kv.set(k, v);
            }
        }
        let cfg = RunConfig {
            input: kv.get("input").map(|v| parse_list::<PathBuf>(v)).transpose()?.unwrap_or_default(),
            corpus_dir: path("corpus_dir", "corpus"),
            model_dir: path("model_dir", "models"),
            wordset_dir: opt_path("wordset_dir"),
            stats_dir: path("stats_dir", "stats"),
            adjectives: opt_path("adjectives"),
            affect: opt_path("affect"),
            out_dir: path("out_dir", "out"),
            spec: opt_path("spec"),
            sample_cap: kv.parsed_or("sample_cap", DEFAULT_SAMPLE_CAP)?,
            algorithm: kv.parsed_or("algorithm", algorithms[0])?,
            algorithms,
            model_format: parse_format(kv.get("model_format").unwrap_or("bin"))?,
            metric: kv.parsed_or("metric", Metric::AxisProjection)?,
            normalization: kv.parsed_or("normalization", Normalization::Unit)?,
            repeats: kv.parsed_or("repeats", 5)?,
            subset_frac: kv.parsed_or("subset_frac", 0.2)?,
            threshold: kv.parsed_or("threshold", 0.1)?,
            top_k: kv.parsed_or("top_k", 10)?,
            coverage: kv.parsed_or("coverage", 0.8)?,
            statistic: kv.get("statistic").filter(|s| !s.is_empty()).map(str::to_string),
            random_sets: kv.parsed_or("random_sets", 0)?,
            random_set_size: kv.parsed_or("random_set_size", 10)?,
            seed: kv.parsed_or("seed", 1)?,
            threads: kv.parsed_or("threads", 1)?,
            train_kv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.sample_cap == 0 {
            bail!("sample_cap must be at least 1");
        }
        if self.threads == 0 {
            bail!("threads must be at least 1");
        }
        if self.repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if !(self.subset_frac > 0.0 && self.subset_frac <= 1.0) {
            bail!("subset_frac must be in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.threshold) {
            bail!("threshold must be in [0, 1)");
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            bail!("coverage must be in (0, 1]");
        }
        if self.random_sets > 0 && self.random_set_size == 0 {
            bail!("random_set_size must be at least 1");
        }
        for a in &self.algorithms {
            self.train_config(*a)?;
        }
        Ok(())
    }

    /// Training template for `algorithm`: its defaults overridden by the
    /// configured training keys, seed and thread count.
    pub fn train_config(&self, algorithm: Algorithm) -> Result<TrainConfig> {
        let mut kv = self.train_kv.clone();
        kv.set("algorithm", algorithm.as_str());
        kv.set("seed", self.seed.to_string());
        kv.set("threads", self.threads.to_string());
        let cfg = TrainConfig::from_kv(&kv)?;
        cfg.validate().with_context(|| format!("training config for {algorithm}"))?;
        Ok(cfg)
    }

    pub fn pipeline(&self) -> PipelineParams {
        PipelineParams {
            repeats: self.repeats,
            subset_frac: self.subset_frac,
            metric: self.metric,
            seed: self.seed,
            threads: self.threads,
        }
    }

    pub fn scan(&self) -> ScanParams {
        ScanParams {
            threshold: self.threshold,
            top_k: self.top_k,
            coverage: self.coverage,
            metric: self.metric,
        }
    }

    pub fn model_path(&self, region: &str, algorithm: Algorithm) -> PathBuf {
        self.model_dir
            .join(format!("{region}.{algorithm}.{}", self.model_format.extension()))
    }
}

/// Fails unless `path` exists.
pub fn require(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!("{what} `{}` does not exist", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::from_kv(&KvFile::default()).unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::SkipGram]);
        assert_eq!(cfg.algorithm, Algorithm::SkipGram);
        assert_eq!(cfg.metric, Metric::AxisProjection);
        assert_eq!((cfg.repeats, cfg.subset_frac, cfg.threshold, cfg.top_k), (5, 0.2, 0.1, 10));
        let t = cfg.train_config(Algorithm::SkipGram).unwrap();
        assert_eq!((t.window, t.dim, t.min_count), (10, 200, 5));
        assert_eq!(cfg.train_config(Algorithm::Glove).unwrap().epochs, 15);
    }

    #[test]
    fn training_keys_reach_every_algorithm() {
        let kv = KvFile::parse("algorithms = skipgram, glove\ndim = 32\nseed = 9\nthreads = 2\n").unwrap();
        let cfg = RunConfig::from_kv(&kv).unwrap();
        for a in [Algorithm::SkipGram, Algorithm::Glove] {
            let t = cfg.train_config(a).unwrap();
            assert_eq!((t.algorithm, t.dim, t.seed, t.threads), (a, 32, 9, 2));
        }
        assert_eq!(cfg.model_path("US", Algorithm::Glove), PathBuf::from("models/US.glove.bin"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_kv(&KvFile::parse("windw = 3").unwrap()).is_err());
        assert!(RunConfig::from_kv(&KvFile::parse("metric = cosine").unwrap()).is_err());
        assert!(RunConfig::from_kv(&KvFile::parse("subset_frac = 0").unwrap()).is_err());
        assert!(RunConfig::from_kv(&KvFile::parse("dim = 0").unwrap()).is_err());
        assert!(RunConfig::from_kv(&KvFile::parse("model_format = npy").unwrap()).is_err());
    }
}
