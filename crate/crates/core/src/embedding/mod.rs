//! Per-culture word vectors: vocabulary, four training algorithms and model files.

mod glove;
mod hogwild;
mod io;
mod sgns;
pub mod subword;
mod vocab;

use std::fmt;
use std::str::FromStr;

pub use glove::{train_glove, train_glove_cooccur, CooccurMatrix, GloveFit};
pub use io::{load_model, save_model, save_model_text, ModelFormat, MAGIC, FORMAT_VERSION};
pub use sgns::{train_cbow, train_fasttext_sg, train_skipgram};
pub use vocab::{build_vocab, Vocabulary};

use crate::corpus::CultureCorpus;
use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SkipGram,
    Cbow,
    Glove,
    FastTextSg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::SkipGram,
        Algorithm::Cbow,
        Algorithm::Glove,
        Algorithm::FastTextSg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::SkipGram => "skipgram",
            Algorithm::Cbow => "cbow",
            Algorithm::Glove => "glove",
            Algorithm::FastTextSg => "fasttext-sg",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown algorithm `{s}`")))
    }
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub window: usize,
    pub dim: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial SGD step for the word2vec family, AdaGrad step for GloVe.
    pub learning_rate: f64,
    pub seed: u64,
    pub threads: usize,
    pub subsample_threshold: f64,
    pub glove_xmax: f64,
    pub glove_alpha: f64,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub bucket_count: usize,
    /// Upper bound on distinct co-occurrence pairs kept in memory for GloVe.
    pub cooccur_budget: usize,
}

impl TrainConfig {
    /// Defaults for `algorithm`: window 10, 200 dimensions, min count 5.
    pub fn new(algorithm: Algorithm) -> Self {
        let (epochs, learning_rate) = match algorithm {
            Algorithm::Glove => (15, 0.05),
            _ => (5, 0.025),
        };
        TrainConfig {
            algorithm,
            window: 10,
            dim: 200,
            min_count: 5,
            negatives: 5,
            epochs,
            learning_rate,
            seed: 1,
            threads: 1,
            subsample_threshold: 1e-4,
            glove_xmax: 100.0,
            glove_alpha: 0.75,
            ngram_min: 3,
            ngram_max: 6,
            bucket_count: 2_000_000,
            cooccur_budget: 200_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Argument(m.to_string()));
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.threads == 0 {
            return fail("threads must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail("learning_rate must be positive");
        }
        if !(self.subsample_threshold.is_finite() && self.subsample_threshold >= 0.0) {
            return fail("subsample_threshold must be non-negative");
        }
        match self.algorithm {
            Algorithm::Glove => {
                if !(self.glove_xmax > 0.0 && self.glove_alpha > 0.0) {
                    return fail("glove_xmax and glove_alpha must be positive");
                }
            }
            Algorithm::FastTextSg => {
                if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
                    return fail("need 1 <= ngram_min <= ngram_max");
                }
                if self.bucket_count == 0 || self.bucket_count > u32::MAX as usize {
                    return fail("bucket_count must be in 1..=u32::MAX");
                }
            }
            _ => {}
        }
        if self.algorithm != Algorithm::Glove && self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::default();
        kv.set("algorithm", self.algorithm.as_str());
        kv.set("window", self.window.to_string());
        kv.set("dim", self.dim.to_string());
        kv.set("min_count", self.min_count.to_string());
        kv.set("negatives", self.negatives.to_string());
        kv.set("epochs", self.epochs.to_string());
        kv.set("learning_rate", self.learning_rate.to_string());
        kv.set("seed", self.seed.to_string());
        kv.set("threads", self.threads.to_string());
        kv.set("subsample", self.subsample_threshold.to_string());
        kv.set("glove_xmax", self.glove_xmax.to_string());
        kv.set("glove_alpha", self.glove_alpha.to_string());
        kv.set("ngram_min", self.ngram_min.to_string());
        kv.set("ngram_max", self.ngram_max.to_string());
        kv.set("buckets", self.bucket_count.to_string());
        kv.set("cooccur_budget", self.cooccur_budget.to_string());
        kv
    }

    /// Reads the keys written by [`TrainConfig::to_kv`]; absent keys keep the
    /// algorithm's defaults.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let algorithm: Algorithm = kv.get("algorithm").unwrap_or("skipgram").parse()?;
        let d = TrainConfig::new(algorithm);
        let cfg = TrainConfig {
            algorithm,
            window: kv.parsed_or("window", d.window)?,
            dim: kv.parsed_or("dim", d.dim)?,
            min_count: kv.parsed_or("min_count", d.min_count)?,
            negatives: kv.parsed_or("negatives", d.negatives)?,
            epochs: kv.parsed_or("epochs", d.epochs)?,
            learning_rate: kv.parsed_or("learning_rate", d.learning_rate)?,
            seed: kv.parsed_or("seed", d.seed)?,
            threads: kv.parsed_or("threads", d.threads)?,
            subsample_threshold: kv.parsed_or("subsample", d.subsample_threshold)?,
            glove_xmax: kv.parsed_or("glove_xmax", d.glove_xmax)?,
            glove_alpha: kv.parsed_or("glove_alpha", d.glove_alpha)?,
            ngram_min: kv.parsed_or("ngram_min", d.ngram_min)?,
            ngram_max: kv.parsed_or("ngram_max", d.ngram_max)?,
            bucket_count: kv.parsed_or("buckets", d.bucket_count)?,
            cooccur_budget: kv.parsed_or("cooccur_budget", d.cooccur_budget)?,
        };
        Ok(cfg)
    }
}

/// Hashed character n-gram vectors kept by subword models for unseen words.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordTable {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: usize,
    /// `buckets × dim`, row-major.
    pub vectors: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub region: String,
    pub algorithm: Algorithm,
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub dim: usize,
    /// `vocab.len() × dim`, row-major.
    pub vectors: Vec<f32>,
    pub subwords: Option<SubwordTable>,
}

impl EmbeddingModel {
    pub fn row(&self, index: usize) -> &[f32] {
        &self.vectors[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.vocab.index(word).map(|i| self.row(i))
    }

    /// Vector for any word: the trained row when in vocabulary, otherwise the
    /// mean of its n-gram bucket vectors for subword models.
    pub fn embed(&self, word: &str) -> Option<Vec<f32>> {
        if let Some(v) = self.vector(word) {
            return Some(v.to_vec());
        }
        let table = self.subwords.as_ref()?;
        let buckets = subword::ngram_buckets(word, table.ngram_min, table.ngram_max, table.buckets);
        if buckets.is_empty() {
            return None;
        }
        let mut out = vec![0f32; self.dim];
        for b in &buckets {
            let row = &table.vectors[*b as usize * self.dim..(*b as usize + 1) * self.dim];
            hogwild::axpy(1.0, row, &mut out);
        }
        let scale = 1.0 / buckets.len() as f32;
        out.iter_mut().for_each(|x| *x *= scale);
        Some(out)
    }
}

/// Trains `corpus` with the algorithm selected in `config`.
pub fn train(corpus: &CultureCorpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    match config.algorithm {
        Algorithm::SkipGram => train_skipgram(corpus, config),
        Algorithm::Cbow => train_cbow(corpus, config),
        Algorithm::Glove => train_glove(corpus, config),
        Algorithm::FastTextSg => train_fasttext_sg(corpus, config),
    }
}

/// `template` with its seed replaced by one derived from the template seed,
/// the region and the algorithm, so every culture trains on an independent
/// random stream. The derived seed is what the model's config snapshot records.
pub fn culture_config(template: &TrainConfig, region: &str) -> TrainConfig {
    TrainConfig {
        seed: derive_seed(template.seed, &["train", region, template.algorithm.as_str()]),
        ..template.clone()
    }
}

/// Sentences as vocabulary indices; out-of-vocabulary tokens are dropped.
pub(crate) fn index_sentences(corpus: &CultureCorpus, vocab: &Vocabulary) -> Vec<Vec<u32>> {
    corpus
        .sentences
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .filter_map(|t| vocab.index(t).map(|i| i as u32))
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Splits `n` items into at most `parts` contiguous, near-equal ranges.
pub(crate) fn shard_ranges(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    (0..parts)
        .map(|p| (p * n / parts)..((p + 1) * n / parts))
        .collect()
}
