//! Negative-sampling trainers: skip-gram, CBOW and subword skip-gram.
//!
//! All three share one loop. A word's input representation is a list of rows
//! in the input matrix: just the word's own row for skip-gram and CBOW, the
//! word row plus its hashed n-gram rows for the subword model. The hidden
//! vector is the mean of those rows and the gradient is added to each of them.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use super::hogwild::{axpy, dot, SharedMatrix};
use super::subword::ngram_buckets;
use super::{build_vocab, index_sentences, shard_ranges, Algorithm, EmbeddingModel, SubwordTable, TrainConfig, Vocabulary};
use crate::corpus::CultureCorpus;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

const MIN_TABLE: usize = 1_000_000;
const MAX_TABLE: usize = 10_000_000;
const MIN_ALPHA_FRACTION: f64 = 1e-4;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    SkipGram,
    Cbow,
}

pub fn train_skipgram(corpus: &CultureCorpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with(corpus, config, Algorithm::SkipGram)
}

pub fn train_cbow(corpus: &CultureCorpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with(corpus, config, Algorithm::Cbow)
}

pub fn train_fasttext_sg(corpus: &CultureCorpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with(corpus, config, Algorithm::FastTextSg)
}

/// Unigram^0.75 table for drawing negative samples.
fn negative_table(counts: &[u64]) -> Vec<u32> {
    let size = (counts.len() * 100).clamp(MIN_TABLE, MAX_TABLE);
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(size);
    let mut word = 0usize;
    let mut cumulative = weights[0] / total;
    for slot in 0..size {
        table.push(word as u32);
        if (slot as f64 + 1.0) / size as f64 > cumulative && word + 1 < counts.len() {
            word += 1;
            cumulative += weights[word] / total;
        }
    }
    table
}

/// Probability of keeping each occurrence under frequency subsampling.
fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Vec<f32> {
    let total = vocab.kept_tokens() as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            if threshold <= 0.0 {
                return 1.0;
            }
            let ratio = threshold * total / c as f64;
            (ratio.sqrt() + ratio).min(1.0) as f32
        })
        .collect()
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    mode: Mode,
    sentences: &'a [Vec<u32>],
    keep: Vec<f32>,
    table: Vec<u32>,
    /// Input rows per word; `None` means the word's own row only.
    composite: Option<Vec<Vec<u32>>>,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    total_work: u64,
}

struct Scratch {
    hidden: Vec<f32>,
    grad: Vec<f32>,
    kept: Vec<u32>,
}

impl Trainer<'_> {
    fn input_rows<'s>(&'s self, word: u32, own: &'s mut [u32; 1]) -> &'s [u32] {
        match &self.composite {
            Some(rows) => &rows[word as usize],
            None => {
                own[0] = word;
                &own[..]
            }
        }
    }

    fn mean_rows(&self, rows: &[u32], hidden: &mut [f32]) {
        hidden.fill(0.0);
        for &r in rows {
            axpy(1.0, self.input.row(r as usize), hidden);
        }
        let scale = 1.0 / rows.len() as f32;
        hidden.iter_mut().for_each(|x| *x *= scale);
    }

    /// One positive target plus negatives against `hidden`; accumulates the
    /// input gradient in `grad`.
    fn score_target<R: Rng>(&self, rng: &mut R, target: u32, alpha: f32, hidden: &[f32], grad: &mut [f32]) {
        grad.fill(0.0);
        for k in 0..=self.cfg.negatives {
            let (word, label) = if k == 0 {
                (target, 1.0f32)
            } else {
                let w = self.table[rng.random_range(0..self.table.len())];
                if w == target {
                    continue;
                }
                (w, 0.0)
            };
            let out = self.output.row_mut(word as usize);
            let f = dot(hidden, out);
            let g = (label - 1.0 / (1.0 + (-f).exp())) * alpha;
            axpy(g, out, grad);
            axpy(g, hidden, out);
        }
    }

    fn run_shard(&self, shard: std::ops::Range<usize>, thread: usize) {
        let mut rng = rng_from(derive_seed(self.cfg.seed, &["sgns", &thread.to_string()]));
        let dim = self.cfg.dim;
        let mut s = Scratch {
            hidden: vec![0.0; dim],
            grad: vec![0.0; dim],
            kept: Vec::new(),
        };
        let window = self.cfg.window;
        for _ in 0..self.cfg.epochs {
            for sentence in &self.sentences[shard.clone()] {
                let done = self.processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                let progress = done as f64 / (self.total_work + 1) as f64;
                let alpha = (self.cfg.learning_rate * (1.0 - progress).max(MIN_ALPHA_FRACTION)) as f32;

                s.kept.clear();
                for &w in sentence {
                    let p = self.keep[w as usize];
                    if p >= 1.0 || rng.random::<f32>() < p {
                        s.kept.push(w);
                    }
                }
                if s.kept.len() < 2 {
                    continue;
                }
                for i in 0..s.kept.len() {
                    let lo = i.saturating_sub(window);
                    let hi = (i + window + 1).min(s.kept.len());
                    match self.mode {
                        Mode::SkipGram => {
                            for j in (lo..hi).filter(|&j| j != i) {
                                let mut own = [0u32];
                                let rows = self.input_rows(s.kept[i], &mut own);
                                self.mean_rows(rows, &mut s.hidden);
                                self.score_target(&mut rng, s.kept[j], alpha, &s.hidden, &mut s.grad);
                                for &r in rows {
                                    axpy(1.0, &s.grad, self.input.row_mut(r as usize));
                                }
                            }
                        }
                        Mode::Cbow => {
                            s.hidden.fill(0.0);
                            for j in (lo..hi).filter(|&j| j != i) {
                                axpy(1.0, self.input.row(s.kept[j] as usize), &mut s.hidden);
                            }
                            let scale = 1.0 / (hi - lo - 1) as f32;
                            s.hidden.iter_mut().for_each(|x| *x *= scale);
                            self.score_target(&mut rng, s.kept[i], alpha, &s.hidden, &mut s.grad);
                            for j in (lo..hi).filter(|&j| j != i) {
                                axpy(1.0, &s.grad, self.input.row_mut(s.kept[j] as usize));
                            }
                        }
                    }
                }
            }
        }
    }
}

fn train_with(corpus: &CultureCorpus, config: &TrainConfig, algorithm: Algorithm) -> Result<EmbeddingModel> {
    let mut cfg = config.clone();
    cfg.algorithm = algorithm;
    cfg.validate()?;

    let vocab = build_vocab(corpus, cfg.min_count)?;
    let sentences = index_sentences(corpus, &vocab);
    if !sentences.iter().any(|s| s.len() >= 2) {
        return Err(Error::CorpusTooSmall(format!(
            "no sentence in `{}` has two in-vocabulary tokens",
            corpus.region
        )));
    }
    let v = vocab.len();
    let dim = cfg.dim;

    let composite = (algorithm == Algorithm::FastTextSg).then(|| {
        vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                std::iter::once(i as u32)
                    .chain(
                        ngram_buckets(w, cfg.ngram_min, cfg.ngram_max, cfg.bucket_count)
                            .into_iter()
                            .map(|b| (v + b as usize) as u32),
                    )
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    });
    let input_rows = if composite.is_some() { v + cfg.bucket_count } else { v };

    let mut init_rng = rng_from(derive_seed(cfg.seed, &["init"]));
    let input: Vec<f32> = (0..input_rows * dim)
        .map(|_| (init_rng.random::<f32>() - 0.5) / dim as f32)
        .collect();

    let trainer = Trainer {
        cfg: &cfg,
        mode: if algorithm == Algorithm::Cbow { Mode::Cbow } else { Mode::SkipGram },
        sentences: &sentences,
        keep: keep_probabilities(&vocab, cfg.subsample_threshold),
        table: negative_table(vocab.counts()),
        composite,
        input: SharedMatrix::new(input, dim),
        output: SharedMatrix::new(vec![0.0; v * dim], dim),
        processed: AtomicU64::new(0),
        total_work: cfg.epochs as u64 * sentences.iter().map(|s| s.len() as u64).sum::<u64>(),
    };

    let shards = shard_ranges(sentences.len(), cfg.threads);
    if shards.len() == 1 {
        trainer.run_shard(shards[0].clone(), 0);
    } else {
        std::thread::scope(|scope| {
            for (t, shard) in shards.iter().enumerate() {
                let trainer = &trainer;
                let shard = shard.clone();
                scope.spawn(move || trainer.run_shard(shard, t));
            }
        });
    }

    let composite = trainer.composite;
    let input = trainer.input.into_inner();
    let (vectors, subwords) = match composite {
        None => (input[..v * dim].to_vec(), None),
        Some(rows) => {
            let mut vectors = vec![0f32; v * dim];
            for (w, rows) in rows.iter().enumerate() {
                let out = &mut vectors[w * dim..(w + 1) * dim];
                for &r in rows {
                    axpy(1.0, &input[r as usize * dim..(r as usize + 1) * dim], out);
                }
                let scale = 1.0 / rows.len() as f32;
                out.iter_mut().for_each(|x| *x *= scale);
            }
            let table = SubwordTable {
                ngram_min: cfg.ngram_min,
                ngram_max: cfg.ngram_max,
                buckets: cfg.bucket_count,
                vectors: input[v * dim..].to_vec(),
            };
            (vectors, Some(table))
        }
    };
    if let Some(i) = vectors.iter().position(|x| !x.is_finite()) {
        return Err(Error::Format(format!(
            "training diverged: non-finite entry for `{}`",
            vocab.word(i / dim)
        )));
    }
    Ok(EmbeddingModel {
        region: corpus.region.clone(),
        algorithm,
        config: cfg,
        vocab,
        dim,
        vectors,
        subwords,
    })
}
