//! GloVe: weighted least squares on log co-occurrence counts, trained with AdaGrad.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::hogwild::{dot, SharedMatrix};
use super::{build_vocab, index_sentences, shard_ranges, Algorithm, EmbeddingModel, TrainConfig};
use crate::corpus::CultureCorpus;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

/// Symmetric, distance-weighted co-occurrence counts.
///
/// Two tokens `d` positions apart inside one sentence (with `d <= window`)
/// add `1/d` to both `(a, b)` and `(b, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurMatrix {
    size: usize,
    /// Sorted by `(row, col)`.
    entries: Vec<(u32, u32, f64)>,
}

impl CooccurMatrix {
    pub fn from_sentences(sentences: &[Vec<u32>], size: usize, window: usize, budget: usize) -> Result<Self> {
        let mut counts: HashMap<(u32, u32), f64> = HashMap::new();
        for s in sentences {
            for i in 0..s.len() {
                for j in (i + 1)..s.len().min(i + window + 1) {
                    let w = 1.0 / (j - i) as f64;
                    *counts.entry((s[i], s[j])).or_default() += w;
                    *counts.entry((s[j], s[i])).or_default() += w;
                }
            }
            if counts.len() > budget {
                return Err(Error::InsufficientData(format!(
                    "co-occurrence matrix exceeds the budget of {budget} entries"
                )));
            }
        }
        let mut entries: Vec<_> = counts.into_iter().map(|((a, b), x)| (a, b, x)).collect();
        entries.sort_unstable_by_key(|&(a, b, _)| (a, b));
        Ok(CooccurMatrix { size, entries })
    }

    /// Builds a matrix from explicit `(row, col, count)` triples.
    pub fn from_entries(size: usize, mut entries: Vec<(u32, u32, f64)>) -> Result<Self> {
        if let Some(&(a, b, x)) = entries
            .iter()
            .find(|&&(a, b, x)| a as usize >= size || b as usize >= size || !(x > 0.0 && x.is_finite()))
        {
            return Err(Error::Argument(format!("bad co-occurrence entry ({a}, {b}, {x})")));
        }
        entries.sort_unstable_by_key(|&(a, b, _)| (a, b));
        Ok(CooccurMatrix { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn get(&self, a: u32, b: u32) -> f64 {
        self.entries
            .binary_search_by_key(&(a, b), |&(x, y, _)| (x, y))
            .map(|i| self.entries[i].2)
            .unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Raw GloVe parameters after training.
#[derive(Debug, Clone)]
pub struct GloveFit {
    pub dim: usize,
    pub word: Vec<f32>,
    pub context: Vec<f32>,
    pub word_bias: Vec<f32>,
    pub context_bias: Vec<f32>,
    /// Mean weighted loss per entry, one value per epoch.
    pub epoch_loss: Vec<f64>,
}

impl GloveFit {
    pub fn word_row(&self, i: usize) -> &[f32] {
        &self.word[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_row(&self, i: usize) -> &[f32] {
        &self.context[i * self.dim..(i + 1) * self.dim]
    }

    /// Word plus context vectors, the table exported as the embedding.
    pub fn summed(&self) -> Vec<f32> {
        self.word.iter().zip(&self.context).map(|(a, b)| a + b).collect()
    }
}

struct Params {
    w: SharedMatrix,
    gsq_w: SharedMatrix,
    bias: SharedMatrix,
    gsq_bias: SharedMatrix,
}

struct Glove<'a> {
    cfg: &'a TrainConfig,
    size: usize,
    params: Params,
}

impl Glove<'_> {
    /// Word rows are `0..size`, context rows `size..2*size`.
    fn step(&self, a: usize, b: usize, x: f64) -> f64 {
        let p = &self.params;
        let (ia, ib) = (a, self.size + b);
        let wa = p.w.row_mut(ia);
        let wb = p.w.row_mut(ib);
        let ba = &mut p.bias.row_mut(ia)[0];
        let bb = &mut p.bias.row_mut(ib)[0];
        let diff = f64::from(dot(wa, wb)) + f64::from(*ba) + f64::from(*bb) - x.ln();
        let weight = if x < self.cfg.glove_xmax {
            (x / self.cfg.glove_xmax).powf(self.cfg.glove_alpha)
        } else {
            1.0
        };
        let fdiff = weight * diff;
        let eta = self.cfg.learning_rate;
        let ga = p.gsq_w.row_mut(ia);
        let gb = p.gsq_w.row_mut(ib);
        for d in 0..wa.len() {
            let t1 = fdiff * f64::from(wb[d]);
            let t2 = fdiff * f64::from(wa[d]);
            wa[d] -= (eta * t1 / f64::from(ga[d]).sqrt()) as f32;
            wb[d] -= (eta * t2 / f64::from(gb[d]).sqrt()) as f32;
            ga[d] += (t1 * t1) as f32;
            gb[d] += (t2 * t2) as f32;
        }
        let gba = &mut p.gsq_bias.row_mut(ia)[0];
        *ba -= (eta * fdiff / f64::from(*gba).sqrt()) as f32;
        *gba += (fdiff * fdiff) as f32;
        let gbb = &mut p.gsq_bias.row_mut(ib)[0];
        *bb -= (eta * fdiff / f64::from(*gbb).sqrt()) as f32;
        *gbb += (fdiff * fdiff) as f32;
        0.5 * fdiff * diff
    }
}

/// Fits GloVe parameters to an existing co-occurrence matrix.
pub fn train_glove_cooccur(cooc: &CooccurMatrix, config: &TrainConfig) -> Result<GloveFit> {
    if cooc.is_empty() {
        return Err(Error::InsufficientData("empty co-occurrence matrix".into()));
    }
    let dim = config.dim;
    let size = cooc.size();
    let mut rng = rng_from(derive_seed(config.seed, &["glove-init"]));
    let mut init = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| (rng.random::<f32>() - 0.5) / (dim + 1) as f32)
            .collect()
    };
    let glove = Glove {
        cfg: config,
        size,
        params: Params {
            w: SharedMatrix::new(init(2 * size * dim), dim),
            gsq_w: SharedMatrix::new(vec![1.0; 2 * size * dim], dim),
            bias: SharedMatrix::new(init(2 * size), 1),
            gsq_bias: SharedMatrix::new(vec![1.0; 2 * size], 1),
        },
    };

    let mut order: Vec<usize> = (0..cooc.entries.len()).collect();
    let mut shuffle_rng = rng_from(derive_seed(config.seed, &["glove-shuffle"]));
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let shards = shard_ranges(order.len(), config.threads);
        let run = |range: std::ops::Range<usize>| -> f64 {
            order[range]
                .iter()
                .map(|&k| {
                    let (a, b, x) = cooc.entries[k];
                    glove.step(a as usize, b as usize, x)
                })
                .sum()
        };
        let loss: f64 = if shards.len() == 1 {
            run(shards[0].clone())
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .cloned()
                    .map(|r| {
                        let run = &run;
                        scope.spawn(move || run(r))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("glove worker")).sum()
            })
        };
        epoch_loss.push(loss / cooc.entries.len() as f64);
    }

    let w = glove.params.w.into_inner();
    let bias = glove.params.bias.into_inner();
    Ok(GloveFit {
        dim,
        word: w[..size * dim].to_vec(),
        context: w[size * dim..].to_vec(),
        word_bias: bias[..size].to_vec(),
        context_bias: bias[size..].to_vec(),
        epoch_loss,
    })
}

pub fn train_glove(corpus: &CultureCorpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    let mut cfg = config.clone();
    cfg.algorithm = Algorithm::Glove;
    cfg.validate()?;
    let vocab = build_vocab(corpus, cfg.min_count)?;
    let sentences = index_sentences(corpus, &vocab);
    let cooc = CooccurMatrix::from_sentences(&sentences, vocab.len(), cfg.window, cfg.cooccur_budget)?;
    if cooc.is_empty() {
        return Err(Error::CorpusTooSmall(format!(
            "no co-occurring vocabulary pairs in `{}`",
            corpus.region
        )));
    }
    let fit = train_glove_cooccur(&cooc, &cfg)?;
    let vectors = fit.summed();
    if let Some(i) = vectors.iter().position(|x| !x.is_finite()) {
        return Err(Error::Format(format!(
            "training diverged: non-finite entry for `{}`",
            vocab.word(i / cfg.dim)
        )));
    }
    Ok(EmbeddingModel {
        region: corpus.region.clone(),
        algorithm: Algorithm::Glove,
        dim: cfg.dim,
        config: cfg,
        vocab,
        vectors,
        subwords: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_distance_weighted_and_symmetric() {
        // a=0 b=1 c=2
        let m = CooccurMatrix::from_sentences(&[vec![0, 1, 2]], 3, 10, usize::MAX).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.get(1, 2), 1.0);
        for &(a, b, x) in m.entries() {
            assert_eq!(m.get(b, a), x);
        }
        assert_eq!(m.entries().len(), 6);
    }

    #[test]
    fn window_limits_pairs() {
        let m = CooccurMatrix::from_sentences(&[vec![0, 1, 2]], 3, 1, usize::MAX).unwrap();
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(CooccurMatrix::from_sentences(&[vec![0, 1, 2]], 3, 10, 2).is_err());
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let m = CooccurMatrix::from_entries(3, vec![]).unwrap();
        assert!(train_glove_cooccur(&m, &TrainConfig::new(Algorithm::Glove)).is_err());
        assert!(CooccurMatrix::from_entries(1, vec![(0, 1, 1.0)]).is_err());
    }
}
