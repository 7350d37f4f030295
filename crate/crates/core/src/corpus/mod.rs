//! Record ingestion, cleaning, per-region partitioning and corpus capping.

mod clean;
mod files;
mod records;
mod reservoir;

use std::collections::BTreeMap;

use serde::Deserialize;

pub use clean::{clean_record, clean_text, Rejection, PLACEHOLDERS};
pub use files::{read_corpus_dir, read_corpus_file, write_corpus_file, write_manifest, ManifestRow, CORPUS_EXT};
pub use records::{parse_records, RecordReader};
pub use reservoir::Reservoir;

use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Cap applied to each culture's corpus before training.
pub const DEFAULT_SAMPLE_CAP: usize = 10_000_000;

/// Minimum token count for a sentence to survive cleaning.
pub const MIN_TOKENS: usize = 3;

/// One raw short-text post.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
    pub lang: String,
    pub region: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanSentence {
    pub tokens: Vec<String>,
    pub region: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CultureCorpus {
    pub region: String,
    pub sentences: Vec<CleanSentence>,
    pub sampled: bool,
}

impl CultureCorpus {
    pub fn new(region: impl Into<String>) -> Self {
        CultureCorpus {
            region: region.into(),
            sentences: Vec::new(),
            sampled: false,
        }
    }

    /// Builds a corpus from already tokenized sentences.
    pub fn from_token_lists<I, S>(region: &str, sentences: I) -> Self
    where
        I: IntoIterator<Item = Vec<S>>,
        S: Into<String>,
    {
        CultureCorpus {
            region: region.to_string(),
            sentences: sentences
                .into_iter()
                .map(|tokens| CleanSentence {
                    tokens: tokens.into_iter().map(Into::into).collect(),
                    region: region.to_string(),
                })
                .collect(),
            sampled: false,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// Groups sentences by their region tag. Regions without sentences never appear.
pub fn partition_by_region<I>(sentences: I) -> BTreeMap<String, CultureCorpus>
where
    I: IntoIterator<Item = CleanSentence>,
{
    let mut out: BTreeMap<String, CultureCorpus> = BTreeMap::new();
    for sentence in sentences {
        out.entry(sentence.region.clone())
            .or_insert_with(|| CultureCorpus::new(sentence.region.clone()))
            .sentences
            .push(sentence);
    }
    out
}

/// Caps a corpus at `cap` sentences by uniform sampling without replacement.
///
/// Corpora at or under the cap come back untouched with `sampled == false`.
/// Sampled sentences keep their original relative order.
pub fn sample_cap(corpus: CultureCorpus, cap: usize, seed: u64) -> Result<CultureCorpus> {
    if cap == 0 {
        return Err(Error::Argument("sampling cap must be at least 1".into()));
    }
    if corpus.sentences.len() <= cap {
        return Ok(CultureCorpus {
            sampled: false,
            ..corpus
        });
    }
    let mut reservoir = Reservoir::new(cap, seed)?;
    for sentence in corpus.sentences {
        reservoir.push(sentence);
    }
    Ok(CultureCorpus {
        region: corpus.region,
        sentences: reservoir.into_sample(),
        sampled: true,
    })
}

/// Seed used for a region's reservoir, derived from the run's master seed.
pub fn region_seed(master: u64, region: &str) -> u64 {
    derive_seed(master, &["sample", region])
}

#[derive(Debug, Default, Clone, Copy)]
struct RegionTally {
    accepted: u64,
    non_english: u64,
    too_short: u64,
}

/// Result of streaming raw records through cleaning and per-region capping.
#[derive(Debug)]
pub struct Preprocessed {
    pub corpora: BTreeMap<String, CultureCorpus>,
    pub manifest: Vec<ManifestRow>,
    pub malformed: u64,
}

/// Cleans every record from `sources`, partitions by region and caps each
/// region with its own reservoir, so memory stays bounded by `cap` per region.
///
/// The result is identical to cleaning, calling [`partition_by_region`] and
/// then [`sample_cap`] with [`region_seed`] on each corpus.
pub fn preprocess<R, I>(sources: I, cap: usize, seed: u64) -> Result<Preprocessed>
where
    R: std::io::BufRead,
    I: IntoIterator<Item = R>,
{
    if cap == 0 {
        return Err(Error::Argument("sampling cap must be at least 1".into()));
    }
    let mut tallies: BTreeMap<String, RegionTally> = BTreeMap::new();
    let mut reservoirs: BTreeMap<String, Reservoir<CleanSentence>> = BTreeMap::new();
    let mut malformed = 0;
    for source in sources {
        let mut reader = parse_records(source);
        for rec in reader.by_ref() {
            let rec = rec?;
            let tally = tallies.entry(rec.region.clone()).or_default();
            match clean_record(&rec) {
                Ok(sentence) => {
                    tally.accepted += 1;
                    if !reservoirs.contains_key(&rec.region) {
                        let r = Reservoir::new(cap, region_seed(seed, &rec.region))?;
                        reservoirs.insert(rec.region.clone(), r);
                    }
                    reservoirs
                        .get_mut(&rec.region)
                        .expect("inserted above")
                        .push(sentence);
                }
                Err(Rejection::NonEnglish) => tally.non_english += 1,
                Err(Rejection::TooShort) => tally.too_short += 1,
            }
        }
        malformed += reader.malformed();
    }

    let mut corpora = BTreeMap::new();
    let mut manifest = Vec::new();
    for (region, tally) in tallies {
        let (sampled, sentences) = match reservoirs.remove(&region) {
            Some(r) => (r.overflowed(), r.into_sample()),
            None => (false, Vec::new()),
        };
        manifest.push(ManifestRow {
            region: region.clone(),
            accepted: tally.accepted,
            rejected_non_english: tally.non_english,
            rejected_too_short: tally.too_short,
            written: sentences.len() as u64,
            sampled,
            seed: region_seed(seed, &region),
        });
        if !sentences.is_empty() {
            corpora.insert(
                region.clone(),
                CultureCorpus {
                    region,
                    sentences,
                    sampled,
                },
            );
        }
    }
    Ok(Preprocessed {
        corpora,
        manifest,
        malformed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(region: &str, n: usize) -> CleanSentence {
        CleanSentence {
            tokens: (0..3).map(|i| format!("w{n}_{i}")).collect(),
            region: region.to_string(),
        }
    }

    #[test]
    fn partition_groups_by_region() {
        let input = vec![sentence("US-CA", 0), sentence("US-CA", 1), sentence("US-NY", 2)];
        let parts = partition_by_region(input);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts["US-CA"].len(), 2);
        assert_eq!(parts["US-NY"].len(), 1);
    }

    #[test]
    fn partition_empty_and_many_regions() {
        assert!(partition_by_region(Vec::new()).is_empty());
        let input: Vec<_> = (0..99).map(|i| sentence(&format!("C{i:02}"), i)).collect();
        assert_eq!(partition_by_region(input).len(), 99);
    }

    #[test]
    fn sample_cap_small_corpus_unchanged() {
        let mut corpus = CultureCorpus::new("MU");
        corpus.sentences = (0..980).map(|i| sentence("MU", i)).collect();
        let out = sample_cap(corpus.clone(), 100_000, 7).unwrap();
        assert!(!out.sampled);
        assert_eq!(out, corpus);
    }

    #[test]
    fn sample_cap_exact_and_deterministic() {
        let mut corpus = CultureCorpus::new("US-CA");
        corpus.sentences = (0..6_500).map(|i| sentence("US-CA", i)).collect();
        let a = sample_cap(corpus.clone(), 1_000, 11).unwrap();
        let b = sample_cap(corpus.clone(), 1_000, 11).unwrap();
        let c = sample_cap(corpus, 1_000, 12).unwrap();
        assert!(a.sampled);
        assert_eq!(a.len(), 1_000);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn streaming_preprocess_matches_batch_path() {
        let mut lines = String::new();
        for i in 0..3_000 {
            let region = ["US-CA", "US-NY", "US-TX"][i % 3];
            let lang = if i % 17 == 0 { "es" } else { "en" };
            let text = if i % 13 == 0 { "too short".to_string() } else { format!("post number {i} here") };
            lines.push_str(&format!(
                r#"{{"id":"{i}","text":"{text}","lang":"{lang}","region":"{region}"}}"#
            ));
            lines.push('\n');
        }
        lines.push_str("{broken\n");
        let out = preprocess([lines.as_bytes()], 500, 99).unwrap();
        assert_eq!(out.malformed, 1);
        assert_eq!(out.corpora.len(), 3);

        let sentences = parse_records(lines.as_bytes())
            .filter_map(|r| clean_record(&r.unwrap()).ok());
        let batch = partition_by_region(sentences);
        for (region, corpus) in batch {
            let capped = sample_cap(corpus, 500, region_seed(99, &region)).unwrap();
            assert_eq!(out.corpora[&region], capped);
        }
        let total: u64 = out.manifest.iter().map(|r| r.accepted + r.rejected_non_english + r.rejected_too_short).sum();
        assert_eq!(total, 3_000);
    }

    #[test]
    fn sample_cap_rejects_zero() {
        assert!(matches!(
            sample_cap(CultureCorpus::new("X"), 0, 1),
            Err(Error::Argument(_))
        ));
    }
}
