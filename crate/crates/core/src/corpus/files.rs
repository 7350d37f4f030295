use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CleanSentence, CultureCorpus};
use crate::error::{Error, Result};

/// Corpus files use this extension; the file stem is the region key.
pub const CORPUS_EXT: &str = "txt";

/// Writes one sentence per line, tokens separated by single spaces.
pub fn write_corpus_file(path: &Path, corpus: &CultureCorpus) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in &corpus.sentences {
        writeln!(w, "{}", s.tokens.join(" ")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_corpus_file(path: &Path, region: &str) -> Result<CultureCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = CultureCorpus::new(region);
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            continue;
        }
        corpus.sentences.push(CleanSentence {
            tokens,
            region: region.to_string(),
        });
    }
    Ok(corpus)
}

/// Reads every `<region>.txt` file in a directory.
pub fn read_corpus_dir(dir: &Path) -> Result<BTreeMap<String, CultureCorpus>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(CORPUS_EXT) {
            continue;
        }
        let Some(region) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        out.insert(region.to_string(), read_corpus_file(&path, region)?);
    }
    Ok(out)
}

/// One line of the preprocessing manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub region: String,
    pub accepted: u64,
    pub rejected_non_english: u64,
    pub rejected_too_short: u64,
    pub written: u64,
    pub sampled: bool,
    pub seed: u64,
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    let header = [
        "region",
        "accepted",
        "rejected_non_english",
        "rejected_too_short",
        "written",
        "sampled",
        "seed",
    ];
    let res = w.write_record(header).and_then(|_| {
        for r in rows {
            w.write_record([
                r.region.clone(),
                r.accepted.to_string(),
                r.rejected_non_english.to_string(),
                r.rejected_too_short.to_string(),
                r.written.to_string(),
                r.sampled.to_string(),
                r.seed.to_string(),
            ])?;
        }
        Ok(())
    });
    res.map_err(|e| Error::Format(e.to_string()))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = CultureCorpus::from_token_lists("US-NY", vec![vec!["a", "b", "c"], vec!["d", "e", "f", "g"]]);
        let path = dir.path().join("US-NY.txt");
        write_corpus_file(&path, &corpus).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a b c\nd e f g\n");
        let all = read_corpus_dir(dir.path()).unwrap();
        assert_eq!(all["US-NY"], corpus);
    }
}
