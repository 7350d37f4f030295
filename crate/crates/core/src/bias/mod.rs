//! Word sets, the female/male axis and word-set bias metrics.

mod metrics;
mod space;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

pub use metrics::{
    axis_projection, gender_vector, l2_norm_difference, l2_norm_ratio, score_set, BiasScore, GenderAxis,
    GenderVector, Metric,
};
pub use space::{Normalization, VectorSpace};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WordSetKind {
    Female,
    Male,
    Neutral,
    Random,
}

impl WordSetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WordSetKind::Female => "female",
            WordSetKind::Male => "male",
            WordSetKind::Neutral => "neutral",
            WordSetKind::Random => "random",
        }
    }
}

impl fmt::Display for WordSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WordSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "female" => Ok(WordSetKind::Female),
            "male" => Ok(WordSetKind::Male),
            "neutral" | "neutral-themed" => Ok(WordSetKind::Neutral),
            "random" => Ok(WordSetKind::Random),
            other => Err(Error::Format(format!("unknown word set kind `{other}`"))),
        }
    }
}

/// A named, duplicate-free list of lowercase words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    pub name: String,
    pub words: Vec<String>,
    pub kind: WordSetKind,
}

impl WordSet {
    /// Lowercases and de-duplicates `words`, keeping first occurrences.
    pub fn new<I, S>(name: &str, words: I, kind: WordSetKind) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let words: Vec<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty() && seen.insert(w.clone()))
            .collect();
        if words.is_empty() {
            return Err(Error::InsufficientData(format!("word set `{name}` is empty")));
        }
        Ok(WordSet {
            name: name.to_string(),
            words,
            kind,
        })
    }

    /// One word per line; lines starting with `#` are comments.
    pub fn parse(name: &str, text: &str, kind: WordSetKind) -> Result<Self> {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Self::new(name, words, kind)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Reads a word-set file; the file stem names the set and the kind defaults
/// to neutral.
pub fn load_word_set(path: &Path) -> Result<WordSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Format(format!("cannot name word set from {}", path.display())))?;
    WordSet::parse(name, &text, WordSetKind::Neutral)
}

pub const MANIFEST_FILE: &str = "manifest.csv";

fn parse_manifest(text: &str) -> Result<BTreeMap<String, WordSetKind>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Format(format!("word set manifest: {e}")))?;
        let (Some(name), Some(kind)) = (row.get(0), row.get(1)) else {
            return Err(Error::Format("word set manifest rows need `name,kind`".into()));
        };
        out.insert(name.to_string(), kind.parse()?);
    }
    Ok(out)
}

/// Loads every `*.txt` set in `dir`, assigning kinds from `manifest.csv`
/// (`name,kind` rows) when present. Sets are returned sorted by name.
pub fn load_word_set_dir(dir: &Path) -> Result<Vec<WordSet>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let kinds = if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        parse_manifest(&text)?
    } else {
        BTreeMap::new()
    };
    let mut sets = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let mut set = load_word_set(&path)?;
        if let Some(kind) = kinds.get(&set.name) {
            set.kind = *kind;
        }
        sets.push(set);
    }
    sets.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(sets)
}

/// Writes `<name>.txt` for each set plus the kind manifest.
pub fn write_word_set_dir(dir: &Path, sets: &[WordSet]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("name,kind\n");
    for set in sets {
        let path = dir.join(format!("{}.txt", set.name));
        let mut body = set.words.join("\n");
        body.push('\n');
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!("{},{}\n", set.name, set.kind));
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

const SHIPPED: [(&str, &str); 8] = [
    ("childcare", include_str!("../../data/wordsets/childcare.txt")),
    ("communal", include_str!("../../data/wordsets/communal.txt")),
    ("criminal", include_str!("../../data/wordsets/criminal.txt")),
    ("excellent", include_str!("../../data/wordsets/excellent.txt")),
    ("female", include_str!("../../data/wordsets/female.txt")),
    ("government", include_str!("../../data/wordsets/government.txt")),
    ("male", include_str!("../../data/wordsets/male.txt")),
    ("threat", include_str!("../../data/wordsets/threat.txt")),
];

/// Built-in starter sets: six themed sets plus pronoun-only female and male sets.
pub fn shipped_word_sets() -> Vec<WordSet> {
    let kinds = parse_manifest(include_str!("../../data/wordsets/manifest.csv")).expect("shipped manifest");
    SHIPPED
        .iter()
        .map(|(name, text)| {
            let kind = kinds.get(*name).copied().unwrap_or(WordSetKind::Neutral);
            WordSet::parse(name, text, kind).expect("shipped set")
        })
        .collect()
}

pub fn shipped_word_set(name: &str) -> Option<WordSet> {
    shipped_word_sets().into_iter().find(|s| s.name == name)
}
