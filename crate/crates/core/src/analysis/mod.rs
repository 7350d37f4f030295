//! Correlating per-culture bias with gender-gap statistics.

mod adjectives;
mod pipeline;
mod regression;
pub mod report;
mod select;
mod ttest;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

pub use adjectives::{
    adjective_scan, affect_compare, load_adjective_lexicon, AdjectiveReport, Affect, AffectComparison,
    AffectLexicon, ScanParams, ScoredWord,
};
pub use pipeline::{
    averaged_signed_r2, correlation_matrix, prepare_cultures, random_word_sets, scatter_pairs,
    CorrelationMatrix, CorrelationResult, CultureView, PipelineParams,
};
pub use regression::{pearson, ranks, signed_r2, spearman};
pub use select::{feature_select, WordBiasTable};
pub use ttest::{welch_t_test, WelchTest};

use crate::error::{Error, Result};

/// Which direction of a statistic means a smaller gender gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Higher values mean less gap (e.g. parity indices).
    #[default]
    HigherIsLessGap,
    /// Higher values mean more gap (e.g. a wage gap in percent).
    HigherIsMoreGap,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::HigherIsLessGap => "higher-less-gap",
            Orientation::HigherIsMoreGap => "higher-more-gap",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher-less-gap" => Ok(Orientation::HigherIsLessGap),
            "higher-more-gap" => Ok(Orientation::HigherIsMoreGap),
            other => Err(Error::Format(format!("unknown orientation `{other}`"))),
        }
    }
}

/// One gender-gap statistic over cultures.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTable {
    pub name: String,
    pub note: String,
    pub orientation: Orientation,
    pub values: BTreeMap<String, f64>,
}

impl StatTable {
    pub fn new(name: &str, orientation: Orientation, values: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((c, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Format(format!("statistic `{name}`: non-finite value {v} for `{c}`")));
        }
        if values.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "statistic `{name}` has {} cultures, need at least 3",
                values.len()
            )));
        }
        Ok(StatTable {
            name: name.to_string(),
            note: String::new(),
            orientation,
            values,
        })
    }

    pub fn get(&self, culture: &str) -> Option<f64> {
        self.values.get(culture).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reads a `culture,value` CSV.
pub fn load_stat_csv(path: &Path, name: &str, orientation: Orientation) -> Result<StatTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    if headers.get(0) != Some("culture") || headers.get(1) != Some("value") {
        return Err(Error::Format(format!("{}: header must be `culture,value`", path.display())));
    }
    let mut values = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let culture = row.get(0).unwrap_or_default();
        let raw = row.get(1).unwrap_or_default();
        let value: f64 = raw
            .parse()
            .map_err(|_| Error::Format(format!("{} row {}: bad value `{raw}`", path.display(), i + 2)))?;
        if values.insert(culture.to_string(), value).is_some() {
            return Err(Error::Format(format!("{}: duplicate culture `{culture}`", path.display())));
        }
    }
    StatTable::new(name, orientation, values)
}

pub const STATS_MANIFEST: &str = "manifest.csv";

/// Loads statistics listed in `<dir>/manifest.csv` (`name,file,orientation,note`).
pub fn load_stats_dir(dir: &Path) -> Result<Vec<StatTable>> {
    let manifest = dir.join(STATS_MANIFEST);
    let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Format(format!("stats manifest: {e}")))?;
        let (Some(name), Some(file)) = (row.get(0), row.get(1)) else {
            return Err(Error::Format("stats manifest rows need `name,file`".into()));
        };
        let orientation = match row.get(2) {
            Some(o) if !o.is_empty() => o.parse()?,
            _ => Orientation::default(),
        };
        let mut table = load_stat_csv(&dir.join(file), name, orientation)?;
        table.note = row.get(3).unwrap_or_default().to_string();
        out.push(table);
    }
    Ok(out)
}

/// Writes each table as `<name>.csv` plus the manifest.
pub fn write_stats_dir(dir: &Path, stats: &[StatTable]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = csv::Writer::from_writer(Vec::new());
    let fmt_err = |e: csv::Error| Error::Format(e.to_string());
    manifest
        .write_record(["name", "file", "orientation", "note"])
        .map_err(fmt_err)?;
    for s in stats {
        let file = format!("{}.csv", s.name);
        let mut body = String::from("culture,value\n");
        for (c, v) in &s.values {
            body.push_str(&format!("{c},{v}\n"));
        }
        let path = dir.join(&file);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        manifest
            .write_record([s.name.as_str(), &file, s.orientation.as_str(), &s.note])
            .map_err(fmt_err)?;
    }
    let bytes = manifest.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    let path = dir.join(STATS_MANIFEST);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut values = BTreeMap::new();
        for (c, v) in [("AA", 0.5), ("BB", 0.25), ("CC", 1.0 / 3.0)] {
            values.insert(c.to_string(), v);
        }
        let mut t = StatTable::new("pay-gap", Orientation::HigherIsMoreGap, values).unwrap();
        t.note = "percent, census 2016".into();
        write_stats_dir(dir.path(), &[t.clone()]).unwrap();
        assert_eq!(load_stats_dir(dir.path()).unwrap(), vec![t]);
    }

    #[test]
    fn too_few_cultures() {
        let values = BTreeMap::from([("A".to_string(), 1.0), ("B".to_string(), 2.0)]);
        assert!(StatTable::new("s", Orientation::default(), values).is_err());
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "country,score\nA,1\nB,2\nC,3\n").unwrap();
        assert!(load_stat_csv(&p, "s", Orientation::default()).is_err());
    }
}
