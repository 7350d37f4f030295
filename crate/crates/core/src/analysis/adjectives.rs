//! Single-word adjective scan and the valence/dominance comparison.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use log::warn;

use super::{signed_r2, welch_t_test, CultureView, Orientation, StatTable, WelchTest};
use crate::bias::{Metric, WordSet, WordSetKind};
use crate::error::{Error, Result};

/// Plain adjective list: one word per line, `#` comments.
pub fn load_adjective_lexicon(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(WordSet::parse("adjectives", &text, WordSetKind::Neutral)?.words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Affect {
    Valence,
    Dominance,
}

impl Affect {
    pub fn as_str(self) -> &'static str {
        match self {
            Affect::Valence => "valence",
            Affect::Dominance => "dominance",
        }
    }
}

impl fmt::Display for Affect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Word → (valence, dominance) on the 1–9 scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffectLexicon {
    scores: BTreeMap<String, (f64, f64)>,
}

impl AffectLexicon {
    pub const MIN: f64 = 1.0;
    pub const MAX: f64 = 9.0;
    pub const NEUTRAL: f64 = 4.5;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, valence: f64, dominance: f64) -> Result<()> {
        for (name, v) in [("valence", valence), ("dominance", dominance)] {
            if !(Self::MIN..=Self::MAX).contains(&v) {
                return Err(Error::Format(format!("`{word}`: {name} {v} outside [1, 9]")));
            }
        }
        self.scores.insert(word.to_lowercase(), (valence, dominance));
        Ok(())
    }

    pub fn get(&self, word: &str, affect: Affect) -> Option<f64> {
        let (v, d) = *self.scores.get(word)?;
        Some(match affect {
            Affect::Valence => v,
            Affect::Dominance => d,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// CSV with header `word,valence,dominance`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["word", "valence", "dominance"] {
            return Err(Error::Format(format!(
                "{}: header must be `word,valence,dominance`",
                path.display()
            )));
        }
        let mut lex = AffectLexicon::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let num = |k: usize| -> Result<f64> {
                let raw = row.get(k).unwrap_or_default();
                raw.parse()
                    .map_err(|_| Error::Format(format!("{} row {}: bad number `{raw}`", path.display(), i + 2)))
            };
            lex.insert(row.get(0).unwrap_or_default(), num(1)?, num(2)?)?;
        }
        Ok(lex)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanParams {
    /// Words need `|signed R²|` strictly above this.
    pub threshold: f64,
    pub top_k: usize,
    /// Fraction of cultures whose vocabulary must contain the word.
    pub coverage: f64,
    pub metric: Metric,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            threshold: 0.1,
            top_k: 10,
            coverage: 0.8,
            metric: Metric::AxisProjection,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWord {
    pub word: String,
    pub r2: f64,
    pub n_cultures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffectComparison {
    pub affect: Affect,
    /// Lo-gap group as the first sample.
    pub test: WelchTest,
    /// Adjectives left out because the lexicon has no score for them.
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjectiveReport {
    pub statistic: String,
    pub orientation: Orientation,
    pub threshold: f64,
    pub top_k: usize,
    /// Every surviving adjective whose female bias goes with a smaller gap,
    /// sorted by `|r2|` descending.
    pub lo_gap: Vec<ScoredWord>,
    pub hi_gap: Vec<ScoredWord>,
    pub scanned: usize,
    pub covered: usize,
    pub valence: Option<AffectComparison>,
    pub dominance: Option<AffectComparison>,
}

impl AdjectiveReport {
    pub fn lo_top(&self) -> &[ScoredWord] {
        &self.lo_gap[..self.lo_gap.len().min(self.top_k)]
    }

    pub fn hi_top(&self) -> &[ScoredWord] {
        &self.hi_gap[..self.hi_gap.len().min(self.top_k)]
    }
}

fn by_strength(a: &ScoredWord, b: &ScoredWord) -> Ordering {
    b.r2.abs().total_cmp(&a.r2.abs()).then_with(|| a.word.cmp(&b.word))
}

/// Correlates each adjective's single-word bias with `stat` across cultures.
///
/// A positive slope means the word grows more female-associated as the
/// statistic rises; with [`Orientation::HigherIsLessGap`] that is the lo-gap
/// direction, otherwise the hi-gap direction.
pub fn adjective_scan(
    adjectives: &[String],
    cultures: &[CultureView],
    stat: &StatTable,
    params: &ScanParams,
) -> Result<AdjectiveReport> {
    if adjectives.is_empty() {
        return Err(Error::Argument("adjective lexicon is empty".into()));
    }
    let views: Vec<&CultureView> = cultures.iter().filter(|c| stat.get(&c.region).is_some()).collect();
    let n = views.len();
    let mut seen = HashSet::new();
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    let mut covered = 0;
    for word in adjectives {
        if !seen.insert(word.as_str()) {
            continue;
        }
        let present = views.iter().filter(|c| c.space.contains(word)).count();
        if n == 0 || (present as f64) < params.coverage * n as f64 {
            continue;
        }
        covered += 1;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for c in &views {
            if let Some(b) = c.word_bias(params.metric, word) {
                x.push(b);
                y.push(stat.get(&c.region).expect("filtered"));
            }
        }
        let r2 = match signed_r2(&x, &y) {
            Ok(r) => r,
            Err(e) => {
                warn!("adjective `{word}`: {e}");
                continue;
            }
        };
        if r2.abs() <= params.threshold {
            continue;
        }
        let scored = ScoredWord {
            word: word.clone(),
            r2,
            n_cultures: x.len(),
        };
        let female_with_higher = r2 > 0.0;
        let lo_gap = female_with_higher == (stat.orientation == Orientation::HigherIsLessGap);
        if lo_gap {
            lo.push(scored);
        } else {
            hi.push(scored);
        }
    }
    if covered == 0 {
        return Err(Error::InsufficientData(format!(
            "no adjective is present in {:.0}% of the {n} cultures with `{}`",
            params.coverage * 100.0,
            stat.name
        )));
    }
    lo.sort_by(by_strength);
    hi.sort_by(by_strength);
    Ok(AdjectiveReport {
        statistic: stat.name.clone(),
        orientation: stat.orientation,
        threshold: params.threshold,
        top_k: params.top_k,
        lo_gap: lo,
        hi_gap: hi,
        scanned: seen.len(),
        covered,
        valence: None,
        dominance: None,
    })
}

fn compare_one(report: &AdjectiveReport, lexicon: &AffectLexicon, affect: Affect) -> Result<AffectComparison> {
    let mut missing = Vec::new();
    let mut collect = |words: &[ScoredWord]| -> Vec<f64> {
        words
            .iter()
            .filter_map(|w| {
                let v = lexicon.get(&w.word, affect);
                if v.is_none() {
                    missing.push(w.word.clone());
                }
                v
            })
            .collect()
    };
    let lo = collect(&report.lo_gap);
    let hi = collect(&report.hi_gap);
    if lo.len() < 2 || hi.len() < 2 {
        return Err(Error::AffectCoverage(missing));
    }
    if !missing.is_empty() {
        warn!("{affect}: {} adjectives not in the affect lexicon", missing.len());
    }
    Ok(AffectComparison {
        affect,
        test: welch_t_test(&lo, &hi)?,
        missing,
    })
}

/// Welch t-tests of lo-gap against hi-gap adjectives on valence and dominance.
pub fn affect_compare(report: &AdjectiveReport, lexicon: &AffectLexicon) -> Result<AdjectiveReport> {
    let mut out = report.clone();
    out.valence = Some(compare_one(report, lexicon, Affect::Valence)?);
    out.dominance = Some(compare_one(report, lexicon, Affect::Dominance)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::{Normalization, VectorSpace};

    // word projection = slope * t_i + wiggle_i with t spread over cultures
    fn cultures(n: usize, words: &[(&str, f64, f64)], stat: &str) -> (Vec<CultureView>, StatTable) {
        let female = WordSet::new("f", ["she"], WordSetKind::Female).unwrap();
        let male = WordSet::new("m", ["he"], WordSetKind::Male).unwrap();
        let mut values = BTreeMap::new();
        let views = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64 - 0.5;
                let mut rows = vec![("she".to_string(), vec![1.0, 0.0]), ("he".to_string(), vec![-1.0, 0.0])];
                for (w, s, wiggle) in words {
                    let p: f64 = s * t + wiggle * (((i * 7) % 5) as f64 - 2.0) / 2.0;
                    rows.push((w.to_string(), vec![p, (1.0 - p * p).sqrt()]));
                }
                let region = format!("r{i:02}");
                values.insert(region.clone(), t + 0.01 * ((i * 5) % 3) as f64);
                let space = VectorSpace::from_rows(&region, 2, rows, Normalization::Unit).unwrap();
                CultureView::new(space, &female, &male).unwrap()
            })
            .collect();
        (views, StatTable::new(stat, Orientation::HigherIsLessGap, values).unwrap())
    }

    fn words(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tracking_adjective_leads_its_list() {
        let (views, stat) = cultures(10, &[("kind", 0.9, 0.0), ("loud", -0.9, 0.0), ("weak", 0.3, 0.1)], "parity");
        let rep = adjective_scan(&words(&["weak", "kind", "loud", "absent"]), &views, &stat, &ScanParams::default()).unwrap();
        assert_eq!(rep.lo_gap[0].word, "kind");
        assert_eq!(rep.hi_gap[0].word, "loud");
        assert_eq!(rep.covered, 3);

        let mut flipped = stat.clone();
        flipped.orientation = Orientation::HigherIsMoreGap;
        let rep = adjective_scan(&words(&["kind", "loud"]), &views, &flipped, &ScanParams::default()).unwrap();
        assert_eq!(rep.hi_gap[0].word, "kind");
    }

    #[test]
    fn no_covered_word_is_an_error() {
        let (views, stat) = cultures(6, &[("kind", 0.9, 0.0)], "parity");
        assert!(adjective_scan(&words(&["nothing"]), &views, &stat, &ScanParams::default()).is_err());
    }

    fn report(lo: &[&str], hi: &[&str]) -> AdjectiveReport {
        let sw = |w: &&str| ScoredWord {
            word: w.to_string(),
            r2: 0.5,
            n_cultures: 10,
        };
        AdjectiveReport {
            statistic: "s".into(),
            orientation: Orientation::default(),
            threshold: 0.1,
            top_k: 10,
            lo_gap: lo.iter().map(sw).collect(),
            hi_gap: hi.iter().map(sw).collect(),
            scanned: lo.len() + hi.len(),
            covered: lo.len() + hi.len(),
            valence: None,
            dominance: None,
        }
    }

    #[test]
    fn separated_affect_groups() {
        let mut lex = AffectLexicon::new();
        for (i, w) in ["a", "b", "c"].iter().enumerate() {
            lex.insert(w, 8.0 - 0.1 * i as f64, 7.0 + 0.1 * i as f64).unwrap();
        }
        for (i, w) in ["x", "y", "z"].iter().enumerate() {
            lex.insert(w, 2.0 + 0.1 * i as f64, 3.0 - 0.1 * i as f64).unwrap();
        }
        let rep = affect_compare(&report(&["a", "b", "c", "q"], &["x", "y", "z"]), &lex).unwrap();
        let v = rep.valence.unwrap();
        assert!(v.test.mean_a > v.test.mean_b && v.test.p < 0.05);
        assert_eq!(v.missing, ["q"]);
        assert!(rep.dominance.unwrap().test.t > 0.0);
    }

    #[test]
    fn affect_coverage_error_names_words() {
        let mut lex = AffectLexicon::new();
        lex.insert("a", 5.0, 5.0).unwrap();
        lex.insert("b", 6.0, 5.0).unwrap();
        match affect_compare(&report(&["a", "b"], &["x", "y"]), &lex) {
            Err(Error::AffectCoverage(m)) => assert_eq!(m, ["x", "y"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lexicon_bounds_and_csv() {
        let mut lex = AffectLexicon::new();
        assert!(lex.insert("w", 9.5, 5.0).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("affect.csv");
        fs::write(&p, "word,valence,dominance\nHappy,8.47,7.21\nsad,2.1,3.8\n").unwrap();
        let lex = AffectLexicon::load(&p).unwrap();
        assert_eq!(lex.get("happy", Affect::Dominance), Some(7.21));
        assert_eq!(lex.len(), 2);
    }
}
