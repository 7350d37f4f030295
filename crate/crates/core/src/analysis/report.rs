//! CSV outputs. Every file is header-first with `.` decimals; floats use the
//! shortest round-tripping representation so reruns are byte-identical.

use std::fs;
use std::path::Path;

use super::{AdjectiveReport, AffectComparison, CorrelationMatrix};
use crate::bias::Metric;
use crate::embedding::Algorithm;
use crate::error::{Error, Result};

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format(format!("{}: {e}", path.display()))
}

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Rows are statistics, columns word sets, cells the averaged signed R²
/// (empty where the cell failed).
pub fn write_matrix_csv(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    let mut header = vec!["statistic"];
    header.extend(m.word_sets.iter().map(String::as_str));
    let rows = m
        .statistics
        .iter()
        .map(|s| {
            let mut row = vec![s.clone()];
            row.extend(m.word_sets.iter().map(|w| match m.cell(s, w) {
                Some(Ok(r)) => num(r.signed_r2),
                _ => String::new(),
            }));
            row
        })
        .collect();
    write_rows(path, &header, rows)
}

/// One row per cell with per-repeat values, selected words and errors.
///
/// `selected` lists each repeat's words joined by `;`, repeats separated by `|`.
pub fn write_results_csv(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    let header = [
        "statistic", "word_set", "metric", "signed_r2", "n_cultures", "per_repeat", "selected", "error",
    ];
    let mut rows = Vec::new();
    for s in &m.statistics {
        for w in &m.word_sets {
            let row = match m.cell(s, w) {
                Some(Ok(r)) => vec![
                    s.clone(),
                    w.clone(),
                    r.metric.to_string(),
                    num(r.signed_r2),
                    r.n_cultures.to_string(),
                    r.per_repeat.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"),
                    r.selected.iter().map(|sel| sel.join(";")).collect::<Vec<_>>().join("|"),
                    String::new(),
                ],
                Some(Err(e)) => vec![s.clone(), w.clone(), String::new(), String::new(), String::new(), String::new(), String::new(), e.clone()],
                None => continue,
            };
            rows.push(row);
        }
    }
    write_rows(path, &header, rows)
}

/// `culture,bias,statistic` points for one (word set, statistic) cell.
pub fn write_scatter_csv(path: &Path, pairs: &[(String, f64, f64)]) -> Result<()> {
    let rows = pairs.iter().map(|(c, b, s)| vec![c.clone(), num(*b), num(*s)]).collect();
    write_rows(path, &["culture", "bias", "statistic"], rows)
}

/// File name for a scatter file; `/` cannot appear in set or statistic names
/// read from disk, but is replaced defensively.
pub fn scatter_file_name(statistic: &str, word_set: &str) -> String {
    format!("scatter.{}.{}.csv", statistic.replace('/', "_"), word_set.replace('/', "_"))
}

/// Word rows (`lo-gap` / `hi-gap`, rank from 1, `top` marks the first
/// `top_k`) followed by one row per affect test.
pub fn write_adjective_csv(path: &Path, r: &AdjectiveReport) -> Result<()> {
    let header = [
        "section", "rank", "word", "signed_r2", "top", "n_cultures", "t", "p", "df", "mean_lo", "mean_hi", "n_lo", "n_hi",
    ];
    let mut rows = Vec::new();
    for (section, words) in [("lo-gap", &r.lo_gap), ("hi-gap", &r.hi_gap)] {
        for (i, w) in words.iter().enumerate() {
            let mut row = vec![
                section.to_string(),
                (i + 1).to_string(),
                w.word.clone(),
                num(w.r2),
                (i < r.top_k).to_string(),
                w.n_cultures.to_string(),
            ];
            row.resize(header.len(), String::new());
            rows.push(row);
        }
    }
    for c in [&r.valence, &r.dominance].into_iter().flatten() {
        rows.push(affect_row(c));
    }
    write_rows(path, &header, rows)
}

fn affect_row(c: &AffectComparison) -> Vec<String> {
    let t = &c.test;
    vec![
        c.affect.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        num(t.t),
        num(t.p),
        num(t.df),
        num(t.mean_a),
        num(t.mean_b),
        t.n_a.to_string(),
        t.n_b.to_string(),
    ]
}

/// One row of the algorithm × metric comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub metric: Metric,
    pub word_set: String,
    pub statistic: String,
    pub result: std::result::Result<(f64, usize), String>,
}

impl CompareRow {
    /// The configuration reported to correlate best: skip-gram with axis projection.
    pub fn recommended(&self) -> bool {
        self.algorithm == Algorithm::SkipGram && self.metric == Metric::AxisProjection
    }
}

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let header = ["algorithm", "metric", "word_set", "statistic", "signed_r2", "n_cultures", "recommended", "error"];
    let out = rows
        .iter()
        .map(|r| {
            let (v, n, e) = match &r.result {
                Ok((v, n)) => (num(*v), n.to_string(), String::new()),
                Err(e) => (String::new(), String::new(), e.clone()),
            };
            vec![
                r.algorithm.to_string(),
                r.metric.to_string(),
                r.word_set.clone(),
                r.statistic.clone(),
                v,
                n,
                r.recommended().to_string(),
                e,
            ]
        })
        .collect();
    write_rows(path, &header, out)
}
