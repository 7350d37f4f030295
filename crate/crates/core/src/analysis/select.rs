use std::collections::BTreeMap;

use log::warn;

use super::{signed_r2, StatTable};
use crate::error::{Error, Result};

/// Per-word, per-culture bias values for one word set and metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordBiasTable {
    values: BTreeMap<String, BTreeMap<String, f64>>,
}

impl WordBiasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, culture: &str, bias: f64) {
        self.values
            .entry(word.to_string())
            .or_default()
            .insert(culture.to_string(), bias);
    }

    pub fn get(&self, word: &str, culture: &str) -> Option<f64> {
        self.values.get(word)?.get(culture).copied()
    }

    /// Words in ascending order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Mean bias of `words` in `culture` over the words defined there.
    pub fn mean_bias(&self, words: &[String], culture: &str) -> Option<f64> {
        let vals: Vec<f64> = words.iter().filter_map(|w| self.get(w, culture)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Greedy forward selection of words whose mean bias best explains `stat`
/// over `subset`.
///
/// Starting from the empty set, each step adds the candidate giving the
/// largest `|signed R²|` of the selected-words mean bias against the
/// statistic; ties go to the lexicographically smaller word. Selection stops
/// as soon as no candidate strictly improves the score. Candidates are the
/// words defined in every subset culture that has a statistic value.
pub fn feature_select(table: &WordBiasTable, stat: &StatTable, subset: &[String]) -> Result<Vec<String>> {
    let cultures: Vec<&String> = subset.iter().filter(|c| stat.get(c).is_some()).collect();
    if cultures.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no subset culture has a value for `{}`",
            stat.name
        )));
    }
    let y: Vec<f64> = cultures.iter().map(|c| stat.get(c).expect("filtered")).collect();
    let candidates: Vec<(&str, Vec<f64>)> = table
        .words()
        .filter_map(|w| {
            let xs: Option<Vec<f64>> = cultures.iter().map(|c| table.get(w, c)).collect();
            xs.map(|xs| (w, xs))
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::InsufficientData(
            "no candidate word has a bias in every subset culture".into(),
        ));
    }

    let n = cultures.len();
    let mut chosen = vec![false; candidates.len()];
    let mut selected: Vec<String> = Vec::new();
    let mut sum = vec![0.0; n];
    let mut best_score: Option<f64> = None;
    let mut trial = vec![0.0; n];
    loop {
        let k = (selected.len() + 1) as f64;
        let mut step: Option<(usize, f64)> = None;
        for (ci, (_, xs)) in candidates.iter().enumerate() {
            if chosen[ci] {
                continue;
            }
            for j in 0..n {
                trial[j] = (sum[j] + xs[j]) / k;
            }
            let Ok(r) = signed_r2(&trial, &y) else {
                continue;
            };
            if step.is_none_or(|(_, s)| r.abs() > s) {
                step = Some((ci, r.abs()));
            }
        }
        match step {
            Some((ci, score)) if best_score.is_none_or(|b| score > b) => {
                chosen[ci] = true;
                selected.push(candidates[ci].0.to_string());
                for j in 0..n {
                    sum[j] += candidates[ci].1[j];
                }
                best_score = Some(score);
            }
            _ => break,
        }
    }
    if selected.is_empty() {
        // every single-word regression failed (e.g. constant biases); keep the first candidate
        warn!("feature selection for `{}` found no scorable word", stat.name);
        selected.push(candidates[0].0.to_string());
    }
    Ok(selected)
}
