//! Repeated feature-selection signed-R² pipeline and the set × statistic matrix.

use std::collections::{BTreeMap, HashSet};

use log::warn;
use rand::seq::index::sample;

use super::{feature_select, signed_r2, StatTable, WordBiasTable};
use crate::bias::{GenderAxis, Metric, Normalization, VectorSpace, WordSet, WordSetKind};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

/// Minimum number of cultures shared by the models and the statistic.
pub const MIN_CULTURES: usize = 5;

/// One culture ready for scoring: its vector space and gender axis.
#[derive(Debug, Clone)]
pub struct CultureView {
    pub region: String,
    pub space: VectorSpace,
    pub axis: GenderAxis,
}

impl CultureView {
    pub fn new(space: VectorSpace, female: &WordSet, male: &WordSet) -> Result<Self> {
        let axis = GenderAxis::from_sets(&space, female, male)?;
        Ok(CultureView {
            region: space.region().to_string(),
            space,
            axis,
        })
    }

    pub fn word_bias(&self, metric: Metric, word: &str) -> Option<f64> {
        metric.word_score(&self.axis, self.space.get(word)?)
    }
}

/// Builds a view per model; models whose axis cannot be formed are returned
/// separately with the reason.
pub fn prepare_cultures(
    models: &[EmbeddingModel],
    female: &WordSet,
    male: &WordSet,
    normalization: Normalization,
) -> (Vec<CultureView>, Vec<(String, Error)>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for m in models {
        match VectorSpace::from_model(m, normalization).and_then(|s| CultureView::new(s, female, male)) {
            Ok(v) => ok.push(v),
            Err(e) => {
                warn!("{}: {e}", m.region);
                failed.push((m.region.clone(), e));
            }
        }
    }
    (ok, failed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub repeats: usize,
    /// Fraction of cultures used for feature selection in each repeat.
    pub subset_frac: f64,
    pub metric: Metric,
    pub seed: u64,
    /// Worker threads for matrix cells; results do not depend on it.
    pub threads: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            repeats: 5,
            subset_frac: 0.2,
            metric: Metric::AxisProjection,
            seed: 1,
            threads: 1,
        }
    }
}

impl PipelineParams {
    fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Argument("repeats must be at least 1".into()));
        }
        if !(self.subset_frac > 0.0 && self.subset_frac <= 1.0) {
            return Err(Error::Argument("subset_frac must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub word_set: String,
    pub statistic: String,
    pub metric: Metric,
    /// Mean of `per_repeat`.
    pub signed_r2: f64,
    pub per_repeat: Vec<f64>,
    pub selected: Vec<Vec<String>>,
    pub n_cultures: usize,
}

fn word_table(set: &WordSet, cultures: &[&CultureView], metric: Metric) -> WordBiasTable {
    let mut table = WordBiasTable::new();
    for c in cultures {
        for w in &set.words {
            if let Some(b) = c.word_bias(metric, w) {
                table.insert(w, &c.region, b);
            }
        }
    }
    table
}

/// Signed R² of a word set against a statistic, averaged over repeated
/// feature selections.
///
/// Each repeat draws a fresh sample of `ceil(subset_frac · n)` cultures
/// (at least 3), selects words on it with [`feature_select`], then regresses
/// the statistic on the selected words' mean bias over all `n` cultures.
/// Cultures without the statistic or without any set word are excluded.
pub fn averaged_signed_r2(
    set: &WordSet,
    cultures: &[CultureView],
    stat: &StatTable,
    params: &PipelineParams,
) -> Result<CorrelationResult> {
    params.validate()?;
    let views: Vec<&CultureView> = cultures
        .iter()
        .filter(|c| stat.get(&c.region).is_some())
        .collect();
    let table = word_table(set, &views, params.metric);
    let eligible: Vec<&CultureView> = views
        .into_iter()
        .filter(|c| set.words.iter().any(|w| table.get(w, &c.region).is_some()))
        .collect();
    let n = eligible.len();
    if n < MIN_CULTURES {
        return Err(Error::InsufficientData(format!(
            "`{}` vs `{}`: {n} usable cultures, need at least {MIN_CULTURES}",
            set.name, stat.name
        )));
    }
    let names: Vec<String> = eligible.iter().map(|c| c.region.clone()).collect();
    let y_all: Vec<f64> = names.iter().map(|c| stat.get(c).expect("filtered")).collect();
    if y_all.iter().all(|&v| v == y_all[0]) {
        return Err(Error::ZeroVariance(format!("statistic `{}`", stat.name)));
    }

    let k = ((params.subset_frac * n as f64).ceil() as usize).clamp(3, n);
    let mut rng = rng_from(derive_seed(params.seed, &["cell", &set.name, &stat.name, params.metric.as_str()]));
    let mut per_repeat = Vec::with_capacity(params.repeats);
    let mut selected_all = Vec::with_capacity(params.repeats);
    for _ in 0..params.repeats {
        let mut idx = sample(&mut rng, n, k).into_vec();
        idx.sort_unstable();
        let subset: Vec<String> = idx.iter().map(|&i| names[i].clone()).collect();
        let selected = feature_select(&table, stat, &subset)?;

        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for (c, &v) in names.iter().zip(&y_all) {
            if let Some(b) = table.mean_bias(&selected, c) {
                x.push(b);
                y.push(v);
            }
        }
        per_repeat.push(signed_r2(&x, &y)?);
        selected_all.push(selected);
    }
    Ok(CorrelationResult {
        word_set: set.name.clone(),
        statistic: stat.name.clone(),
        metric: params.metric,
        signed_r2: per_repeat.iter().sum::<f64>() / per_repeat.len() as f64,
        per_repeat,
        selected: selected_all,
        n_cultures: n,
    })
}

/// Per-culture `(culture, whole-set bias, statistic)` triples for plotting.
pub fn scatter_pairs(set: &WordSet, cultures: &[CultureView], stat: &StatTable, metric: Metric) -> Vec<(String, f64, f64)> {
    cultures
        .iter()
        .filter_map(|c| {
            let y = stat.get(&c.region)?;
            let vals: Vec<f64> = set.words.iter().filter_map(|w| c.word_bias(metric, w)).collect();
            (!vals.is_empty()).then(|| (c.region.clone(), vals.iter().sum::<f64>() / vals.len() as f64, y))
        })
        .collect()
}

/// Word sets × statistics; failed cells keep their error message.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub word_sets: Vec<String>,
    pub statistics: Vec<String>,
    pub cells: BTreeMap<(String, String), std::result::Result<CorrelationResult, String>>,
}

impl CorrelationMatrix {
    pub fn cell(&self, statistic: &str, word_set: &str) -> Option<&std::result::Result<CorrelationResult, String>> {
        self.cells.get(&(statistic.to_string(), word_set.to_string()))
    }
}

pub fn correlation_matrix(
    sets: &[WordSet],
    cultures: &[CultureView],
    stats: &[StatTable],
    params: &PipelineParams,
) -> CorrelationMatrix {
    let jobs: Vec<(&StatTable, &WordSet)> = stats
        .iter()
        .flat_map(|s| sets.iter().map(move |w| (s, w)))
        .collect();
    let run = |(stat, set): &(&StatTable, &WordSet)| {
        let key = (stat.name.clone(), set.name.clone());
        let res = averaged_signed_r2(set, cultures, stat, params).map_err(|e| {
            warn!("cell {} × {}: {e}", stat.name, set.name);
            e.to_string()
        });
        (key, res)
    };
    let threads = params.threads.max(1).min(jobs.len().max(1));
    let cells: BTreeMap<_, _> = if threads <= 1 {
        jobs.iter().map(run).collect()
    } else {
        let chunk = jobs.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| {
                    let run = &run;
                    scope.spawn(move || part.iter().map(run).collect::<Vec<_>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("matrix worker"))
                .collect()
        })
    };
    CorrelationMatrix {
        word_sets: sets.iter().map(|s| s.name.clone()).collect(),
        statistics: stats.iter().map(|s| s.name.clone()).collect(),
        cells,
    }
}

/// `count` sets of `size` words drawn uniformly from the words present in
/// every culture, excluding `exclude`. Sets are named `rand-1`, `rand-2`, ...
pub fn random_word_sets(
    cultures: &[CultureView],
    count: usize,
    size: usize,
    seed: u64,
    exclude: &HashSet<String>,
) -> Result<Vec<WordSet>> {
    let Some(first) = cultures.first() else {
        return Err(Error::InsufficientData("no cultures to sample random words from".into()));
    };
    let mut pool: Vec<&String> = first
        .space
        .words()
        .iter()
        .filter(|w| !exclude.contains(*w) && cultures.iter().all(|c| c.space.contains(w)))
        .collect();
    pool.sort();
    if pool.len() < size {
        return Err(Error::InsufficientData(format!(
            "only {} shared words available for random sets of size {size}",
            pool.len()
        )));
    }
    (0..count)
        .map(|i| {
            let name = format!("rand-{}", i + 1);
            let mut rng = rng_from(derive_seed(seed, &["random-set", &name]));
            let mut idx = sample(&mut rng, pool.len(), size).into_vec();
            idx.sort_unstable();
            WordSet::new(&name, idx.iter().map(|&j| pool[j]), WordSetKind::Random)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Orientation;

    /// Cultures where word `w{j}` has bias `slope_j * t_i` along a fixed axis.
    fn world(n: usize, words: &[(&str, f64)]) -> Vec<CultureView> {
        let female = WordSet::new("f", ["she"], WordSetKind::Female).unwrap();
        let male = WordSet::new("m", ["he"], WordSetKind::Male).unwrap();
        (0..n)
            .map(|i| {
                let t = (i as f64 / (n - 1) as f64) * 1.6 - 0.8;
                let mut rows = vec![("she".to_string(), vec![1.0, 0.0, 0.0]), ("he".to_string(), vec![-1.0, 0.0, 0.0])];
                for (k, (w, slope)) in words.iter().enumerate() {
                    let p = (slope * t).clamp(-0.95, 0.95);
                    let z = 0.1 * ((i * 7 + k * 3) % 5) as f64;
                    rows.push((w.to_string(), vec![p, (1.0 - p * p - z * z).max(0.0).sqrt(), z]));
                }
                let space = VectorSpace::from_rows(&format!("c{i:02}"), 3, rows, Normalization::Unit).unwrap();
                CultureView::new(space, &female, &male).unwrap()
            })
            .collect()
    }

    fn stat_from(cultures: &[CultureView], f: impl Fn(usize) -> f64) -> StatTable {
        let values = cultures.iter().enumerate().map(|(i, c)| (c.region.clone(), f(i))).collect();
        StatTable::new("gap", Orientation::default(), values).unwrap()
    }

    #[test]
    fn single_word_full_subset_equals_plain_r2() {
        let cultures = world(12, &[("w", 1.0)]);
        let stat = stat_from(&cultures, |i| (i as f64).sin() + 0.2 * i as f64);
        let set = WordSet::new("s", ["w"], WordSetKind::Neutral).unwrap();
        let params = PipelineParams {
            repeats: 1,
            subset_frac: 1.0,
            ..Default::default()
        };
        let res = averaged_signed_r2(&set, &cultures, &stat, &params).unwrap();
        let x: Vec<f64> = cultures
            .iter()
            .map(|c| crate::bias::axis_projection(&c.space, &c.axis, &set).unwrap().value)
            .collect();
        let y: Vec<f64> = cultures.iter().map(|c| stat.get(&c.region).unwrap()).collect();
        assert_eq!(res.signed_r2, signed_r2(&x, &y).unwrap());
    }

    #[test]
    fn constant_statistic_is_an_error() {
        let cultures = world(8, &[("w", 1.0)]);
        let stat = stat_from(&cultures, |_| 0.5);
        let set = WordSet::new("s", ["w"], WordSetKind::Neutral).unwrap();
        let err = averaged_signed_r2(&set, &cultures, &stat, &PipelineParams::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(_)));
    }

    #[test]
    fn too_few_cultures() {
        let cultures = world(4, &[("w", 1.0)]);
        let stat = stat_from(&cultures, |i| i as f64);
        let set = WordSet::new("s", ["w"], WordSetKind::Neutral).unwrap();
        assert!(averaged_signed_r2(&set, &cultures, &stat, &PipelineParams::default()).is_err());
    }

    #[test]
    fn matrix_cells_are_isolated() {
        let cultures = world(10, &[("w", 1.0), ("v", -1.0)]);
        let good = stat_from(&cultures, |i| i as f64);
        let mut flat = stat_from(&cultures, |_| 1.0);
        flat.name = "flat".into();
        let sets = vec![
            WordSet::new("a", ["w"], WordSetKind::Neutral).unwrap(),
            WordSet::new("b", ["v"], WordSetKind::Neutral).unwrap(),
        ];
        let params = PipelineParams::default();
        let m = correlation_matrix(&sets, &cultures, &[good, flat], &params);
        assert_eq!(m.cells.len(), 4);
        assert!(m.cell("gap", "a").unwrap().as_ref().unwrap().signed_r2 > 0.9);
        assert!(m.cell("gap", "b").unwrap().as_ref().unwrap().signed_r2 < -0.9);
        assert!(m.cell("flat", "a").unwrap().is_err());

        let par = correlation_matrix(&sets, &cultures, &[stat_from(&cultures, |i| i as f64)], &PipelineParams { threads: 3, ..params });
        assert_eq!(
            par.cell("gap", "a").unwrap().as_ref().unwrap(),
            m.cell("gap", "a").unwrap().as_ref().unwrap()
        );
    }

    #[test]
    fn random_sets_are_deterministic_and_exclusive() {
        let cultures = world(6, &[("w", 1.0), ("v", 1.0), ("u", 1.0), ("t", 1.0)]);
        let exclude: HashSet<String> = ["she", "he"].iter().map(|s| s.to_string()).collect();
        let a = random_word_sets(&cultures, 4, 2, 9, &exclude).unwrap();
        let b = random_word_sets(&cultures, 4, 2, 9, &exclude).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_eq!(a[3].name, "rand-4");
        assert!(a.iter().all(|s| s.kind == WordSetKind::Random && s.words.iter().all(|w| !exclude.contains(w))));
        assert!(random_word_sets(&cultures, 1, 5, 9, &exclude).is_err());
    }
}
