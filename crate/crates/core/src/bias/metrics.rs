//! Bias metrics. Positive values always mean female-associated.

use std::fmt;
use std::str::FromStr;

use log::warn;

use super::{VectorSpace, WordSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Mean projection onto the unit female-minus-male direction.
    AxisProjection,
    /// Mean of `‖w − male‖ − ‖w − female‖`.
    L2Difference,
    /// Mean of `ln(‖w − male‖ / ‖w − female‖)`.
    L2Ratio,
}

impl Metric {
    /// Fixed reporting order.
    pub const ALL: [Metric; 3] = [Metric::AxisProjection, Metric::L2Difference, Metric::L2Ratio];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AxisProjection => "axis-projection",
            Metric::L2Difference => "l2-diff",
            Metric::L2Ratio => "l2-ratio",
        }
    }

    /// Score of a single (already normalized, if applicable) word vector.
    /// `None` when the ratio is undefined because `w` sits on the female vector.
    pub fn word_score(self, axis: &GenderAxis, w: &[f64]) -> Option<f64> {
        match self {
            Metric::AxisProjection => Some(dot(w, &axis.axis)),
            Metric::L2Difference => Some(distance(w, &axis.male) - distance(w, &axis.female)),
            Metric::L2Ratio => {
                let to_female = distance(w, &axis.female);
                if to_female == 0.0 {
                    return None;
                }
                Some(distance(w, &axis.male).ln() - to_female.ln())
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown metric `{s}`")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean vector of a gendered word set within one space.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderVector {
    pub vector: Vec<f64>,
    pub used: usize,
    pub missing: usize,
}

pub fn gender_vector(space: &VectorSpace, set: &WordSet) -> Result<GenderVector> {
    let mut sum = vec![0.0; space.dim()];
    let mut used = 0;
    for word in &set.words {
        if let Some(v) = space.get(word) {
            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::NoWordsInVocab {
            set: set.name.clone(),
            region: space.region().to_string(),
        });
    }
    sum.iter_mut().for_each(|s| *s /= used as f64);
    Ok(GenderVector {
        vector: sum,
        used,
        missing: set.len() - used,
    })
}

/// Female and male endpoints plus the unit direction between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderAxis {
    pub region: String,
    pub female: Vec<f64>,
    pub male: Vec<f64>,
    pub axis: Vec<f64>,
}

impl GenderAxis {
    pub fn new(region: &str, female: Vec<f64>, male: Vec<f64>) -> Result<Self> {
        let degenerate = || Error::DegenerateAxis(region.to_string());
        if female.len() != male.len() {
            return Err(Error::Argument("female and male vectors differ in length".into()));
        }
        if female.iter().all(|&x| x == 0.0) || male.iter().all(|&x| x == 0.0) {
            return Err(degenerate());
        }
        let diff: Vec<f64> = female.iter().zip(&male).map(|(f, m)| f - m).collect();
        let norm = dot(&diff, &diff).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(degenerate());
        }
        let axis = diff.into_iter().map(|d| d / norm).collect();
        Ok(GenderAxis {
            region: region.to_string(),
            female,
            male,
            axis,
        })
    }

    pub fn from_sets(space: &VectorSpace, female: &WordSet, male: &WordSet) -> Result<Self> {
        let f = gender_vector(space, female)?;
        let m = gender_vector(space, male)?;
        Self::new(space.region(), f.vector, m.vector)
    }

    /// The same endpoints with female and male exchanged.
    pub fn swapped(&self) -> Self {
        GenderAxis::new(&self.region, self.male.clone(), self.female.clone()).expect("swap of a valid axis")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasScore {
    pub region: String,
    pub word_set: String,
    pub metric: Metric,
    pub value: f64,
    pub words_used: usize,
    pub words_missing: usize,
    /// In-vocabulary words skipped because the metric is undefined for them.
    pub words_excluded: usize,
}

pub fn score_set(space: &VectorSpace, axis: &GenderAxis, set: &WordSet, metric: Metric) -> Result<BiasScore> {
    let mut total = 0.0;
    let mut used = 0;
    let mut missing = 0;
    let mut excluded = 0;
    for word in &set.words {
        let Some(w) = space.get(word) else {
            missing += 1;
            continue;
        };
        match metric.word_score(axis, w) {
            Some(s) => {
                total += s;
                used += 1;
            }
            None => {
                warn!(
                    "{}: `{word}` coincides with the female vector; excluded from {metric}",
                    space.region()
                );
                excluded += 1;
            }
        }
    }
    if used == 0 {
        if excluded > 0 {
            return Err(Error::InsufficientData(format!(
                "every word of `{}` coincides with the female vector in `{}`",
                set.name,
                space.region()
            )));
        }
        return Err(Error::NoWordsInVocab {
            set: set.name.clone(),
            region: space.region().to_string(),
        });
    }
    Ok(BiasScore {
        region: space.region().to_string(),
        word_set: set.name.clone(),
        metric,
        value: total / used as f64,
        words_used: used,
        words_missing: missing,
        words_excluded: excluded,
    })
}

pub fn axis_projection(space: &VectorSpace, axis: &GenderAxis, set: &WordSet) -> Result<BiasScore> {
    score_set(space, axis, set, Metric::AxisProjection)
}

pub fn l2_norm_difference(space: &VectorSpace, axis: &GenderAxis, set: &WordSet) -> Result<BiasScore> {
    score_set(space, axis, set, Metric::L2Difference)
}

pub fn l2_norm_ratio(space: &VectorSpace, axis: &GenderAxis, set: &WordSet) -> Result<BiasScore> {
    score_set(space, axis, set, Metric::L2Ratio)
}

#[cfg(test)]
mod tests {
    use super::super::{Normalization, WordSetKind};
    use super::*;

    fn space(rows: Vec<(&str, Vec<f64>)>, norm: Normalization) -> VectorSpace {
        let dim = rows[0].1.len();
        VectorSpace::from_rows("R", dim, rows, norm).unwrap()
    }

    fn set(words: &[&str]) -> WordSet {
        WordSet::new("s", words, WordSetKind::Neutral).unwrap()
    }

    #[test]
    fn single_word_gender_vector_is_unit() {
        let sp = space(vec![("she", vec![3.0, 4.0])], Normalization::Unit);
        let g = gender_vector(&sp, &set(&["she", "hers"])).unwrap();
        assert_eq!(g.vector, [0.6, 0.8]);
        assert_eq!((g.used, g.missing), (1, 1));
    }

    #[test]
    fn opposite_words_cancel_and_break_the_axis() {
        let sp = space(vec![("a", vec![1.0, 0.0]), ("b", vec![-1.0, 0.0]), ("he", vec![0.0, 1.0])], Normalization::Unit);
        let f = gender_vector(&sp, &set(&["a", "b"])).unwrap();
        assert_eq!(f.vector, [0.0, 0.0]);
        let m = gender_vector(&sp, &set(&["he"])).unwrap();
        assert!(matches!(GenderAxis::new("R", f.vector, m.vector), Err(Error::DegenerateAxis(_))));
    }

    #[test]
    fn three_vector_mean_by_hand() {
        // (1,2,3,4) + (0,-2,6,1) + (2,3,0,-2) = (3,3,9,3) -> /3 = (1,1,3,1)
        let sp = space(
            vec![("a", vec![1.0, 2.0, 3.0, 4.0]), ("b", vec![0.0, -2.0, 6.0, 1.0]), ("c", vec![2.0, 3.0, 0.0, -2.0])],
            Normalization::Raw,
        );
        let g = gender_vector(&sp, &set(&["a", "b", "c"])).unwrap();
        assert_eq!(g.vector, [1.0, 1.0, 3.0, 1.0]);
    }

    #[test]
    fn no_words_in_vocab_names_the_set() {
        let sp = space(vec![("a", vec![1.0, 0.0])], Normalization::Unit);
        let err = gender_vector(&sp, &set(&["zzz"])).unwrap_err();
        assert!(err.to_string().contains("`s`"));
    }

    #[test]
    fn projection_extremes() {
        let axis = GenderAxis::new("R", vec![1.0, 0.0], vec![-1.0, 0.0]).unwrap();
        let sp = space(vec![("w", vec![1.0, 0.0]), ("o", vec![0.0, 2.0])], Normalization::Unit);
        assert_eq!(axis_projection(&sp, &axis, &set(&["w"])).unwrap().value, 1.0);
        assert_eq!(axis_projection(&sp, &axis, &set(&["o"])).unwrap().value, 0.0);
    }

    #[test]
    fn l2_difference_cases() {
        let axis = GenderAxis::new("R", vec![1.0, 0.0], vec![-1.0, 0.0]).unwrap();
        let sp = space(vec![("eq", vec![0.0, 1.0]), ("f", vec![1.0, 0.0])], Normalization::Raw);
        assert_eq!(l2_norm_difference(&sp, &axis, &set(&["eq"])).unwrap().value, 0.0);
        assert_eq!(l2_norm_difference(&sp, &axis, &set(&["f"])).unwrap().value, 2.0);
    }

    #[test]
    fn l2_ratio_cases() {
        let axis = GenderAxis::new("R", vec![1.0, 0.0], vec![-1.0, 0.0]).unwrap();
        // (1/3, 0): distance to female 2/3, to male 4/3
        let sp = space(
            vec![("eq", vec![0.0, 1.0]), ("twice", vec![1.0 / 3.0, 0.0]), ("f", vec![1.0, 0.0])],
            Normalization::Raw,
        );
        assert_eq!(l2_norm_ratio(&sp, &axis, &set(&["eq"])).unwrap().value, 0.0);
        let v = l2_norm_ratio(&sp, &axis, &set(&["twice"])).unwrap().value;
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let s = l2_norm_ratio(&sp, &axis, &set(&["f", "eq"])).unwrap();
        assert_eq!((s.words_used, s.words_excluded), (1, 1));
        assert!(l2_norm_ratio(&sp, &axis, &set(&["f"])).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
        }
    }
}
