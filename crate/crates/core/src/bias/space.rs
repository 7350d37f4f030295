use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};

/// Whether word vectors are scaled to unit length before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Unit,
    Raw,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Unit => "unit",
            Normalization::Raw => "raw",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Normalization::Unit),
            "raw" => Ok(Normalization::Raw),
            other => Err(Error::Argument(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Read-only `f64` view of one culture's word vectors used by every metric.
///
/// Under [`Normalization::Unit`] each row is divided by its Euclidean norm;
/// zero rows cannot be normalized and are left out of the space.
#[derive(Debug, Clone)]
pub struct VectorSpace {
    region: String,
    dim: usize,
    normalization: Normalization,
    index: HashMap<String, usize>,
    words: Vec<String>,
    rows: Vec<f64>,
}

impl VectorSpace {
    pub fn from_rows<I, S>(region: &str, dim: usize, rows: I, normalization: Normalization) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::Argument("vector dimension must be positive".into()));
        }
        let mut space = VectorSpace {
            region: region.to_string(),
            dim,
            normalization,
            index: HashMap::new(),
            words: Vec::new(),
            rows: Vec::new(),
        };
        for (word, mut v) in rows {
            let word = word.into();
            if v.len() != dim {
                return Err(Error::Argument(format!(
                    "vector for `{word}` has {} components, expected {dim}",
                    v.len()
                )));
            }
            if normalization == Normalization::Unit {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= norm);
            }
            if space.index.contains_key(&word) {
                return Err(Error::Argument(format!("duplicate word `{word}`")));
            }
            space.index.insert(word.clone(), space.words.len());
            space.words.push(word);
            space.rows.extend(v);
        }
        Ok(space)
    }

    pub fn from_model(model: &EmbeddingModel, normalization: Normalization) -> Result<Self> {
        let rows = model
            .vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), model.row(i).iter().map(|&x| f64::from(x)).collect()));
        Self::from_rows(&model.region, model.dim, rows, normalization)
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.rows[i * self.dim..(i + 1) * self.dim])
    }
}
