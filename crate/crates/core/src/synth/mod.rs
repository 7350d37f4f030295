//! Synthetic cultures with injected, known gender bias.
//!
//! Every sentence holds one themed token, `anchors_per_sentence` gendered
//! anchor words of a single gender, and Poisson filler. A theme sentence's
//! anchors are female with probability `(1 + bias) / 2`.
//!
//! With `mirror` on, each theme has a hidden twin of the same size and share
//! carrying bias `-bias`. A culture is then invariant under swapping genders
//! together with each theme and its twin, so words that cannot tell the two
//! apart (the filler) have zero expected bias whatever the injected values.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

pub use oracle::{measured_bias, pipeline_oracle_check, OracleCheck, OracleParams, OracleReport};

use crate::analysis::{pearson, write_stats_dir, Orientation, StatTable};
use crate::bias::{write_word_set_dir, WordSet, WordSetKind};
use crate::corpus::{write_corpus_file, CleanSentence, CultureCorpus, CORPUS_EXT};
use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::seed::{derive_seed, rng_from};

pub const DEFAULT_FEMALE: [&str; 8] = ["she", "her", "woman", "girl", "mother", "sister", "daughter", "wife"];
pub const DEFAULT_MALE: [&str; 8] = ["he", "him", "man", "boy", "father", "brother", "son", "husband"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_cultures: usize,
    pub sentences: usize,
    pub themes: Vec<String>,
    pub tokens_per_theme: usize,
    pub filler_tokens: usize,
    /// Poisson mean of filler tokens per sentence; at least one is drawn.
    pub filler_mean: f64,
    pub female_anchors: Vec<String>,
    pub male_anchors: Vec<String>,
    /// Largest |bias| of the generated ladders.
    pub bias_max: f64,
    /// Explicit per-culture biases; themes missing here get a generated ladder.
    pub bias: BTreeMap<String, Vec<f64>>,
    /// Statistic slopes per theme; default alternates +1, −1.
    pub slopes: BTreeMap<String, f64>,
    pub intercept: f64,
    /// Statistic noise as a fraction of the signal's standard deviation.
    pub noise: f64,
    /// Add a hidden `-bias` twin for every theme.
    pub mirror: bool,
    /// Same-gender anchors per sentence.
    pub anchors_per_sentence: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_cultures: 12,
            sentences: 100_000,
            themes: vec!["theme1".into(), "theme2".into()],
            tokens_per_theme: 10,
            filler_tokens: 300,
            filler_mean: 4.0,
            female_anchors: DEFAULT_FEMALE.iter().map(|s| s.to_string()).collect(),
            male_anchors: DEFAULT_MALE.iter().map(|s| s.to_string()).collect(),
            bias_max: 0.8,
            bias: BTreeMap::new(),
            slopes: BTreeMap::new(),
            intercept: 0.5,
            noise: 0.05,
            mirror: true,
            anchors_per_sentence: 2,
            seed: 7,
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn spec_err(e: Error) -> Error {
    Error::Spec(e.to_string())
}

impl SynthSpec {
    /// Reads a `key = value` spec; unknown keys are rejected.
    ///
    /// Keys: `n_cultures`, `sentences`, `themes` (comma list),
    /// `tokens_per_theme`, `filler_tokens`, `filler_mean`, `female_anchors`,
    /// `male_anchors`, `bias_max`, `bias.<theme>` (comma list, one value per
    /// culture), `slope.<theme>`, `intercept`, `noise`, `mirror`,
    /// `anchors_per_sentence`, `seed`.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let d = SynthSpec::default();
        let mut spec = SynthSpec {
            n_cultures: kv.parsed_or("n_cultures", d.n_cultures).map_err(spec_err)?,
            sentences: kv.parsed_or("sentences", d.sentences).map_err(spec_err)?,
            themes: kv.get("themes").map(list).unwrap_or(d.themes),
            tokens_per_theme: kv.parsed_or("tokens_per_theme", d.tokens_per_theme).map_err(spec_err)?,
            filler_tokens: kv.parsed_or("filler_tokens", d.filler_tokens).map_err(spec_err)?,
            filler_mean: kv.parsed_or("filler_mean", d.filler_mean).map_err(spec_err)?,
            female_anchors: kv.get("female_anchors").map(list).unwrap_or(d.female_anchors),
            male_anchors: kv.get("male_anchors").map(list).unwrap_or(d.male_anchors),
            bias_max: kv.parsed_or("bias_max", d.bias_max).map_err(spec_err)?,
            bias: BTreeMap::new(),
            slopes: BTreeMap::new(),
            intercept: kv.parsed_or("intercept", d.intercept).map_err(spec_err)?,
            noise: kv.parsed_or("noise", d.noise).map_err(spec_err)?,
            mirror: kv.parsed_or("mirror", d.mirror).map_err(spec_err)?,
            anchors_per_sentence: kv
                .parsed_or("anchors_per_sentence", d.anchors_per_sentence)
                .map_err(spec_err)?,
            seed: kv.parsed_or("seed", d.seed).map_err(spec_err)?,
        };
        const PLAIN: [&str; 14] = [
            "n_cultures", "sentences", "themes", "tokens_per_theme", "filler_tokens", "filler_mean",
            "female_anchors", "male_anchors", "bias_max", "intercept", "noise", "mirror",
            "anchors_per_sentence", "seed",
        ];
        for (key, value) in kv.iter() {
            if let Some(theme) = key.strip_prefix("bias.") {
                let vals = list(value)
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|_| Error::Spec(format!("{key}: bad number `{v}`"))))
                    .collect::<Result<Vec<_>>>()?;
                spec.bias.insert(theme.to_string(), vals);
            } else if let Some(theme) = key.strip_prefix("slope.") {
                let v = value
                    .parse()
                    .map_err(|_| Error::Spec(format!("{key}: bad number `{value}`")))?;
                spec.slopes.insert(theme.to_string(), v);
            } else if !PLAIN.contains(&key) {
                return Err(Error::Spec(format!("unknown key `{key}`")));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::default();
        kv.set("n_cultures", self.n_cultures.to_string());
        kv.set("sentences", self.sentences.to_string());
        kv.set("themes", self.themes.join(","));
        kv.set("tokens_per_theme", self.tokens_per_theme.to_string());
        kv.set("filler_tokens", self.filler_tokens.to_string());
        kv.set("filler_mean", self.filler_mean.to_string());
        kv.set("female_anchors", self.female_anchors.join(","));
        kv.set("male_anchors", self.male_anchors.join(","));
        kv.set("bias_max", self.bias_max.to_string());
        for (t, v) in &self.bias {
            kv.set(&format!("bias.{t}"), v.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        }
        for (t, v) in &self.slopes {
            kv.set(&format!("slope.{t}"), v.to_string());
        }
        kv.set("intercept", self.intercept.to_string());
        kv.set("noise", self.noise.to_string());
        kv.set("mirror", self.mirror.to_string());
        kv.set("anchors_per_sentence", self.anchors_per_sentence.to_string());
        kv.set("seed", self.seed.to_string());
        kv
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.n_cultures < 3 {
            return fail(format!("n_cultures must be at least 3, got {}", self.n_cultures));
        }
        if self.sentences == 0 || self.themes.is_empty() || self.tokens_per_theme == 0 || self.filler_tokens == 0 {
            return fail("sentences, themes, tokens_per_theme and filler_tokens must be nonzero".into());
        }
        if self.female_anchors.is_empty() || self.male_anchors.is_empty() {
            return fail("both anchor lists must be nonempty".into());
        }
        if !(self.filler_mean.is_finite() && self.filler_mean > 0.0) {
            return fail(format!("filler_mean must be positive, got {}", self.filler_mean));
        }
        if !(self.bias_max.is_finite() && self.bias_max > 0.0 && self.bias_max <= 1.0) {
            return fail(format!("bias_max must be in (0, 1], got {}", self.bias_max));
        }
        if self.anchors_per_sentence == 0 {
            return fail("anchors_per_sentence must be at least 1".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) || !self.intercept.is_finite() {
            return fail("noise must be finite and non-negative; intercept finite".into());
        }
        let mut names = BTreeSet::new();
        for t in &self.themes {
            if t.is_empty() || t.contains(|c: char| c == '/' || c == '\\' || c == ',' || c.is_whitespace()) || !names.insert(t) {
                return fail(format!("bad or duplicate theme name `{t}`"));
            }
        }
        for (t, v) in &self.bias {
            if !names.contains(t) {
                return fail(format!("bias given for unknown theme `{t}`"));
            }
            if v.len() != self.n_cultures {
                return fail(format!("bias.{t} has {} values for {} cultures", v.len(), self.n_cultures));
            }
            if v.iter().any(|b| !b.is_finite() || b.abs() > 1.0) {
                return fail(format!("bias.{t} values must lie in [-1, 1]"));
            }
        }
        for (t, s) in &self.slopes {
            if !names.contains(t) || !s.is_finite() || *s == 0.0 {
                return fail(format!("slope.{t} must name a theme and be finite and nonzero"));
            }
        }
        let anchors: BTreeSet<&String> = self.female_anchors.iter().chain(&self.male_anchors).collect();
        if anchors.len() != self.female_anchors.len() + self.male_anchors.len() {
            return fail("anchor words must be distinct".into());
        }
        Ok(())
    }

    pub fn region(&self, i: usize) -> String {
        let width = self.n_cultures.to_string().len().max(2);
        format!("S{:0width$}", i + 1)
    }

    pub fn slope(&self, theme_index: usize) -> f64 {
        self.slopes
            .get(&self.themes[theme_index])
            .copied()
            .unwrap_or(if theme_index % 2 == 0 { 1.0 } else { -1.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatDerivation {
    pub theme: String,
    pub slope: f64,
    pub intercept: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct SynthWorld {
    pub spec: SynthSpec,
    pub regions: Vec<String>,
    pub corpora: Vec<CultureCorpus>,
    /// Theme → per-culture injected bias (culture order = `regions`).
    pub true_bias: BTreeMap<String, Vec<f64>>,
    pub theme_tokens: BTreeMap<String, Vec<String>>,
    /// Tokens of each theme's hidden `-bias` twin (empty without `mirror`).
    pub mirror_tokens: BTreeMap<String, Vec<String>>,
    pub fillers: Vec<String>,
    /// One statistic per theme, named `gap-<theme>`.
    pub stats: Vec<StatTable>,
    pub derivations: Vec<StatDerivation>,
}

impl SynthWorld {
    pub fn female_set(&self) -> WordSet {
        WordSet::new("female", &self.spec.female_anchors, WordSetKind::Female).expect("validated anchors")
    }

    pub fn male_set(&self) -> WordSet {
        WordSet::new("male", &self.spec.male_anchors, WordSetKind::Male).expect("validated anchors")
    }

    pub fn theme_sets(&self) -> Vec<WordSet> {
        self.spec
            .themes
            .iter()
            .map(|t| WordSet::new(t, &self.theme_tokens[t], WordSetKind::Neutral).expect("nonempty theme"))
            .collect()
    }

    pub fn stat_for(&self, theme: &str) -> Option<&StatTable> {
        self.stats.iter().find(|s| s.name == stat_name(theme))
    }

    /// A seeded random set of filler words.
    pub fn filler_set(&self, name: &str, size: usize, seed: u64) -> WordSet {
        let mut rng = rng_from(derive_seed(seed, &["filler-set", name]));
        let picked: Vec<&String> = self.fillers.choose_multiple(&mut rng, size.min(self.fillers.len())).collect();
        WordSet::new(name, picked, WordSetKind::Random).expect("nonempty filler set")
    }

    /// Writes `corpus/<region>.txt`, `wordsets/`, `stats/`, `truth.csv` and `spec.kv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let corpus_dir = dir.join("corpus");
        fs::create_dir_all(&corpus_dir).map_err(|e| Error::io(&corpus_dir, e))?;
        for c in &self.corpora {
            write_corpus_file(&corpus_dir.join(format!("{}.{CORPUS_EXT}", c.region)), c)?;
        }
        let mut sets = vec![self.female_set(), self.male_set()];
        sets.extend(self.theme_sets());
        write_word_set_dir(&dir.join("wordsets"), &sets)?;
        write_stats_dir(&dir.join("stats"), &self.stats)?;

        let mut truth = String::from("culture,theme,bias\n");
        for (i, r) in self.regions.iter().enumerate() {
            for t in &self.spec.themes {
                truth.push_str(&format!("{r},{t},{}\n", self.true_bias[t][i]));
            }
        }
        let p = dir.join("truth.csv");
        fs::write(&p, truth).map_err(|e| Error::io(&p, e))?;
        let p = dir.join("spec.kv");
        fs::write(&p, self.spec.to_kv().render()).map_err(|e| Error::io(&p, e))
    }
}

pub fn stat_name(theme: &str) -> String {
    format!("gap-{theme}")
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

/// Distinct random-letter pseudo-words that collide with nothing in `taken`.
fn pseudo_words(rng: &mut impl Rng, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.random_range(4..=8);
        let w: String = (0..len).map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char).collect();
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Evenly spaced biases from `-max` to `max` over the cultures.
fn ladder(n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|i| -max + 2.0 * max * i as f64 / (n - 1) as f64).collect()
}

/// Seeded permutation of `base` that is least correlated with every earlier ladder.
fn decorrelated(base: &[f64], earlier: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    let mut best = base.to_vec();
    let mut best_score = f64::INFINITY;
    for _ in 0..500 {
        let mut cand = base.to_vec();
        cand.shuffle(&mut rng);
        let score = earlier
            .iter()
            .map(|e| pearson(e, &cand).map(f64::abs).unwrap_or(1.0))
            .fold(0.0, f64::max);
        if score < best_score {
            best_score = score;
            best = cand;
        }
    }
    best
}

/// `groups` pairs each token pool with its per-culture bias.
fn culture_corpus(spec: &SynthSpec, region: &str, groups: &[(&[String], f64)], fillers: &[String], seed: u64) -> CultureCorpus {
    let mut rng = rng_from(seed);
    let poisson = Poisson::new(spec.filler_mean).expect("validated mean");
    let mut sentences = Vec::with_capacity(spec.sentences);
    for _ in 0..spec.sentences {
        let (pool, bias) = groups[rng.random_range(0..groups.len())];
        let mut toks = vec![pool[rng.random_range(0..pool.len())].clone()];
        let anchors = if rng.random::<f64>() < (1.0 + bias) / 2.0 {
            &spec.female_anchors
        } else {
            &spec.male_anchors
        };
        for _ in 0..spec.anchors_per_sentence {
            toks.push(anchors[rng.random_range(0..anchors.len())].clone());
        }
        let n_fill = (poisson.sample(&mut rng) as usize).max(3usize.saturating_sub(toks.len())).max(1);
        for _ in 0..n_fill {
            toks.push(fillers[rng.random_range(0..fillers.len())].clone());
        }
        toks.shuffle(&mut rng);
        sentences.push(CleanSentence {
            tokens: toks,
            region: region.to_string(),
        });
    }
    CultureCorpus {
        region: region.to_string(),
        sentences,
        sampled: false,
    }
}

/// Builds the world; a pure function of the spec (including its seed).
pub fn gen_world(spec: &SynthSpec) -> Result<SynthWorld> {
    spec.validate()?;
    let n = spec.n_cultures;
    let mut vocab_rng = rng_from(derive_seed(spec.seed, &["vocab"]));
    let mut taken: BTreeSet<String> = spec.female_anchors.iter().chain(&spec.male_anchors).cloned().collect();
    let tokens: Vec<Vec<String>> = spec
        .themes
        .iter()
        .map(|_| pseudo_words(&mut vocab_rng, spec.tokens_per_theme, &mut taken))
        .collect();
    let fillers = pseudo_words(&mut vocab_rng, spec.filler_tokens, &mut taken);
    let mirror_tokens: Vec<Vec<String>> = if spec.mirror {
        spec.themes
            .iter()
            .map(|_| pseudo_words(&mut vocab_rng, spec.tokens_per_theme, &mut taken))
            .collect()
    } else {
        Vec::new()
    };

    let base = ladder(n, spec.bias_max);
    let mut ladders: Vec<Vec<f64>> = Vec::new();
    for (k, theme) in spec.themes.iter().enumerate() {
        let b = match spec.bias.get(theme) {
            Some(v) => v.clone(),
            None if k == 0 => base.clone(),
            None => decorrelated(&base, &ladders, derive_seed(spec.seed, &["ladder", theme])),
        };
        ladders.push(b);
    }

    let regions: Vec<String> = (0..n).map(|i| spec.region(i)).collect();
    let corpora = regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut groups: Vec<(&[String], f64)> = tokens.iter().zip(&ladders).map(|(t, l)| (t.as_slice(), l[i])).collect();
            groups.extend(mirror_tokens.iter().zip(&ladders).map(|(t, l)| (t.as_slice(), -l[i])));
            culture_corpus(spec, r, &groups, &fillers, derive_seed(spec.seed, &["culture", &i.to_string()]))
        })
        .collect();

    let mut stats = Vec::new();
    let mut derivations = Vec::new();
    for (k, theme) in spec.themes.iter().enumerate() {
        let slope = spec.slope(k);
        let signal: Vec<f64> = ladders[k].iter().map(|b| slope * b).collect();
        let mean = signal.iter().sum::<f64>() / n as f64;
        let sd = (signal.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64).sqrt();
        let sigma = spec.noise * sd;
        let mut rng = rng_from(derive_seed(spec.seed, &["noise", theme]));
        let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
        let values = regions
            .iter()
            .zip(&signal)
            .map(|(r, s)| {
                let e = if sigma > 0.0 { normal.sample(&mut rng) } else { 0.0 };
                (r.clone(), spec.intercept + s + e)
            })
            .collect();
        let mut table = StatTable::new(&stat_name(theme), Orientation::HigherIsLessGap, values)?;
        table.note = format!("synthetic: {} + {slope} * bias({theme}) + N(0, {sigma})", spec.intercept);
        stats.push(table);
        derivations.push(StatDerivation {
            theme: theme.clone(),
            slope,
            intercept: spec.intercept,
            sigma,
        });
    }

    Ok(SynthWorld {
        spec: spec.clone(),
        regions,
        corpora,
        true_bias: spec.themes.iter().cloned().zip(ladders).collect(),
        theme_tokens: spec.themes.iter().cloned().zip(tokens).collect(),
        mirror_tokens: spec.themes.iter().cloned().zip(mirror_tokens).collect(),
        fillers,
        stats,
        derivations,
    })
}
