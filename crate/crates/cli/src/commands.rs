use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};

use cultbias::analysis::report::{
    scatter_file_name, write_adjective_csv, write_compare_csv, write_matrix_csv, write_results_csv,
    write_scatter_csv, CompareRow,
};
use cultbias::analysis::{
    adjective_scan, affect_compare, averaged_signed_r2, correlation_matrix, load_adjective_lexicon,
    load_stats_dir, prepare_cultures, random_word_sets, scatter_pairs, AffectLexicon, CultureView, PipelineParams,
    StatTable,
};
use cultbias::bias::{load_word_set_dir, shipped_word_sets, Metric, VectorSpace, WordSet, WordSetKind};
use cultbias::corpus::{preprocess as run_preprocess, read_corpus_dir, write_corpus_file, write_manifest, CORPUS_EXT};
use cultbias::embedding::{culture_config, load_model, save_model, train as train_model, Algorithm, ModelFormat};
use cultbias::kv::KvFile;
use cultbias::seed::derive_seed;
use cultbias::synth::{gen_world, pipeline_oracle_check, OracleParams, SynthSpec};

use crate::config::{require, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Oracle(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Oracle(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config: {e:#}"),
            Failure::Data(e) => write!(f, "data: {e:#}"),
            Failure::Oracle(m) => write!(f, "oracle: {m}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

fn mkdir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(data_err)
}

pub fn preprocess(cfg: &RunConfig) -> Outcome {
    if cfg.input.is_empty() {
        return Err(config_err(anyhow!("no input files (key `input`)")));
    }
    for p in &cfg.input {
        require(p, "input file").map_err(config_err)?;
    }
    let readers = cfg
        .input
        .iter()
        .map(|p| File::open(p).map(BufReader::new).with_context(|| format!("opening {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(data_err)?;
    let out = run_preprocess(readers, cfg.sample_cap, cfg.seed).map_err(data_err)?;
    if out.malformed > 0 {
        warn!("skipped {} malformed records", out.malformed);
    }
    mkdir(&cfg.corpus_dir)?;
    for (region, corpus) in &out.corpora {
        if corpus.is_empty() {
            warn!("{region}: no sentences survived cleaning");
            continue;
        }
        let path = cfg.corpus_dir.join(format!("{region}.{CORPUS_EXT}"));
        write_corpus_file(&path, corpus).map_err(data_err)?;
        info!("{region}: {} sentences{}", corpus.len(), if corpus.sampled { " (sampled)" } else { "" });
    }
    write_manifest(&cfg.corpus_dir.join("manifest.csv"), &out.manifest).map_err(data_err)
}

pub fn train(cfg: &RunConfig) -> Outcome {
    require(&cfg.corpus_dir, "corpus directory").map_err(config_err)?;
    let corpora = read_corpus_dir(&cfg.corpus_dir).map_err(data_err)?;
    if corpora.is_empty() {
        return Err(data_err(anyhow!("no corpus files in {}", cfg.corpus_dir.display())));
    }
    mkdir(&cfg.model_dir)?;
    let (mut done, mut failed) = (0usize, 0usize);
    for &alg in &cfg.algorithms {
        let template = cfg.train_config(alg).map_err(config_err)?;
        for (region, corpus) in &corpora {
            let path = cfg.model_path(region, alg);
            let want = culture_config(&template, region);
            if path.exists() {
                match load_model(&path) {
                    // Text files carry no config, so any readable one counts.
                    Ok(m) if m.region == *region && (cfg.model_format == ModelFormat::Text || m.config == want) => {
                        info!("{region}/{alg}: up to date, skipped");
                        done += 1;
                        continue;
                    }
                    Ok(_) => info!("{region}/{alg}: config changed, retraining"),
                    Err(e) => warn!("{region}/{alg}: unreadable model, retraining: {e}"),
                }
            }
            info!("{region}/{alg}: training on {} sentences", corpus.len());
            match train_model(corpus, &want).and_then(|m| save_model(&m, &path, cfg.model_format)) {
                Ok(()) => done += 1,
                Err(e) => {
                    warn!("{region}/{alg}: {e}");
                    failed += 1;
                }
            }
        }
    }
    if done == 0 {
        return Err(data_err(anyhow!("every training run failed")));
    }
    if failed > 0 {
        warn!("{failed} training runs failed; {done} models available");
    }
    Ok(())
}

struct GenderedSets {
    female: WordSet,
    male: WordSet,
    themed: Vec<WordSet>,
}

fn word_sets(cfg: &RunConfig) -> Result<GenderedSets, Failure> {
    let sets = match &cfg.wordset_dir {
        Some(dir) => {
            require(dir, "word-set directory").map_err(config_err)?;
            load_word_set_dir(dir).map_err(data_err)?
        }
        None => shipped_word_sets(),
    };
    let pick = |kind: WordSetKind| -> Result<WordSet, Failure> {
        let mut found = sets.iter().filter(|s| s.kind == kind);
        match (found.next(), found.next()) {
            (Some(s), None) => Ok(s.clone()),
            _ => Err(config_err(anyhow!("need exactly one {kind} word set"))),
        }
    };
    let themed: Vec<WordSet> = sets.iter().filter(|s| s.kind == WordSetKind::Neutral).cloned().collect();
    if themed.is_empty() {
        return Err(config_err(anyhow!("no neutral word sets to score")));
    }
    Ok(GenderedSets {
        female: pick(WordSetKind::Female)?,
        male: pick(WordSetKind::Male)?,
        themed,
    })
}

fn stats(cfg: &RunConfig) -> Result<Vec<StatTable>, Failure> {
    require(&cfg.stats_dir, "stats directory").map_err(config_err)?;
    let stats = load_stats_dir(&cfg.stats_dir).map_err(data_err)?;
    if stats.is_empty() {
        return Err(data_err(anyhow!("no statistics in {}", cfg.stats_dir.display())));
    }
    Ok(stats)
}

/// Model files for `alg` in the model directory, sorted by region.
fn model_files(cfg: &RunConfig, alg: Algorithm) -> Result<Vec<std::path::PathBuf>, Failure> {
    let suffix = format!(".{alg}.{}", cfg.model_format.extension());
    let mut out = Vec::new();
    let entries = fs::read_dir(&cfg.model_dir)
        .with_context(|| format!("listing {}", cfg.model_dir.display()))
        .map_err(data_err)?;
    for e in entries {
        let path = e.map_err(data_err)?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(&suffix)) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Loads each model and keeps only its normalized view, so at most one full
/// model is in memory at a time.
fn culture_views(cfg: &RunConfig, alg: Algorithm, sets: &GenderedSets) -> Result<Vec<CultureView>, Failure> {
    let mut views = Vec::new();
    for path in model_files(cfg, alg)? {
        let model = match load_model(&path) {
            Ok(m) => m,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        match VectorSpace::from_model(&model, cfg.normalization).and_then(|s| CultureView::new(s, &sets.female, &sets.male)) {
            Ok(v) => views.push(v),
            Err(e) => warn!("{}: excluded: {e}", model.region),
        }
    }
    Ok(views)
}

fn log_missing(views: &[CultureView], stats: &[StatTable]) {
    for s in stats {
        let missing: Vec<&str> = views
            .iter()
            .filter(|v| s.get(&v.region).is_none())
            .map(|v| v.region.as_str())
            .collect();
        if !missing.is_empty() {
            warn!("statistic {} has no value for {}; excluded there", s.name, missing.join(", "));
        }
    }
}

pub fn correlate(cfg: &RunConfig) -> Outcome {
    require(&cfg.model_dir, "model directory").map_err(config_err)?;
    let sets = word_sets(cfg)?;
    let stats = stats(cfg)?;
    let views = culture_views(cfg, cfg.algorithm, &sets)?;
    if views.is_empty() {
        return Err(data_err(anyhow!("no usable {} models in {}", cfg.algorithm, cfg.model_dir.display())));
    }
    log_missing(&views, &stats);

    let mut columns = sets.themed.clone();
    if cfg.random_sets > 0 {
        let exclude: HashSet<String> = sets
            .themed
            .iter()
            .chain([&sets.female, &sets.male])
            .flat_map(|s| s.words.iter().cloned())
            .collect();
        let seed = derive_seed(cfg.seed, &["random-sets"]);
        let random = random_word_sets(&views, cfg.random_sets, cfg.random_set_size, seed, &exclude).map_err(data_err)?;
        columns.extend(random);
    }

    let params = cfg.pipeline();
    let matrix = correlation_matrix(&columns, &views, &stats, &params);
    mkdir(&cfg.out_dir)?;
    write_matrix_csv(&cfg.out_dir.join("correlation_matrix.csv"), &matrix).map_err(data_err)?;
    write_results_csv(&cfg.out_dir.join("correlation_results.csv"), &matrix).map_err(data_err)?;
    let scatter_dir = cfg.out_dir.join("scatter");
    mkdir(&scatter_dir)?;
    for stat in &stats {
        for set in &columns {
            let pairs = scatter_pairs(set, &views, stat, cfg.metric);
            write_scatter_csv(&scatter_dir.join(scatter_file_name(&stat.name, &set.name)), &pairs).map_err(data_err)?;
        }
    }
    if matrix.cells.values().all(|c| c.is_err()) {
        return Err(data_err(anyhow!("every correlation cell failed")));
    }
    Ok(())
}

pub fn adjectives(cfg: &RunConfig) -> Outcome {
    let adj_path = cfg
        .adjectives
        .as_ref()
        .ok_or_else(|| config_err(anyhow!("no adjective lexicon (key `adjectives`)")))?;
    require(adj_path, "adjective lexicon").map_err(config_err)?;
    if let Some(p) = &cfg.affect {
        require(p, "affect lexicon").map_err(config_err)?;
    }
    require(&cfg.model_dir, "model directory").map_err(config_err)?;
    let sets = word_sets(cfg)?;
    let mut stats = stats(cfg)?;
    if let Some(name) = &cfg.statistic {
        stats.retain(|s| &s.name == name);
        if stats.is_empty() {
            return Err(config_err(anyhow!("unknown statistic `{name}`")));
        }
    }
    let adjectives = load_adjective_lexicon(adj_path).map_err(data_err)?;
    let lexicon = cfg.affect.as_deref().map(AffectLexicon::load).transpose().map_err(data_err)?;
    if lexicon.is_none() {
        warn!("no affect lexicon configured; skipping valence and dominance tests");
    }
    let views = culture_views(cfg, cfg.algorithm, &sets)?;
    if views.is_empty() {
        return Err(data_err(anyhow!("no usable {} models in {}", cfg.algorithm, cfg.model_dir.display())));
    }
    log_missing(&views, &stats);
    mkdir(&cfg.out_dir)?;
    let params = cfg.scan();
    for stat in &stats {
        let mut report = adjective_scan(&adjectives, &views, stat, &params).map_err(data_err)?;
        if let Some(lex) = &lexicon {
            report = affect_compare(&report, lex).map_err(data_err)?;
        }
        info!(
            "{}: {} of {} adjectives covered, {} lo-gap, {} hi-gap",
            stat.name,
            report.covered,
            report.scanned,
            report.lo_gap.len(),
            report.hi_gap.len()
        );
        let path = cfg.out_dir.join(format!("adjectives.{}.csv", stat.name));
        write_adjective_csv(&path, &report).map_err(data_err)?;
    }
    Ok(())
}

pub fn compare(cfg: &RunConfig) -> Outcome {
    require(&cfg.model_dir, "model directory").map_err(config_err)?;
    let sets = word_sets(cfg)?;
    let stats = stats(cfg)?;
    let mut rows = Vec::new();
    for alg in Algorithm::ALL {
        let views = culture_views(cfg, alg, &sets)?;
        if views.is_empty() {
            warn!("no {alg} models; its rows are omitted");
            continue;
        }
        log_missing(&views, &stats);
        for metric in Metric::ALL {
            // Selection on the full culture set makes repeats redundant.
            let params = PipelineParams {
                repeats: 1,
                subset_frac: 1.0,
                metric,
                ..cfg.pipeline()
            };
            for set in &sets.themed {
                for stat in &stats {
                    let result = averaged_signed_r2(set, &views, stat, &params)
                        .map(|r| (r.signed_r2, r.n_cultures))
                        .map_err(|e| e.to_string());
                    rows.push(CompareRow {
                        algorithm: alg,
                        metric,
                        word_set: set.name.clone(),
                        statistic: stat.name.clone(),
                        result,
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(data_err(anyhow!("no models for any algorithm in {}", cfg.model_dir.display())));
    }
    mkdir(&cfg.out_dir)?;
    write_compare_csv(&cfg.out_dir.join("compare.csv"), &rows).map_err(data_err)
}

/// `seed_overrides` makes the configured seed replace the spec's own.
pub fn synth(cfg: &RunConfig, seed_overrides: bool) -> Outcome {
    let mut spec = match &cfg.spec {
        Some(p) => {
            require(p, "synthetic spec").map_err(config_err)?;
            let kv = KvFile::load(p).map_err(config_err)?;
            SynthSpec::from_kv(&kv).map_err(config_err)?
        }
        None => SynthSpec::default(),
    };
    if seed_overrides {
        spec.seed = cfg.seed;
    }
    spec.validate().map_err(config_err)?;
    let world = gen_world(&spec).map_err(config_err)?;
    let world_dir = cfg.out_dir.join("world");
    world.write(&world_dir).map_err(data_err)?;
    info!("world with {} cultures written to {}", world.regions.len(), world_dir.display());

    let (female, male) = (world.female_set(), world.male_set());
    let params = OracleParams {
        metric: cfg.metric,
        pipeline: PipelineParams {
            seed: spec.seed,
            ..cfg.pipeline()
        },
        ..OracleParams::default()
    };
    let mut failures = Vec::new();
    for &alg in &cfg.algorithms {
        let mut template = cfg.train_config(alg).map_err(config_err)?;
        template.seed = spec.seed;
        let mut views = Vec::new();
        for corpus in &world.corpora {
            info!("{}/{alg}: training", corpus.region);
            let model = train_model(corpus, &culture_config(&template, &corpus.region)).map_err(data_err)?;
            let (mut ok, bad) = prepare_cultures(std::slice::from_ref(&model), &female, &male, cfg.normalization);
            if let Some((region, e)) = bad.into_iter().next() {
                warn!("{region}: excluded: {e}");
            }
            views.append(&mut ok);
        }
        let report = pipeline_oracle_check(&world, &views, &params).map_err(data_err)?;
        for c in &report.checks {
            info!("{alg}: {c}");
        }
        report
            .write_csv(&cfg.out_dir.join(format!("oracle.{alg}.csv")))
            .map_err(data_err)?;
        failures.extend(report.failures().map(|c| format!("{alg}: {}", c.name)));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Oracle(format!("{} checks failed: {}", failures.len(), failures.join(", "))))
    }
}
