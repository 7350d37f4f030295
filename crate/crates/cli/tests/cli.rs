mod common;

use std::fs;
use std::path::Path;

use common::{assert_ok, code, read_tree, run, small_world};
use cultbias::analysis::{averaged_signed_r2, load_stats_dir, prepare_cultures, PipelineParams};
use cultbias::bias::{load_word_set_dir, Normalization, WordSetKind};
use cultbias::embedding::load_model;

fn train_world(dir: &Path, algorithms: &str) {
    let out = run(
        dir,
        &[
            "train", "--corpus-dir", "world/corpus", "--model-dir", "models", "--algorithms", algorithms, "--dim", "16",
            "--set", "buckets=5000", "--threads", "1",
        ],
    );
    assert_ok(&out);
}

const WORLD_ARGS: [&str; 4] = ["--wordset-dir", "world/wordsets", "--stats-dir", "world/stats"];

#[test]
fn preprocess_writes_one_file_per_region_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("raw.jsonl"), common::raw_records()).unwrap();
    for target in ["a", "b"] {
        assert_ok(&run(dir.path(), &["preprocess", "--input", "raw.jsonl", "--corpus-dir", target, "--seed", "3"]));
    }
    let a = read_tree(&dir.path().join("a"));
    assert_eq!(a, read_tree(&dir.path().join("b")));
    let corpora: Vec<_> = a.keys().filter(|p| p.extension().is_some_and(|e| e == "txt")).collect();
    assert_eq!(corpora.len(), 3);

    let manifest = String::from_utf8(a[Path::new("manifest.csv")].clone()).unwrap();
    let rows: Vec<Vec<&str>> = manifest.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let sum = |col: usize| rows.iter().map(|r| r[col].parse::<u64>().unwrap()).sum::<u64>();
    assert_eq!((sum(1), sum(2), sum(3), sum(4)), (60, 1, 1, 60));
}

#[test]
fn preprocess_caps_each_region() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("raw.jsonl"), common::raw_records()).unwrap();
    assert_ok(&run(dir.path(), &["preprocess", "--input", "raw.jsonl", "--sample-cap", "5"]));
    let text = fs::read_to_string(dir.path().join("corpus/AA.txt")).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn train_writes_region_times_algorithm_files_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram,cbow");
    let models = read_tree(&dir.path().join("models"));
    assert_eq!(models.len(), 6 * 2);
    assert!(models.contains_key(Path::new("S01.cbow.bin")));

    let m = load_model(&dir.path().join("models/S03.skipgram.bin")).unwrap();
    assert_eq!(m.region, "S03");
    assert_eq!(m.dim, 16);

    // A rerun finds every model valid and leaves the files alone.
    let out = common::bin()
        .current_dir(dir.path())
        .env("RUST_LOG", "info")
        .args([
            "train", "--corpus-dir", "world/corpus", "--model-dir", "models", "--algorithms", "skipgram,cbow", "--dim", "16",
            "--set", "buckets=5000",
        ])
        .output()
        .unwrap();
    assert_ok(&out);
    let log = String::from_utf8_lossy(&out.stderr);
    assert_eq!(log.matches("skipped").count(), 12, "{log}");
    assert_eq!(read_tree(&dir.path().join("models")), models);
}

#[test]
fn train_retrains_corrupt_models() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram");
    let path = dir.path().join("models/S02.skipgram.bin");
    let good = fs::read(&path).unwrap();
    fs::write(&path, b"garbage").unwrap();
    train_world(dir.path(), "skipgram");
    assert_eq!(fs::read(&path).unwrap(), good);
}

#[test]
fn correlate_matrix_shape_and_library_agreement() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram");
    let mut args = vec!["correlate", "--model-dir", "models", "--out-dir", "res", "--seed", "11"];
    args.extend(WORLD_ARGS);
    assert_ok(&run(dir.path(), &args));

    let matrix = fs::read_to_string(dir.path().join("res/correlation_matrix.csv")).unwrap();
    let lines: Vec<&str> = matrix.lines().collect();
    assert_eq!(lines[0], "statistic,theme1,theme2");
    assert_eq!(lines.len(), 3);
    assert_eq!(fs::read_dir(dir.path().join("res/scatter")).unwrap().count(), 4);

    // The cell equals a direct library call with the same inputs and seed.
    let sets = load_word_set_dir(&dir.path().join("world/wordsets")).unwrap();
    let find = |k: WordSetKind| sets.iter().find(|s| s.kind == k).unwrap();
    let models: Vec<_> = (1..=6)
        .map(|i| load_model(&dir.path().join(format!("models/S{i:02}.skipgram.bin"))).unwrap())
        .collect();
    let (views, failed) = prepare_cultures(&models, find(WordSetKind::Female), find(WordSetKind::Male), Normalization::Unit);
    assert!(failed.is_empty());
    let stats = load_stats_dir(&dir.path().join("world/stats")).unwrap();
    let theme1 = sets.iter().find(|s| s.name == "theme1").unwrap();
    let params = PipelineParams {
        seed: 11,
        ..PipelineParams::default()
    };
    let want = averaged_signed_r2(theme1, &views, &stats[0], &params).unwrap().signed_r2;
    let got: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(got.to_bits(), want.to_bits());
}

#[test]
fn correlate_adds_random_columns_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram");
    for out in ["r1", "r2"] {
        let mut args = vec!["correlate", "--model-dir", "models", "--out-dir", out, "--random-sets", "3", "--threads", "1"];
        args.extend(WORLD_ARGS);
        assert_ok(&run(dir.path(), &args));
    }
    let r1 = read_tree(&dir.path().join("r1"));
    assert_eq!(r1, read_tree(&dir.path().join("r2")));
    let header = String::from_utf8(r1[Path::new("correlation_matrix.csv")].clone()).unwrap();
    assert!(header.starts_with("statistic,theme1,theme2,rand-1,rand-2,rand-3\n"), "{header}");
}

#[test]
fn correlate_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram");
    for (out, threads) in [("t1", "1"), ("t4", "4")] {
        let mut args = vec!["correlate", "--model-dir", "models", "--out-dir", out, "--threads", threads];
        args.extend(WORLD_ARGS);
        assert_ok(&run(dir.path(), &args));
    }
    assert_eq!(read_tree(&dir.path().join("t1")), read_tree(&dir.path().join("t4")));
}

fn write_lexicons(dir: &Path, world: &cultbias::synth::SynthWorld) {
    let mut words: Vec<String> = world.theme_tokens.values().flatten().cloned().collect();
    words.extend(world.fillers.iter().take(40).cloned());
    fs::write(dir.join("adjectives.txt"), words.join("\n") + "\n").unwrap();
    let mut affect = String::from("word,valence,dominance\n");
    for (i, w) in words.iter().enumerate() {
        affect.push_str(&format!("{w},{},{}\n", 1.0 + (i % 9) as f64 * 0.9, 9.0 - (i % 7) as f64));
    }
    fs::write(dir.join("affect.csv"), affect).unwrap();
}

#[test]
fn adjectives_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let world = small_world(dir.path());
    train_world(dir.path(), "skipgram");
    write_lexicons(dir.path(), &world);
    for out in ["a1", "a2"] {
        let mut args = vec![
            "adjectives", "--model-dir", "models", "--out-dir", out, "--adjectives", "adjectives.txt", "--affect",
            "affect.csv", "--statistic", "gap-theme1",
        ];
        args.extend(WORLD_ARGS);
        assert_ok(&run(dir.path(), &args));
    }
    let a1 = read_tree(&dir.path().join("a1"));
    assert_eq!(a1, read_tree(&dir.path().join("a2")));
    assert_eq!(a1.len(), 1);
    let text = String::from_utf8(a1[Path::new("adjectives.gap-theme1.csv")].clone()).unwrap();
    assert!(text.starts_with("section,rank,word,signed_r2,top,"));
    assert!(text.contains("\nvalence,") && text.contains("\ndominance,"), "{text}");
}

#[test]
fn adjectives_rejects_unknown_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let world = small_world(dir.path());
    train_world(dir.path(), "skipgram");
    write_lexicons(dir.path(), &world);
    let mut args = vec!["adjectives", "--model-dir", "models", "--adjectives", "adjectives.txt", "--statistic", "nope"];
    args.extend(WORLD_ARGS);
    assert_eq!(code(&run(dir.path(), &args)), 1);
}

#[test]
fn compare_grid_has_twelve_rows_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "skipgram,cbow,glove,fasttext-sg");
    for out in ["c1", "c2"] {
        let mut args = vec!["compare", "--model-dir", "models", "--out-dir", out];
        args.extend(WORLD_ARGS);
        assert_ok(&run(dir.path(), &args));
    }
    let c1 = read_tree(&dir.path().join("c1"));
    assert_eq!(c1, read_tree(&dir.path().join("c2")));
    let text = String::from_utf8(c1[Path::new("compare.csv")].clone()).unwrap();
    let pair: Vec<&str> = text.lines().filter(|l| l.contains(",theme1,gap-theme1,")).collect();
    assert_eq!(pair.len(), 12);
    let metrics: Vec<&str> = pair[..3].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(metrics, ["axis-projection", "l2-diff", "l2-ratio"]);
    let recommended: Vec<&&str> = pair.iter().filter(|l| l.contains(",true,")).collect();
    assert_eq!(recommended.len(), 1);
    assert!(recommended[0].starts_with("skipgram,axis-projection,"));
}

#[test]
fn compare_omits_missing_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    small_world(dir.path());
    train_world(dir.path(), "cbow");
    let mut args = vec!["compare", "--model-dir", "models", "--out-dir", "c"];
    args.extend(WORLD_ARGS);
    let out = run(dir.path(), &args);
    assert_ok(&out);
    let text = fs::read_to_string(dir.path().join("c/compare.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("cbow,")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no skipgram models"));
}

#[test]
fn synth_reports_seed_and_fails_on_a_tiny_world() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.kv"), "n_cultures = 5\nsentences = 300\nseed = 21\n").unwrap();
    let run_once = |out: &str| run(dir.path(), &["synth", "--spec", "spec.kv", "--out-dir", out, "--dim", "8"]);
    let first = run_once("s1");
    // Far too little text for the oracles to hold.
    assert_eq!(code(&first), 3);
    assert_eq!(code(&run_once("s2")), 3);
    let s1 = read_tree(&dir.path().join("s1"));
    assert_eq!(s1, read_tree(&dir.path().join("s2")));
    let report = String::from_utf8(s1[Path::new("oracle.skipgram.csv")].clone()).unwrap();
    assert!(report.contains("\nseed,21,,\n"), "{report}");
    assert!(s1.contains_key(Path::new("world/truth.csv")));
    assert_eq!(s1.keys().filter(|p| p.starts_with("world/corpus")).count(), 5);
}

#[test]
fn synth_seed_flag_overrides_spec_seed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.kv"), "n_cultures = 5\nsentences = 300\nseed = 21\n").unwrap();
    let out = run(dir.path(), &["synth", "--spec", "spec.kv", "--out-dir", "s", "--dim", "8", "--seed", "4"]);
    assert_eq!(code(&out), 3);
    let report = fs::read_to_string(dir.path().join("s/oracle.skipgram.csv")).unwrap();
    assert!(report.contains("\nseed,4,,\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Usage errors.
    assert_eq!(code(&run(d, &["frobnicate"])), 1);
    assert_eq!(code(&run(d, &["correlate", "--no-such-flag"])), 1);
    assert_eq!(code(&run(d, &["--help"])), 0);
    // Config errors: unknown key, bad value, missing paths, invalid spec.
    assert_eq!(code(&run(d, &["train", "--set", "windw=3"])), 1);
    assert_eq!(code(&run(d, &["train", "--dim", "zero"])), 1);
    assert_eq!(code(&run(d, &["train", "--corpus-dir", "missing"])), 1);
    assert_eq!(code(&run(d, &["preprocess"])), 1);
    assert_eq!(code(&run(d, &["preprocess", "--input", "missing.jsonl"])), 1);
    fs::write(d.join("bad.kv"), "n_cultures = 1\n").unwrap();
    assert_eq!(code(&run(d, &["synth", "--spec", "bad.kv"])), 1);
    // Data errors: present but unusable inputs.
    fs::create_dir_all(d.join("empty")).unwrap();
    assert_eq!(code(&run(d, &["train", "--corpus-dir", "empty"])), 2);
    fs::create_dir_all(d.join("stats")).unwrap();
    fs::write(d.join("stats/manifest.csv"), "name,file\npay,pay.csv\n").unwrap();
    fs::write(d.join("stats/pay.csv"), "culture,value\nAA,oops\n").unwrap();
    assert_eq!(code(&run(d, &["correlate", "--model-dir", "empty", "--stats-dir", "stats"])), 2);
}

#[test]
fn config_file_from_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("raw.jsonl"), common::raw_records()).unwrap();
    fs::write(d.join("run.kv"), "input = raw.jsonl\ncorpus_dir = from-config\nsample_cap = 4\n").unwrap();
    let out = common::bin()
        .current_dir(d)
        .env("CULTBIAS_CONFIG", "run.kv")
        .args(["preprocess", "--corpus-dir", "from-flag"])
        .output()
        .unwrap();
    assert_ok(&out);
    assert!(!d.join("from-config").exists());
    let text = fs::read_to_string(d.join("from-flag/BB.txt")).unwrap();
    assert_eq!(text.lines().count(), 4);
}
