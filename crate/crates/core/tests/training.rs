use cultbias::corpus::CultureCorpus;
use cultbias::embedding::{
    load_model, save_model, train, train_glove_cooccur, Algorithm, CooccurMatrix, EmbeddingModel, ModelFormat, TrainConfig,
};
use cultbias::seed::rng_from;
use rand::Rng;

const FRUIT: [&str; 5] = ["apple", "banana", "cherry", "grape", "melon"];
const TOOLS: [&str; 5] = ["hammer", "wrench", "drill", "saw", "chisel"];

/// Sentences drawn entirely from one of two word clusters.
fn clustered(n: usize) -> CultureCorpus {
    let mut rng = rng_from(11);
    let sentences: Vec<Vec<&str>> = (0..n)
        .map(|_| {
            let pool = if rng.random::<bool>() { &FRUIT } else { &TOOLS };
            (0..6).map(|_| pool[rng.random_range(0..pool.len())]).collect()
        })
        .collect();
    CultureCorpus::from_token_lists("X", sentences)
}

fn config(alg: Algorithm) -> TrainConfig {
    let mut c = TrainConfig::new(alg);
    c.dim = 16;
    c.window = 3;
    c.min_count = 1;
    c.subsample_threshold = 0.0;
    c.bucket_count = 20_000;
    c.seed = 5;
    if alg == Algorithm::Glove {
        c.epochs = 30;
    }
    c
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let n = |v: &[f32]| v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    d / (n(a) * n(b))
}

fn mean_cos(m: &EmbeddingModel, xs: &[&str], ys: &[&str]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for x in xs {
        for y in ys {
            if x != y {
                sum += cosine(m.vector(x).unwrap(), m.vector(y).unwrap());
                n += 1;
            }
        }
    }
    sum / n as f64
}

#[test]
fn clusters_separate_for_every_algorithm() {
    let corpus = clustered(3000);
    for alg in Algorithm::ALL {
        let m = train(&corpus, &config(alg)).unwrap();
        let within = (mean_cos(&m, &FRUIT, &FRUIT) + mean_cos(&m, &TOOLS, &TOOLS)) / 2.0;
        let across = mean_cos(&m, &FRUIT, &TOOLS);
        assert!(within > across + 0.1, "{alg}: within {within:.3} across {across:.3}");
        assert!(m.vectors.iter().all(|x| x.is_finite()), "{alg}");
        for w in FRUIT.iter().chain(&TOOLS) {
            assert!(m.vector(w).unwrap().iter().any(|&x| x != 0.0), "{alg}: {w}");
        }
    }
}

#[test]
fn single_thread_training_is_reproducible() {
    let corpus = clustered(500);
    for alg in Algorithm::ALL {
        let a = train(&corpus, &config(alg)).unwrap();
        let b = train(&corpus, &config(alg)).unwrap();
        assert_eq!(a.vectors, b.vectors, "{alg}");
        let mut other = config(alg);
        other.seed = 6;
        assert_ne!(a.vectors, train(&corpus, &other).unwrap().vectors, "{alg}");
    }
}

#[test]
fn fasttext_embeds_misspellings_from_subwords() {
    let m = train(&clustered(1000), &config(Algorithm::FastTextSg)).unwrap();
    let v = m.embed("applle").expect("subword vector");
    assert!(v.iter().all(|x| x.is_finite()) && v.iter().any(|&x| x != 0.0));
    assert!(cosine(&v, m.vector("apple").unwrap()) > 0.0);
    let sg = train(&clustered(200), &config(Algorithm::SkipGram)).unwrap();
    assert!(sg.embed("applle").is_none());
}

#[test]
fn glove_fits_log_count_ratios() {
    // b and c are interchangeable except through a and d, so their context
    // biases agree and the score gap reduces to ln(X_ab / X_ac) = 2.
    let e2 = 2f64.exp();
    let k = 10.0;
    let (a, b, c, d) = (0u32, 1u32, 2u32, 3u32);
    let mut entries = Vec::new();
    for (i, j, x) in [(a, b, e2 * k), (a, c, k), (d, c, e2 * k), (d, b, k)] {
        entries.push((i, j, x));
        entries.push((j, i, x));
    }
    let cooc = CooccurMatrix::from_entries(4, entries).unwrap();
    let mut cfg = TrainConfig::new(Algorithm::Glove);
    cfg.dim = 8;
    cfg.epochs = 400;
    cfg.seed = 3;
    let fit = train_glove_cooccur(&cooc, &cfg).unwrap();
    let score = |i: usize, j: usize| -> f64 {
        let w = fit.word_row(i);
        let ctx = fit.context_row(j);
        w.iter().zip(ctx).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum::<f64>() + f64::from(fit.context_bias[j])
    };
    let gap = score(0, 1) - score(0, 2);
    assert!((gap - 2.0).abs() < 0.5, "gap {gap}");
    let loss = &fit.epoch_loss;
    let half = loss.len() / 2;
    let early: f64 = loss[..half].iter().sum::<f64>() / half as f64;
    let late: f64 = loss[half..].iter().sum::<f64>() / (loss.len() - half) as f64;
    assert!(late < early, "loss {early} -> {late}");
}

#[test]
fn models_round_trip_and_reject_nan() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = train(&clustered(300), &config(Algorithm::FastTextSg)).unwrap();
    for format in [ModelFormat::Binary, ModelFormat::Text] {
        let p = dir.path().join(format!("m.{}", format.extension()));
        save_model(&m, &p, format).unwrap();
        let back = load_model(&p).unwrap();
        assert_eq!(back.vectors, m.vectors);
        assert_eq!(back.vocab.words(), m.vocab.words());
    }
    let idx = m.vocab.index("melon").unwrap();
    m.vectors[idx * m.dim] = f32::NAN;
    for format in [ModelFormat::Binary, ModelFormat::Text] {
        let p = dir.path().join(format!("nan.{}", format.extension()));
        save_model(&m, &p, format).unwrap();
        let err = load_model(&p).unwrap_err().to_string();
        assert!(err.contains("melon"), "{err}");
    }
}
