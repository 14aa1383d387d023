//! Acceptance suite: one test per criterion, run serially so the timing
//! criteria are not distorted by sibling tests. Each test prints a PASS
//! line with the measured values once its assertions hold.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clasher_core::corpus::{generate, write_jsonl, CorpusSpec};
use clasher_core::engine::{
    run_prequential, DocRecord, LearnerKind, RunRequest, Scheme, SnapshotCadence, StreamConfig,
    StreamEngine,
};
use clasher_core::geometry::{
    exact_vectorize, gram_correlation, ExactVector, GramParams, GramSide, VocabIndex, WeightScheme,
};
use clasher_core::hashing::{companion_sign_seed, embed_tf, hash_word, HashConfig};
use clasher_core::metrics::LabelCounters;
use clasher_core::model::{LabelId, LabelSet};
use clasher_core::sketch::{embed_tfidf, IdfSketch};
use clasher_core::text::{tokenize, TokenSeq, TokenizerConfig};

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn tokenized(records: &[DocRecord]) -> Vec<TokenSeq> {
    let tokenizer = TokenizerConfig::default();
    records
        .iter()
        .map(|r| tokenize(&r.text, &tokenizer))
        .collect()
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Criterion 1: the hashed inner product is an unbiased estimate of the
/// exact inner product. 20 fixed sparse vector pairs over a 10^4-word
/// vocabulary, ~100 nonzeros each; the mean over 2000 independent seed
/// pairs at m = 256 lands within 2% of the exact value.
#[test]
fn criterion_01_hash_kernel_unbiasedness() {
    let _guard = serial();
    let started = Instant::now();
    const VOCAB: usize = 10_000;
    const PAIRS: usize = 20;
    const SEED_PAIRS: u64 = 2_000;
    const M: usize = 256;

    let mut worst_rel = 0.0f64;
    for pair in 0..PAIRS {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + pair as u64);
        let mut indices: Vec<usize> = (0..VOCAB).collect();
        indices.shuffle(&mut rng);
        let shared = &indices[..50];
        let only_a = &indices[50..100];
        let only_b = &indices[100..150];

        let mut doc = |own: &[usize]| -> TokenSeq {
            let mut tokens = Vec::new();
            for &i in shared.iter().chain(own) {
                let count = rng.gen_range(1..=3);
                for _ in 0..count {
                    tokens.push(format!("v{i:04}"));
                }
            }
            TokenSeq::from_tokens(tokens)
        };
        let doc_a = doc(only_a);
        let doc_b = doc(only_b);

        // Exact inner product from the batch oracle.
        let corpus = vec![doc_a.clone(), doc_b.clone()];
        let vocab = VocabIndex::build(&corpus);
        let exact = exact_vectorize(&doc_a, &vocab, WeightScheme::Tf)
            .unwrap()
            .dot(&exact_vectorize(&doc_b, &vocab, WeightScheme::Tf).unwrap());
        assert!(exact > 0.0, "fixture pairs must overlap");

        let mut sum = 0.0;
        for seed in 0..SEED_PAIRS {
            let base = (pair as u64) * SEED_PAIRS + seed + 1;
            let config = HashConfig::new(M, base, companion_sign_seed(base)).unwrap();
            sum += embed_tf(&doc_a, &config).dot(&embed_tf(&doc_b, &config));
        }
        let mean = sum / SEED_PAIRS as f64;
        let rel = (mean - exact).abs() / exact;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 0.02,
            "pair {pair}: mean {mean:.3} vs exact {exact:.3} (relative {rel:.4})"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is 1 min");
    eprintln!(
        "[criterion 1] PASS hash-kernel unbiasedness: worst relative error {worst_rel:.4} \
         over {PAIRS} pairs x {SEED_PAIRS} seeds ({elapsed:.2?})"
    );
}

fn frequency_stream() -> (Vec<TokenSeq>, VocabIndex) {
    let spec = CorpusSpec {
        docs: 10_000,
        vocab_size: 2_000,
        signature_words: 50,
        seed: 1_234,
        ..CorpusSpec::default()
    };
    let corpus = tokenized(&generate(&spec).unwrap());
    let vocab = VocabIndex::build(&corpus);
    (corpus, vocab)
}

/// Criterion 2: count-min over-count bound at m = ceil(e / eps). Every
/// probe over-counts (deterministic), and probes exceeding eps * ||f||_1
/// stay below the single-row failure rate 1/e (+0.05 slack); three rows
/// push the rate below e^-3 (+0.05).
#[test]
fn criterion_02_count_min_bound() {
    let _guard = serial();
    let started = Instant::now();
    const EPS: f64 = 0.01;
    let width = (std::f64::consts::E / EPS).ceil() as usize; // 272

    let (corpus, vocab) = frequency_stream();
    let mass = vocab.total_doc_frequency() as f64;
    let budget = EPS * mass;

    let mut rates = Vec::new();
    for rows in [1usize, 3] {
        let config = HashConfig::new(width, 77, 78).unwrap();
        let mut sketch = IdfSketch::new(&config, rows).unwrap();
        for doc in &corpus {
            sketch.absorb_document(doc);
        }
        let mut violations = 0usize;
        let mut probes = 0usize;
        for word in vocab.words() {
            let truth = vocab.doc_frequency(word).unwrap();
            let estimate = sketch.document_frequency(word);
            assert!(
                estimate >= truth,
                "under-count for {word:?}: {estimate} < {truth} at L={rows}"
            );
            probes += 1;
            if (estimate - truth) as f64 > budget {
                violations += 1;
            }
        }
        let rate = violations as f64 / probes as f64;
        let bound = (-(rows as f64)).exp() + 0.05;
        assert!(
            rate <= bound,
            "violation rate {rate:.4} exceeds {bound:.4} at L={rows}"
        );
        rates.push((rows, rate, bound));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is 1 min");
    eprintln!(
        "[criterion 2] PASS count-min bound: {} probes, rates {:?} ({elapsed:.2?})",
        vocab.len(),
        rates
            .iter()
            .map(|(rows, rate, bound)| format!("L={rows}: {rate:.4} <= {bound:.4}"))
            .collect::<Vec<_>>(),
    );
}

/// Criterion 3: the sketched IDF never exceeds the exact IDF, on every
/// probe (counters only over-count, and log is monotone).
#[test]
fn criterion_03_idf_sandwich() {
    let _guard = serial();
    let (corpus, vocab) = frequency_stream();
    let width = (std::f64::consts::E / 0.01).ceil() as usize;
    let config = HashConfig::new(width, 77, 78).unwrap();
    let mut sketch = IdfSketch::new(&config, 1).unwrap();
    for doc in &corpus {
        sketch.absorb_document(doc);
    }
    assert_eq!(sketch.docs(), vocab.docs());
    let mut probes = 0usize;
    for word in vocab.words() {
        let exact = vocab.idf(word).unwrap();
        let estimated = sketch.idf_of_word(word).unwrap();
        assert!(
            estimated <= exact,
            "idf estimate {estimated} exceeds exact {exact} for {word:?}"
        );
        probes += 1;
    }
    eprintln!("[criterion 3] PASS idf sandwich: upper bound held on all {probes} probes");
}

/// Criterion 4: with a 50-word vocabulary and m = 2^16 verified
/// collision-free, the online embedding equals the exact online TF-IDF
/// re-indexed by bucket, within 1e-12 per component.
#[test]
fn criterion_04_collision_free_exactness() {
    let _guard = serial();
    const M: usize = 1 << 16;
    let words: Vec<String> = (0..50).map(|i| format!("w{i:02}")).collect();

    // Verify collision-free bucketing for the chosen seed.
    let mut config = None;
    for seed in 1..100u64 {
        let candidate = HashConfig::new(M, seed, companion_sign_seed(seed)).unwrap();
        let buckets: BTreeSet<usize> = words.iter().map(|w| hash_word(w, &candidate).0).collect();
        if buckets.len() == words.len() {
            config = Some(candidate);
            break;
        }
    }
    let config = config.expect("no collision-free seed below 100");

    let mut sketch = IdfSketch::new(&config, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut oracle_df: HashMap<String, u64> = HashMap::new();
    let mut worst = 0.0f64;
    for round in 1..=40u64 {
        let mut chosen = words.clone();
        chosen.shuffle(&mut rng);
        chosen.truncate(rng.gen_range(5..=15));
        let mut tokens = Vec::new();
        let mut counts: HashMap<String, u64> = HashMap::new();
        for word in &chosen {
            let count = rng.gen_range(1..=3u64);
            counts.insert(word.clone(), count);
            for _ in 0..count {
                tokens.push(word.clone());
            }
        }
        let doc = TokenSeq::from_tokens(tokens);

        // Exact online TF-IDF, inclusive of the current document.
        for word in &chosen {
            *oracle_df.entry(word.clone()).or_insert(0) += 1;
        }
        let embedded = embed_tfidf(&doc, &mut sketch, &config);
        assert_eq!(sketch.docs(), round);

        let mut expected = vec![0.0f64; M];
        for word in &chosen {
            let (bucket, sign) = hash_word(word, &config);
            let weight = (round as f64 / oracle_df[word] as f64).ln();
            expected[bucket] = sign * counts[word] as f64 * weight;
        }
        for (bucket, (&got, &want)) in embedded.components().iter().zip(&expected).enumerate() {
            let diff = (got - want).abs();
            worst = worst.max(diff);
            assert!(
                diff <= 1e-12,
                "round {round} bucket {bucket}: {got} vs oracle {want}"
            );
        }
    }
    eprintln!(
        "[criterion 4] PASS collision-free exactness: max component error {worst:.2e} over 40 documents"
    );
}

/// Criterion 5: the correlation curve of the hashed space against the
/// exact oracle is non-decreasing in m (tolerance 0.005 per step), reaches
/// 0.99 at m = 2^16, and the online IDF correction beats the uncorrected
/// embedding against exact TF-IDF at m = 2^14.
#[test]
fn criterion_05_correlation_curve_shape() {
    let _guard = serial();
    let started = Instant::now();
    let spec = CorpusSpec {
        docs: 5_000,
        seed: 77,
        ..CorpusSpec::default()
    };
    let corpus = tokenized(&generate(&spec).unwrap());
    let seeds: Vec<u64> = vec![1, 2, 3, 4, 5];
    let dims = [1usize << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16];

    let median_rho = |dim: usize, a: GramSide, b: GramSide| -> f64 {
        let rhos: Vec<f64> = seeds
            .iter()
            .map(|&seed| {
                let params = GramParams {
                    dim,
                    pairs: 200_000,
                    sample_seed: 99,
                    index_seed: seed,
                    sign_seed: companion_sign_seed(seed),
                };
                gram_correlation(&corpus, a, b, &params).unwrap()
            })
            .collect();
        median_of(rhos)
    };

    let tf_curve: Vec<f64> = dims
        .iter()
        .map(|&dim| median_rho(dim, GramSide::ExactTf, GramSide::HashedTf))
        .collect();
    for (step, window) in tf_curve.windows(2).enumerate() {
        assert!(
            window[1] >= window[0] - 0.005,
            "curve decreased at step {step}: {tf_curve:?}"
        );
    }
    assert!(
        tf_curve[dims.len() - 1] >= 0.99,
        "rho at m=2^16 is {}",
        tf_curve[dims.len() - 1]
    );

    let corrected = median_rho(1 << 14, GramSide::ExactTfidf, GramSide::HashedTfidf);
    let uncorrected = median_rho(1 << 14, GramSide::ExactTfidf, GramSide::HashedTf);
    assert!(
        corrected > uncorrected,
        "idf correction did not recover correlation: {corrected:.4} vs {uncorrected:.4}"
    );
    eprintln!(
        "[criterion 5] PASS correlation curve: tf curve {:?}, at m=2^14 corrected {corrected:.4} > uncorrected {uncorrected:.4} ({:.2?})",
        tf_curve
            .iter()
            .map(|rho| format!("{rho:.4}"))
            .collect::<Vec<_>>(),
        started.elapsed()
    );
}

/// Criterion 6: after streaming 10^4 labelled documents in Mode 1, every
/// trained prototype equals its label's batch centroid within 1e-9
/// relative error and every label statistic equals the co-occurrence ratio
/// within 1e-9 absolute.
#[test]
fn criterion_06_mode1_batch_equivalence() {
    let _guard = serial();
    let spec = CorpusSpec {
        docs: 10_000,
        vocab_size: 4_000,
        signature_words: 100,
        doc_len_min: 10,
        doc_len_max: 40,
        seed: 5_150,
        ..CorpusSpec::default()
    };
    let records = generate(&spec).unwrap();
    let config = StreamConfig {
        dim: 1_024,
        scheme: Scheme::Tf,
        learner: LearnerKind::Mode1,
        timing: false,
        ..StreamConfig::default()
    };
    let mut engine = StreamEngine::new(config.clone()).unwrap();
    for record in &records {
        engine.step(&record.text, &record.labels).unwrap();
    }

    // Batch oracle: second pass accumulating exact per-label sums and
    // co-occurrence counts over the same embeddings.
    let hash = config.hash_config().unwrap();
    let tokenizer = TokenizerConfig::default();
    let labels = engine.labels();
    let n_labels = labels.len();
    let mut sums: Vec<Vec<f64>> = vec![vec![0.0; config.dim]; n_labels];
    let mut counts = vec![0u64; n_labels];
    let mut cooccur = vec![vec![0u64; n_labels]; n_labels];
    for record in &records {
        let v = embed_tf(&tokenize(&record.text, &tokenizer), &hash);
        let ids: Vec<usize> = record
            .labels
            .iter()
            .map(|name| labels.get(name).unwrap().index())
            .collect();
        for &i in &ids {
            counts[i] += 1;
            for (acc, x) in sums[i].iter_mut().zip(v.components()) {
                *acc += x;
            }
            for &j in &ids {
                cooccur[i][j] += 1;
            }
        }
    }

    let model = engine.learner().as_clasher().unwrap();
    let mut worst_proto = 0.0f64;
    let mut worst_stat = 0.0f64;
    for i in 0..n_labels {
        let region = model.region(i).unwrap();
        assert_eq!(region.count(), counts[i]);
        let mean: Vec<f64> = sums[i].iter().map(|s| s / counts[i] as f64).collect();
        let diff2: f64 = region
            .prototype()
            .components()
            .iter()
            .zip(&mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let norm2: f64 = mean.iter().map(|x| x * x).sum();
        let rel = (diff2 / norm2).sqrt();
        worst_proto = worst_proto.max(rel);
        assert!(rel <= 1e-9, "prototype {i} off by relative {rel:.2e}");
        for (j, &stat) in region.stats().iter().enumerate() {
            let expected = cooccur[i][j] as f64 / counts[i] as f64;
            let err = (stat - expected).abs();
            worst_stat = worst_stat.max(err);
            assert!(err <= 1e-9, "stat ({i},{j}) off by {err:.2e}");
        }
    }
    eprintln!(
        "[criterion 6] PASS mode-1 batch equivalence: worst prototype error {worst_proto:.2e}, worst stat error {worst_stat:.2e}"
    );
}

fn learning_corpus() -> Vec<DocRecord> {
    generate(&CorpusSpec::default()).unwrap()
}

fn label_set_of(record: &DocRecord) -> BTreeSet<&str> {
    record.labels.iter().map(String::as_str).collect()
}

/// Exact-space 1-NN oracle on a prefix of the corpus: predict the label
/// set of the nearest L2-normalized exact TF vector among the first 1500
/// documents for each of the following 500, and return the micro F1.
fn exact_space_knn_micro_f1(records: &[DocRecord]) -> f64 {
    const TRAIN: usize = 1_500;
    const TEST: usize = 500;
    let prefix = &records[..TRAIN + TEST];
    let tokens = tokenized(prefix);
    let vocab = VocabIndex::build(&tokens);
    let vectors: Vec<ExactVector> = tokens
        .iter()
        .map(|doc| {
            exact_vectorize(doc, &vocab, WeightScheme::Tf)
                .unwrap()
                .l2_normalized()
        })
        .collect();

    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for t in TRAIN..TRAIN + TEST {
        let mut best = (f64::INFINITY, 0usize);
        for candidate in 0..TRAIN {
            let d = vectors[t].squared_distance(&vectors[candidate]);
            if d < best.0 {
                best = (d, candidate);
            }
        }
        let predicted = label_set_of(&prefix[best.1]);
        let truth = label_set_of(&prefix[t]);
        tp += predicted.intersection(&truth).count() as u64;
        fp += predicted.difference(&truth).count() as u64;
        fn_ += truth.difference(&predicted).count() as u64;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Criterion 7: on the 10-topic synthetic corpus (20k documents, ~1.6
/// labels each, verified separable by the exact-space 1-NN oracle), Mode 1
/// at m = 2^12 and theta = 0.5 reaches cumulative micro-F1 >= 0.85 and
/// macro-F1 >= 0.80 by round 20k, in under two minutes.
#[test]
fn criterion_07_end_to_end_learning() {
    let _guard = serial();
    let started = Instant::now();
    let records = learning_corpus();
    assert_eq!(records.len(), 20_000);
    let avg_labels =
        records.iter().map(|r| r.labels.len()).sum::<usize>() as f64 / records.len() as f64;
    assert!((avg_labels - 1.6).abs() < 0.05, "avg labels {avg_labels}");

    let oracle = exact_space_knn_micro_f1(&records);
    assert!(
        oracle >= 0.95,
        "corpus not separable enough: exact 1-NN micro-F1 {oracle:.4}"
    );

    let mut engine = StreamEngine::new(StreamConfig {
        dim: 1 << 12,
        theta: 0.5,
        scheme: Scheme::Tfidf,
        learner: LearnerKind::Mode1,
        timing: false,
        ..StreamConfig::default()
    })
    .unwrap();
    for record in &records {
        engine.step(&record.text, &record.labels).unwrap();
    }
    let summary = engine.summary().unwrap();
    assert!(
        summary.micro_f1 >= 0.85,
        "cumulative micro-F1 {:.4} below 0.85",
        summary.micro_f1
    );
    assert!(
        summary.macro_f1 >= 0.80,
        "cumulative macro-F1 {:.4} below 0.80",
        summary.macro_f1
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget is 2 min");
    eprintln!(
        "[criterion 7] PASS end-to-end learning: oracle 1-NN {oracle:.4}, micro-F1 {:.4}, macro-F1 {:.4} ({elapsed:.2?})",
        summary.micro_f1, summary.macro_f1
    );
}

/// Criterion 8: final macro-F1 is non-increasing as the labelled fraction
/// p drops through {1, 0.25, 0.0625}, and at p = 0.0625 the region
/// classifier is ahead of the perceptron by round 5k.
#[test]
fn criterion_08_partial_labelling() {
    let _guard = serial();
    let records = learning_corpus();

    let run_clasher = |p: f64| -> (f64, f64) {
        let mut engine = StreamEngine::new(StreamConfig {
            dim: 1 << 12,
            label_prob: p,
            timing: false,
            ..StreamConfig::default()
        })
        .unwrap();
        let mut at_5k = 0.0;
        for (index, record) in records.iter().enumerate() {
            engine.step(&record.text, &record.labels).unwrap();
            if index + 1 == 5_000 {
                at_5k = engine.summary().unwrap().macro_f1;
            }
        }
        (engine.summary().unwrap().macro_f1, at_5k)
    };

    let (final_full, _) = run_clasher(1.0);
    let (final_quarter, _) = run_clasher(0.25);
    let (final_sixteenth, clasher_at_5k) = run_clasher(0.0625);
    assert!(
        final_full >= final_quarter && final_quarter >= final_sixteenth,
        "macro-F1 not non-increasing in p: {final_full:.4}, {final_quarter:.4}, {final_sixteenth:.4}"
    );

    let mut perceptron = StreamEngine::new(StreamConfig {
        dim: 1 << 12,
        learner: LearnerKind::Perceptron,
        label_prob: 0.0625,
        timing: false,
        ..StreamConfig::default()
    })
    .unwrap();
    for record in records.iter().take(5_000) {
        perceptron.step(&record.text, &record.labels).unwrap();
    }
    let perceptron_at_5k = perceptron.summary().unwrap().macro_f1;
    assert!(
        clasher_at_5k > perceptron_at_5k,
        "clasher {clasher_at_5k:.4} not ahead of perceptron {perceptron_at_5k:.4} at round 5k"
    );
    eprintln!(
        "[criterion 8] PASS partial labelling: final macro-F1 {final_full:.4} >= {final_quarter:.4} >= {final_sixteenth:.4}; at 5k clasher {clasher_at_5k:.4} > perceptron {perceptron_at_5k:.4}"
    );
}

/// Criterion 9: constant per-document cost and flat memory for the region
/// classifier over 10^5 documents, against linear growth for 1-NN.
#[test]
fn criterion_09_constant_resource_contract() {
    let _guard = serial();
    let spec = CorpusSpec {
        docs: 100_000,
        vocab_size: 4_000,
        signature_words: 100,
        doc_len_min: 20,
        doc_len_max: 40,
        seed: 31_415,
        ..CorpusSpec::default()
    };
    let records = generate(&spec).unwrap();

    let run = |config: StreamConfig| -> (Vec<f64>, Vec<f64>, u64, u64, StreamEngine) {
        let mut engine = StreamEngine::new(config).unwrap();
        let mut early = Vec::new();
        let mut late = Vec::new();
        let mut mem_checkpoint = 0u64;
        for (index, record) in records.iter().enumerate() {
            let round = index + 1;
            let start = Instant::now();
            engine.step(&record.text, &record.labels).unwrap();
            let micros = start.elapsed().as_secs_f64() * 1e6;
            if (5_001..=15_000).contains(&round) {
                early.push(micros);
            } else if round > 90_000 {
                late.push(micros);
            }
            if round == 10_000 {
                mem_checkpoint = engine.memory_bytes();
            }
        }
        let final_mem = engine.memory_bytes();
        (early, late, mem_checkpoint, final_mem, engine)
    };

    let (early, late, mem_10k, mem_100k, _) = run(StreamConfig {
        dim: 1_024,
        timing: false,
        ..StreamConfig::default()
    });
    let clasher_ratio = median_of(late) / median_of(early.clone());
    let clasher_early = median_of(early);
    assert!(
        clasher_ratio <= 1.5,
        "clasher latency ratio {clasher_ratio:.3} exceeds 1.5"
    );
    assert_eq!(mem_10k, mem_100k, "clasher memory is not flat");

    let (knn_early, knn_late, knn_mem_20k, knn_mem_100k, engine) = {
        let mut engine = StreamEngine::new(StreamConfig {
            dim: 16,
            scheme: Scheme::Tf,
            learner: LearnerKind::Knn1,
            timing: false,
            ..StreamConfig::default()
        })
        .unwrap();
        let mut early = Vec::new();
        let mut late = Vec::new();
        let mut mem_20k = 0u64;
        for (index, record) in records.iter().enumerate() {
            let round = index + 1;
            let start = Instant::now();
            engine.step(&record.text, &record.labels).unwrap();
            let micros = start.elapsed().as_secs_f64() * 1e6;
            if (5_001..=15_000).contains(&round) {
                early.push(micros);
            } else if round > 90_000 {
                late.push(micros);
            }
            if round == 20_000 {
                mem_20k = engine.memory_bytes();
            }
        }
        let mem_100k = engine.memory_bytes();
        (early, late, mem_20k, mem_100k, engine)
    };
    let knn_ratio = median_of(knn_late) / median_of(knn_early);
    assert!(
        knn_ratio >= 5.0,
        "knn latency ratio {knn_ratio:.2} below the 5x growth floor"
    );
    let store = engine.learner().as_knn().unwrap();
    assert_eq!(
        store.len() as u64,
        engine.rounds(),
        "knn stores every labelled round"
    );
    assert!(
        knn_mem_100k as f64 >= 4.5 * knn_mem_20k as f64,
        "knn memory did not grow linearly: {knn_mem_20k} -> {knn_mem_100k}"
    );
    eprintln!(
        "[criterion 9] PASS constant resources: clasher ratio {clasher_ratio:.3} (early median {clasher_early:.1}us), memory flat at {mem_100k} bytes; knn ratio {knn_ratio:.1}, memory {knn_mem_20k} -> {knn_mem_100k}"
    );
}

/// Criterion 10: the summarizer reproduces the hand-computed macro/micro
/// table exactly, and micro F1 recombines from micro precision and recall
/// to 1e-12.
#[test]
fn criterion_10_metric_correctness() {
    let _guard = serial();
    let set = |ids: &[u32]| -> LabelSet { ids.iter().map(|&i| LabelId(i)).collect() };

    // Label A: tp=9, fp=1, fn=1; label B: tp=0, fp=2, fn=2.
    let mut counters = LabelCounters::new();
    counters.ensure_labels(2);
    for _ in 0..9 {
        counters.record(&set(&[0]), &set(&[0]));
    }
    counters.record(&set(&[0]), &set(&[]));
    counters.record(&set(&[]), &set(&[0]));
    for _ in 0..2 {
        counters.record(&set(&[1]), &set(&[]));
        counters.record(&set(&[]), &set(&[1]));
    }
    let s = counters.summarize().unwrap();
    assert_eq!(s.macro_f1, 0.45);
    assert_eq!(s.micro_f1, 0.75);
    let recombined = 2.0 * s.micro_p * s.micro_r / (s.micro_p + s.micro_r);
    assert!((s.micro_f1 - recombined).abs() <= 1e-12);

    // Single-label case: tp=2, fp=1, fn=1 -> F1 = 4/6, macro == micro.
    let mut single = LabelCounters::new();
    single.ensure_labels(1);
    single.record(&set(&[0]), &set(&[0]));
    single.record(&set(&[0]), &set(&[0]));
    single.record(&set(&[0]), &set(&[]));
    single.record(&set(&[]), &set(&[0]));
    let s1 = single.summarize().unwrap();
    assert!((s1.micro_f1 - 4.0 / 6.0).abs() <= 1e-12);
    assert_eq!(s1.micro_f1, s1.macro_f1);
    eprintln!(
        "[criterion 10] PASS metric correctness: macro 0.45 / micro 0.75 table reproduced exactly"
    );
}

/// Criterion 11: byte-identical outputs across identical runs, and a
/// mid-stream snapshot/restore produces the same predictions as the
/// uninterrupted run.
#[test]
fn criterion_11_determinism() {
    let _guard = serial();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("stream.jsonl");
    let spec = CorpusSpec {
        docs: 3_000,
        vocab_size: 4_000,
        signature_words: 100,
        doc_len_min: 10,
        doc_len_max: 40,
        seed: 2_718,
        ..CorpusSpec::default()
    };
    write_jsonl(&spec, &input).unwrap();

    let run = |tag: &str| -> (String, Vec<u8>) {
        let csv_path = dir.path().join(format!("{tag}.csv"));
        let model_path = dir.path().join(format!("{tag}.model.json"));
        let report = run_prequential(&RunRequest {
            config: StreamConfig {
                dim: 1_024,
                timing: false,
                label_prob: 0.5,
                cadence: SnapshotCadence::Fixed { every: 500 },
                ..StreamConfig::default()
            },
            input: input.clone(),
            output: Some(csv_path.clone()),
            model_in: None,
            model_out: Some(model_path.clone()),
        })
        .unwrap();
        assert_eq!(report.rounds, 3_000);
        (
            std::fs::read_to_string(&csv_path).unwrap(),
            std::fs::read(&model_path).unwrap(),
        )
    };
    let (csv_a, model_a) = run("a");
    let (csv_b, model_b) = run("b");
    assert_eq!(csv_a, csv_b, "CSV outputs differ between identical runs");
    assert_eq!(
        model_a, model_b,
        "model snapshots differ between identical runs"
    );

    // Mid-stream dump/load reproduces the uninterrupted predictions.
    let records: Vec<DocRecord> = std::fs::read_to_string(&input)
        .unwrap()
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    let config = StreamConfig {
        dim: 1_024,
        timing: false,
        label_prob: 0.5,
        ..StreamConfig::default()
    };
    let mut reference = StreamEngine::new(config.clone()).unwrap();
    let reference_steps: Vec<_> = records
        .iter()
        .map(|r| reference.step(&r.text, &r.labels).unwrap())
        .collect();

    let mut interrupted = StreamEngine::new(config).unwrap();
    for record in &records[..1_500] {
        interrupted.step(&record.text, &record.labels).unwrap();
    }
    let json = serde_json::to_string(&interrupted.snapshot()).unwrap();
    let mut resumed = StreamEngine::from_snapshot(serde_json::from_str(&json).unwrap()).unwrap();
    for (offset, record) in records[1_500..].iter().enumerate() {
        let step = resumed.step(&record.text, &record.labels).unwrap();
        assert_eq!(
            step,
            reference_steps[1_500 + offset],
            "divergence at round {}",
            step.round
        );
    }
    eprintln!(
        "[criterion 11] PASS determinism: byte-identical CSV and snapshots; mid-stream restore matched all {} resumed rounds",
        records.len() - 1_500
    );
}
