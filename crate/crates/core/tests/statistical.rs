//! Statistical behavior of the hashing map: bucket uniformity, sign
//! balance, norm concentration, and the perceptron mistake bound on a
//! separable stream. These are distributional checks with explicit nulls,
//! not exact assertions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use clasher_core::baselines::PerceptronBr;
use clasher_core::hashing::{embed_tf, hash_word, HashConfig, HashedVector};
use clasher_core::model::{LabelId, LabelSet};
use clasher_core::text::TokenSeq;

fn random_words(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| format!("k{:016x}", rng.gen::<u64>()))
        .collect()
}

#[test]
fn buckets_are_uniform_and_signs_are_balanced() {
    const WORDS: usize = 100_000;
    const M: usize = 256;
    let config = HashConfig::new(M, 0xfeed, 0xbeef).unwrap();
    let words = random_words(WORDS, 5);

    let mut histogram = vec![0u64; M];
    let mut sign_sum = 0.0f64;
    for word in &words {
        let (bucket, sign) = hash_word(word, &config);
        histogram[bucket] += 1;
        sign_sum += sign;
    }

    let expected = WORDS as f64 / M as f64;
    let chi2: f64 = histogram
        .iter()
        .map(|&observed| {
            let d = observed as f64 - expected;
            d * d / expected
        })
        .sum();
    // Upper 10^-3 quantile of chi-square with M - 1 degrees of freedom.
    let critical = ChiSquared::new((M - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 1e-3);
    assert!(
        chi2 < critical,
        "chi2 = {chi2:.1} exceeds the {critical:.1} critical value"
    );

    let sign_mean = sign_sum / WORDS as f64;
    assert!(
        sign_mean.abs() <= 0.02,
        "sign mean {sign_mean:.4} outside [-0.02, 0.02]"
    );
}

#[test]
fn squared_norm_distortion_shrinks_with_dimension() {
    // Fixed test vector: 100 distinct words once each, ||x||^2 = 100.
    const SEEDS: u64 = 400;
    const EPSILON: f64 = 0.05;
    let words: Vec<String> = (0..100).map(|i| format!("term{i:03}")).collect();
    let tokens = TokenSeq::from_tokens(words);
    let exact = 100.0;

    let violation_rate = |m: usize| {
        let mut violations = 0usize;
        for seed in 0..SEEDS {
            let config = HashConfig::new(m, seed * 2 + 1, seed * 2 + 2).unwrap();
            let embedded = embed_tf(&tokens, &config);
            let distorted = (embedded.dot(&embedded) - exact).abs() > EPSILON * exact;
            violations += usize::from(distorted);
        }
        violations as f64 / SEEDS as f64
    };

    let dims = [1usize << 8, 1 << 10, 1 << 12, 1 << 14];
    let rates: Vec<f64> = dims.iter().map(|&m| violation_rate(m)).collect();
    for window in rates.windows(2) {
        assert!(
            window[1] <= window[0] + 0.02,
            "violation rate increased along the dimension grid: {rates:?}"
        );
    }
    assert!(
        rates[3] < rates[0],
        "no overall concentration improvement: {rates:?}"
    );
}

#[test]
fn perceptron_converges_on_a_separable_stream() {
    // Margin-1 stream in an 8-dimensional space: the label is the sign of
    // the projection onto a fixed direction, and every document sits at
    // least one unit away from the separating hyperplane.
    const DIM: usize = 8;
    const DOCS: usize = 500;
    let direction: Vec<f64> = {
        let raw = [1.0, -1.0, 0.5, 2.0, -0.5, 1.5, -2.0, 1.0];
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.iter().map(|x| x / norm).collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut docs = Vec::with_capacity(DOCS);
    let mut max_norm2: f64 = 0.0;
    for i in 0..DOCS {
        let positive = i % 2 == 0;
        let mut v: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Remove the component along the direction, then place the point
        // exactly margin 1 + slack away on the correct side.
        let t: f64 = v.iter().zip(&direction).map(|(a, b)| a * b).sum();
        let slack = rng.gen_range(0.0..1.0);
        let target = if positive { 1.0 + slack } else { -1.0 - slack };
        for (x, d) in v.iter_mut().zip(&direction) {
            *x += (target - t) * d;
        }
        let norm2 = v.iter().map(|x| x * x).sum::<f64>();
        max_norm2 = max_norm2.max(norm2);
        docs.push((HashedVector::from_components(v), positive));
    }

    let mut model = PerceptronBr::new(DIM);
    model.ensure_labels(1);
    let truth_set = LabelSet::from([0]);
    let empty = LabelSet::new();
    let mut mistakes = 0usize;
    let mut last_mistake_round = 0usize;
    for (round, (v, positive)) in docs.iter().enumerate() {
        let predicted = model.predict(v);
        let truth = if *positive { &truth_set } else { &empty };
        if predicted.contains(LabelId(0)) != *positive {
            mistakes += 1;
            last_mistake_round = round + 1;
        }
        model.update(v, &predicted, truth);
    }

    // Classic bound: mistakes <= (R / margin)^2 with margin 1.
    let bound = max_norm2.ceil() as usize;
    assert!(
        mistakes <= bound,
        "{mistakes} mistakes exceed the ({max_norm2:.1}) mistake bound"
    );
    assert!(
        last_mistake_round <= DOCS - 100,
        "still making mistakes at round {last_mistake_round}"
    );
}
