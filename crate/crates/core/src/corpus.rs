//! Reproducible synthetic multi-label corpus generator.
//!
//! Documents mix words from a Zipf-distributed background vocabulary with
//! words from per-topic signature blocks, so topics are separable in the
//! exact word-count space while the global word distribution keeps the
//! heavy head and long tail of real text. Labels follow a paired-topic
//! structure: the first `paired_topics` topics come in partner pairs
//! (0,1), (2,3), ... and a document of a paired topic also carries its
//! partner with probability `partner_prob`; remaining topics are
//! singletons. At the defaults (10 topics, 8 paired, 0.75) the expected
//! number of labels per document is 1.6.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::engine::DocRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub docs: usize,
    pub topics: usize,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    /// Number of topics arranged in partner pairs; must be even and at
    /// most `topics`.
    pub paired_topics: usize,
    /// Probability that a paired topic's document also carries its partner
    /// label.
    pub partner_prob: f64,
    /// Fraction of tokens drawn from the signature block of one of the
    /// document's topics (the rest come from the background distribution).
    pub topic_word_frac: f64,
    /// Signature block size per topic.
    pub signature_words: usize,
    pub doc_len_min: usize,
    pub doc_len_max: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            docs: 20_000,
            topics: 10,
            vocab_size: 20_000,
            zipf_exponent: 1.1,
            paired_topics: 8,
            partner_prob: 0.75,
            topic_word_frac: 0.7,
            signature_words: 200,
            doc_len_min: 30,
            doc_len_max: 70,
            seed: 42,
        }
    }
}

/// First vocabulary rank reserved for signature blocks; the ranks above it
/// stay purely background so the corpus keeps a stop-word-like head.
const SIGNATURE_BASE: usize = 100;

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.docs == 0 || self.topics == 0 {
            return Err(Error::InvalidConfig(
                "corpus needs at least one document and one topic".into(),
            ));
        }
        if !self.paired_topics.is_multiple_of(2) || self.paired_topics > self.topics {
            return Err(Error::InvalidConfig(
                "paired_topics must be even and at most topics".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.partner_prob) || !(0.0..=1.0).contains(&self.topic_word_frac)
        {
            return Err(Error::InvalidConfig(
                "partner_prob and topic_word_frac must be in [0, 1]".into(),
            ));
        }
        if self.doc_len_min == 0 || self.doc_len_min > self.doc_len_max {
            return Err(Error::InvalidConfig(
                "document length bounds must satisfy 1 <= min <= max".into(),
            ));
        }
        if self.zipf_exponent <= 0.0 {
            return Err(Error::InvalidConfig(
                "zipf exponent must be positive".into(),
            ));
        }
        let needed = SIGNATURE_BASE + self.topics * self.signature_words;
        if self.vocab_size < needed {
            return Err(Error::InvalidConfig(format!(
                "vocab_size {} too small for {} topics with {} signature words (needs >= {})",
                self.vocab_size, self.topics, self.signature_words, needed
            )));
        }
        Ok(())
    }

    /// Expected labels per document under the pair structure.
    pub fn expected_labels_per_doc(&self) -> f64 {
        let paired = self.paired_topics as f64;
        let total = self.topics as f64;
        (paired * (1.0 + self.partner_prob) + (total - paired)) / total
    }
}

fn word_for(index: usize) -> String {
    format!("w{index:05}")
}

pub fn label_name(topic: usize) -> String {
    format!("topic{topic}")
}

/// Generate the corpus as in-memory records, deterministically from the
/// spec's seed.
pub fn generate(spec: &CorpusSpec) -> Result<Vec<DocRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let background = Zipf::new(spec.vocab_size as u64, spec.zipf_exponent)
        .map_err(|e| Error::InvalidConfig(format!("background distribution: {e}")))?;
    let signature = Zipf::new(spec.signature_words as u64, spec.zipf_exponent)
        .map_err(|e| Error::InvalidConfig(format!("signature distribution: {e}")))?;

    let mut records = Vec::with_capacity(spec.docs);
    for doc_index in 0..spec.docs {
        let primary = rng.gen_range(0..spec.topics);
        let mut topics = vec![primary];
        if primary < spec.paired_topics && rng.gen::<f64>() < spec.partner_prob {
            topics.push(primary ^ 1);
        }
        topics.sort_unstable();

        let len = rng.gen_range(spec.doc_len_min..=spec.doc_len_max);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let index = if rng.gen::<f64>() < spec.topic_word_frac {
                let topic = topics[rng.gen_range(0..topics.len())];
                let rank = signature.sample(&mut rng) as usize;
                SIGNATURE_BASE + topic * spec.signature_words + (rank - 1)
            } else {
                background.sample(&mut rng) as usize - 1
            };
            words.push(word_for(index));
        }

        records.push(DocRecord {
            id: format!("doc{doc_index:06}"),
            text: words.join(" "),
            labels: topics.into_iter().map(label_name).collect(),
        });
    }
    Ok(records)
}

/// Generate and write the corpus as JSON lines; returns the document count.
pub fn write_jsonl(spec: &CorpusSpec, path: &Path) -> Result<usize> {
    let records = generate(spec)?;
    let mut out = BufWriter::new(File::create(path)?);
    for record in &records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(records.len())
}
