//! The prequential (test-then-train) engine and experiment drivers.
//!
//! Each document is read exactly once: tokenize, embed, predict, record
//! metrics, and then — only when labels are present and the labelling coin
//! comes up — learn. The engine owns all mutable state (sketch, learner,
//! label dictionary, counters) and is strictly sequential per stream.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{Knn1Store, PerceptronBr};
use crate::error::{Error, Result};
use crate::geometry::{gram_correlation, GramParams, GramSide};
use crate::hashing::{
    apply_normalization, companion_sign_seed, embed_tf, seeded_hash, HashConfig, HashedVector,
    Normalization,
};
use crate::metrics::{LabelCounters, Summary};
use crate::model::{ClasherModel, LabelId, LabelSet, LearningMode};
use crate::sketch::{embed_tfidf, IdfSketch};
use crate::snapshot::{LearnerState, ModelSnapshot, SketchState, MODEL_FORMAT, MODEL_VERSION};
use crate::text::{load_stopwords, tokenize, TokenSeq, TokenizerConfig};

/// Input record: one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// Which embedding the stream uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Tf,
    Tfidf,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tf" => Ok(Self::Tf),
            "tfidf" => Ok(Self::Tfidf),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?} (expected tf or tfidf)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Tf => "tf",
            Self::Tfidf => "tfidf",
        })
    }
}

/// Which model consumes the embedded stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Mode1,
    Mode2,
    Perceptron,
    Knn1,
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode1" => Ok(Self::Mode1),
            "mode2" => Ok(Self::Mode2),
            "perceptron" => Ok(Self::Perceptron),
            "knn1" => Ok(Self::Knn1),
            other => Err(Error::InvalidConfig(format!(
                "unknown learner {other:?} (expected mode1, mode2, perceptron or knn1)"
            ))),
        }
    }
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mode1 => "mode1",
            Self::Mode2 => "mode2",
            Self::Perceptron => "perceptron",
            Self::Knn1 => "knn1",
        })
    }
}

/// When metric rows are emitted. The default is denser early on, where
/// cumulative scores move fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotCadence {
    Fixed { every: u64 },
    TwoPhase { early: u64, cutover: u64, late: u64 },
}

impl Default for SnapshotCadence {
    fn default() -> Self {
        Self::TwoPhase {
            early: 500,
            cutover: 20_000,
            late: 5_000,
        }
    }
}

impl SnapshotCadence {
    pub fn due(&self, round: u64) -> bool {
        match *self {
            Self::Fixed { every } => round.is_multiple_of(every),
            Self::TwoPhase {
                early,
                cutover,
                late,
            } => {
                if round <= cutover {
                    round.is_multiple_of(early)
                } else {
                    round.is_multiple_of(late)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Fixed { every } => every >= 1,
            Self::TwoPhase { early, late, .. } => early >= 1 && late >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "snapshot cadence intervals must be at least 1".into(),
            ))
        }
    }
}

/// Immutable per-run settings, captured verbatim in every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamConfig {
    pub dim: usize,
    pub scheme: Scheme,
    pub learner: LearnerKind,
    pub theta: f64,
    pub index_seed: u64,
    pub sign_seed: u64,
    /// Probability that a labelled document is used for training after it
    /// has been tested.
    pub label_prob: f64,
    pub label_seed: u64,
    pub cadence: SnapshotCadence,
    pub normalization: Normalization,
    /// Mode-2 only: suppress the double update of false-negative labels.
    pub dedupe: bool,
    /// Count-min rows for the IDF sketch.
    pub sketch_rows: usize,
    /// Measure per-document latency. Disable for byte-identical outputs
    /// across runs; the latency columns then read zero.
    pub timing: bool,
    pub stopwords: Option<PathBuf>,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            dim: 4096,
            scheme: Scheme::Tfidf,
            learner: LearnerKind::Mode1,
            theta: 0.5,
            index_seed: 1,
            sign_seed: 2,
            label_prob: 1.0,
            label_seed: 7,
            cadence: SnapshotCadence::default(),
            normalization: Normalization::None,
            dedupe: false,
            sketch_rows: 1,
            timing: true,
            stopwords: None,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        if self.index_seed == self.sign_seed {
            return Err(Error::InvalidConfig(
                "index seed and sign seed must differ".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig("theta must be in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.label_prob) {
            return Err(Error::InvalidConfig("label-prob must be in [0, 1]".into()));
        }
        if self.sketch_rows == 0 {
            return Err(Error::InvalidConfig("sketch needs at least one row".into()));
        }
        self.cadence.validate()
    }

    pub fn hash_config(&self) -> Result<HashConfig> {
        HashConfig::new(self.dim, self.index_seed, self.sign_seed)
    }
}

/// Dense label identifiers in order of first appearance in the stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelDict {
    names: Vec<String>,
    index: HashMap<String, LabelId>,
}

impl LabelDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), LabelId(i as u32)))
            .collect();
        Self { names, index }
    }

    pub fn intern(&mut self, name: &str) -> LabelId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = LabelId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: LabelId) -> Option<&str> {
        self.names.get(id.index()).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// The model behind the prequential loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Clasher(ClasherModel),
    Perceptron(PerceptronBr),
    Knn(Knn1Store),
}

impl Learner {
    fn ensure_labels(&mut self, labels: usize) {
        match self {
            Self::Clasher(model) => model.ensure_labels(labels),
            Self::Perceptron(model) => model.ensure_labels(labels),
            Self::Knn(_) => {}
        }
    }

    fn predict(&self, v: &HashedVector) -> Result<LabelSet> {
        match self {
            Self::Clasher(model) => model.predict(v),
            Self::Perceptron(model) => Ok(model.predict(v)),
            Self::Knn(store) => Ok(store.predict(v)),
        }
    }

    fn learn(&mut self, v: &HashedVector, predicted: &LabelSet, truth: &LabelSet) {
        match self {
            Self::Clasher(model) => model.learn(v, predicted, truth),
            Self::Perceptron(model) => model.update(v, predicted, truth),
            Self::Knn(store) => store.insert(v.clone(), truth.clone()),
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        match self {
            Self::Clasher(model) => model.memory_bytes(),
            Self::Perceptron(model) => model.memory_bytes(),
            Self::Knn(store) => store.memory_bytes(),
        }
    }

    pub fn as_clasher(&self) -> Option<&ClasherModel> {
        match self {
            Self::Clasher(model) => Some(model),
            _ => None,
        }
    }

    pub fn as_knn(&self) -> Option<&Knn1Store> {
        match self {
            Self::Knn(store) => Some(store),
            _ => None,
        }
    }
}

/// Per-round Bernoulli coin for the partial-labelling protocol, keyed by
/// the round index so that a restored engine resumes the same coin
/// sequence.
fn train_coin(label_seed: u64, round: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    if p <= 0.0 {
        return false;
    }
    let h = seeded_hash(&round.to_le_bytes(), label_seed);
    let unit = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    unit < p
}

/// Outcome of one prequential round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResult {
    pub round: u64,
    pub predicted: Vec<String>,
    pub trained: bool,
}

/// All mutable state of one stream: embedding, sketch, learner, labels and
/// counters. Single writer; clone for a read-only snapshot between rounds.
#[derive(Debug, Clone)]
pub struct StreamEngine {
    config: StreamConfig,
    tokenizer: TokenizerConfig,
    hash: HashConfig,
    sketch: Option<IdfSketch>,
    learner: Learner,
    labels: LabelDict,
    metrics: LabelCounters,
    rounds: u64,
}

impl StreamEngine {
    /// Build a fresh engine, loading the stop-word file if one is
    /// configured.
    pub fn new(config: StreamConfig) -> Result<Self> {
        let stopwords = match &config.stopwords {
            Some(path) => load_stopwords(path)?,
            None => Default::default(),
        };
        Self::with_stopwords(config, stopwords)
    }

    /// Build a fresh engine with an explicit stop-word set.
    pub fn with_stopwords(
        config: StreamConfig,
        stopwords: std::collections::HashSet<String>,
    ) -> Result<Self> {
        config.validate()?;
        let hash = config.hash_config()?;
        let sketch = match config.scheme {
            Scheme::Tf => None,
            Scheme::Tfidf => Some(IdfSketch::new(&hash, config.sketch_rows)?),
        };
        let learner = match config.learner {
            LearnerKind::Mode1 => Learner::Clasher(
                ClasherModel::new(config.dim, config.theta, LearningMode::Mode1)
                    .with_dedupe(config.dedupe),
            ),
            LearnerKind::Mode2 => Learner::Clasher(
                ClasherModel::new(config.dim, config.theta, LearningMode::Mode2)
                    .with_dedupe(config.dedupe),
            ),
            LearnerKind::Perceptron => Learner::Perceptron(PerceptronBr::new(config.dim)),
            LearnerKind::Knn1 => Learner::Knn(Knn1Store::new()),
        };
        Ok(Self {
            tokenizer: TokenizerConfig::with_stopwords(stopwords),
            hash,
            sketch,
            learner,
            labels: LabelDict::new(),
            metrics: LabelCounters::new(),
            rounds: 0,
            config,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn labels(&self) -> &LabelDict {
        &self.labels
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn sketch(&self) -> Option<&IdfSketch> {
        self.sketch.as_ref()
    }

    pub fn metrics(&self) -> &LabelCounters {
        &self.metrics
    }

    pub fn summary(&self) -> Result<Summary> {
        self.metrics.summarize()
    }

    /// Deterministic size estimate of the mutable model state.
    pub fn memory_bytes(&self) -> u64 {
        self.learner.memory_bytes() + self.sketch.as_ref().map_or(0, IdfSketch::memory_bytes)
    }

    fn embed(&mut self, tokens: &TokenSeq) -> HashedVector {
        let mut v = match self.config.scheme {
            Scheme::Tf => embed_tf(tokens, &self.hash),
            Scheme::Tfidf => embed_tfidf(
                tokens,
                self.sketch.as_mut().expect("tfidf engine has a sketch"),
                &self.hash,
            ),
        };
        apply_normalization(&mut v, self.config.normalization, tokens.len());
        v
    }

    /// One prequential round: embed (absorbing into the sketch under the
    /// tfidf scheme), predict with the pre-update model, record metrics,
    /// then train when labels are present and the per-round coin allows.
    pub fn step(&mut self, text: &str, label_names: &[String]) -> Result<StepResult> {
        let round = self.rounds + 1;
        let tokens = tokenize(text, &self.tokenizer);
        let v = self.embed(&tokens);
        let predicted = self.learner.predict(&v)?;

        let truth: LabelSet = label_names
            .iter()
            .map(|name| self.labels.intern(name))
            .collect();
        self.learner.ensure_labels(self.labels.len());
        self.metrics.ensure_labels(self.labels.len());
        self.metrics.record(&predicted, &truth);

        let trained =
            !truth.is_empty() && train_coin(self.config.label_seed, round, self.config.label_prob);
        if trained {
            self.learner.learn(&v, &predicted, &truth);
        }
        self.rounds = round;

        Ok(StepResult {
            round,
            predicted: self.label_names(&predicted),
            trained,
        })
    }

    /// Classify without touching any state: the sketch does not absorb the
    /// document and nothing trains. Under the tfidf scheme, buckets the
    /// sketch has never seen carry no weight.
    pub fn predict_only(&self, text: &str) -> Result<Vec<String>> {
        let tokens = tokenize(text, &self.tokenizer);
        let mut v = embed_tf(&tokens, &self.hash);
        if self.config.scheme == Scheme::Tfidf {
            let sketch = self.sketch.as_ref().expect("tfidf engine has a sketch");
            let docs = sketch.docs();
            for (bucket, component) in v.components_mut().iter_mut().enumerate() {
                if *component == 0.0 {
                    continue;
                }
                let count = sketch.sketch().row0_count(bucket);
                if docs == 0 || count == 0 {
                    *component = 0.0;
                } else {
                    *component *= (docs as f64 / count as f64).ln();
                }
            }
        }
        apply_normalization(&mut v, self.config.normalization, tokens.len());
        let predicted = self.learner.predict(&v)?;
        Ok(self.label_names(&predicted))
    }

    fn label_names(&self, set: &LabelSet) -> Vec<String> {
        set.iter()
            .filter_map(|id| self.labels.name(id).map(str::to_string))
            .collect()
    }

    /// Serialize the full model state.
    pub fn snapshot(&self) -> ModelSnapshot {
        let mut stopwords: Vec<String> = self.tokenizer.stopwords().iter().cloned().collect();
        stopwords.sort();
        ModelSnapshot {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config: self.config.clone(),
            stopwords,
            labels: self.labels.names().to_vec(),
            rounds: self.rounds,
            sketch: self.sketch.as_ref().map(|s| SketchState {
                docs: s.docs(),
                counters: s.sketch().counters().to_vec(),
            }),
            learner: LearnerState::from_learner(&self.learner),
        }
    }

    /// Rebuild an engine from a snapshot; subsequent predictions are
    /// bit-identical to the engine that produced it. Metric counters start
    /// fresh — they are evaluation state, not model state.
    pub fn from_snapshot(snapshot: ModelSnapshot) -> Result<Self> {
        if snapshot.format != MODEL_FORMAT || snapshot.version != MODEL_VERSION {
            return Err(Error::SnapshotFormat {
                format: snapshot.format,
                version: snapshot.version,
            });
        }
        let mut engine =
            Self::with_stopwords(snapshot.config, snapshot.stopwords.into_iter().collect())?;
        engine.labels = LabelDict::from_names(snapshot.labels);
        engine.learner = snapshot.learner.into_learner(&engine.config)?;
        engine.learner.ensure_labels(engine.labels.len());
        engine.metrics.ensure_labels(engine.labels.len());
        if let Some(state) = snapshot.sketch {
            if engine.config.scheme != Scheme::Tfidf {
                return Err(Error::InvalidConfig(
                    "snapshot carries a sketch but the scheme is tf".into(),
                ));
            }
            engine.sketch = Some(IdfSketch::restore(
                &engine.hash,
                state.counters,
                state.docs,
            )?);
        } else if engine.config.scheme == Scheme::Tfidf {
            return Err(Error::InvalidConfig(
                "tfidf snapshot is missing its sketch state".into(),
            ));
        }
        engine.rounds = snapshot.rounds;
        Ok(engine)
    }
}

/// A full prequential run over a JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub config: StreamConfig,
    pub input: PathBuf,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub model_in: Option<PathBuf>,
    #[serde(default)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rounds: u64,
    /// Malformed input lines skipped with a counted warning.
    pub skipped: u64,
    pub labels: usize,
    pub snapshot_rows: usize,
    pub summary: Option<Summary>,
    /// The metrics CSV, also written to the output path when one is given.
    pub csv: String,
}

pub const RUN_CSV_FORMAT: &str = "clasher-run-csv v1";
pub const RUN_CSV_COLUMNS: &str = "round,micro_p,micro_r,micro_f1,macro_p,macro_r,macro_f1,accuracy,lat_median_us,lat_mean_us,model_bytes";

fn median(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

fn push_csv_row(csv: &mut String, engine: &StreamEngine, window: &mut Vec<f64>) -> Result<()> {
    use std::fmt::Write;
    let s = engine.summary()?;
    window.sort_by(|a, b| a.partial_cmp(b).expect("latencies are finite"));
    let med = median(window);
    let mean = if window.is_empty() {
        0.0
    } else {
        window.iter().sum::<f64>() / window.len() as f64
    };
    writeln!(
        csv,
        "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3},{}",
        engine.rounds(),
        s.micro_p,
        s.micro_r,
        s.micro_f1,
        s.macro_p,
        s.macro_r,
        s.macro_f1,
        s.accuracy,
        med,
        mean,
        engine.memory_bytes()
    )
    .expect("writing to a string cannot fail");
    window.clear();
    Ok(())
}

/// Drive the prequential loop over a JSONL stream, emitting one CSV row per
/// cadence tick and a final row at stream end. Malformed lines are skipped
/// and counted; only I/O errors abort the run.
pub fn run_prequential(request: &RunRequest) -> Result<RunReport> {
    let mut engine = match &request.model_in {
        Some(path) => {
            let snapshot: ModelSnapshot = serde_json::from_reader(File::open(path)?)?;
            StreamEngine::from_snapshot(snapshot)?
        }
        None => StreamEngine::new(request.config.clone())?,
    };

    let header = serde_json::json!({
        "config": engine.config(),
        "input": request.input,
    });
    let mut csv = format!(
        "# {RUN_CSV_FORMAT}\n# {}\n{RUN_CSV_COLUMNS}\n",
        serde_json::to_string(&header)?
    );

    let reader = BufReader::new(File::open(&request.input)?);
    let mut skipped = 0u64;
    let mut snapshot_rows = 0usize;
    let mut window: Vec<f64> = Vec::new();
    let timing = engine.config().timing;
    let cadence = engine.config().cadence;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocRecord = match serde_json::from_str(&line) {
            Ok(record) => record,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let start = timing.then(Instant::now);
        let result = engine.step(&record.text, &record.labels)?;
        if let Some(start) = start {
            window.push(start.elapsed().as_secs_f64() * 1e6);
        }
        if cadence.due(result.round) {
            push_csv_row(&mut csv, &engine, &mut window)?;
            snapshot_rows += 1;
        }
    }
    if engine.rounds() > 0 && !cadence.due(engine.rounds()) {
        push_csv_row(&mut csv, &engine, &mut window)?;
        snapshot_rows += 1;
    }

    if let Some(path) = &request.output {
        std::fs::write(path, &csv)?;
    }
    if let Some(path) = &request.model_out {
        std::fs::write(path, serde_json::to_string(&engine.snapshot())?)?;
    }

    Ok(RunReport {
        rounds: engine.rounds(),
        skipped,
        labels: engine.labels().len(),
        snapshot_rows,
        summary: if engine.rounds() > 0 {
            Some(engine.summary()?)
        } else {
            None
        },
        csv,
    })
}

/// One correlation curve: an exact-side representation paired with the
/// representation it is compared against.
pub type CurvePair = (GramSide, GramSide);

/// The standard three curves: hashed TF against exact TF, hashed TF against
/// exact TF-IDF, and the online-IDF-corrected embedding against exact
/// TF-IDF.
pub fn default_curves() -> Vec<CurvePair> {
    vec![
        (GramSide::ExactTf, GramSide::HashedTf),
        (GramSide::ExactTfidf, GramSide::HashedTf),
        (GramSide::ExactTfidf, GramSide::HashedTfidf),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRequest {
    pub corpus: PathBuf,
    pub dims: Vec<usize>,
    pub curves: Vec<CurvePair>,
    pub seeds: Vec<u64>,
    pub pairs: usize,
    pub sample_seed: u64,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rows: usize,
    pub csv: String,
}

pub const CORRELATION_CSV_FORMAT: &str = "clasher-correlation-csv v1";

/// Load a JSONL corpus into token sequences using the given tokenizer.
pub fn load_corpus(path: &Path, tokenizer: &TokenizerConfig) -> Result<Vec<TokenSeq>> {
    let reader = BufReader::new(File::open(path)?);
    let mut corpus = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocRecord = serde_json::from_str(&line)?;
        corpus.push(tokenize(&record.text, tokenizer));
    }
    Ok(corpus)
}

/// Evaluate every (dim, curve, seed) cell of the grid on a frozen corpus;
/// one CSV row per cell. The pair sample is fixed across the grid so the
/// rows are comparable.
pub fn run_correlation(request: &CorrelationRequest) -> Result<CorrelationReport> {
    if request.dims.is_empty() || request.curves.is_empty() || request.seeds.is_empty() {
        return Err(Error::InvalidConfig(
            "correlation grid needs dims, curves and seeds".into(),
        ));
    }
    let stopwords = match &request.stopwords {
        Some(path) => load_stopwords(path)?,
        None => Default::default(),
    };
    let tokenizer = TokenizerConfig::with_stopwords(stopwords);
    let corpus = load_corpus(&request.corpus, &tokenizer)?;

    let header = serde_json::json!({
        "corpus": request.corpus,
        "dims": request.dims,
        "curves": request.curves,
        "seeds": request.seeds,
        "pairs": request.pairs,
        "sample_seed": request.sample_seed,
    });
    let mut csv = format!(
        "# {CORRELATION_CSV_FORMAT}\n# {}\nm,exact_scheme,hashed_scheme,rho,seed\n",
        serde_json::to_string(&header)?
    );
    let mut rows = 0usize;
    for &dim in &request.dims {
        for &(side_a, side_b) in &request.curves {
            for &seed in &request.seeds {
                let params = GramParams {
                    dim,
                    pairs: request.pairs,
                    sample_seed: request.sample_seed,
                    index_seed: seed,
                    sign_seed: companion_sign_seed(seed),
                };
                let rho = gram_correlation(&corpus, side_a, side_b, &params)?;
                use std::fmt::Write;
                writeln!(
                    csv,
                    "{dim},{},{},{rho:.6},{seed}",
                    side_a.code(),
                    side_b.code()
                )
                .expect("writing to a string cannot fail");
                rows += 1;
            }
        }
    }

    if let Some(path) = &request.output {
        std::fs::write(path, &csv)?;
    }
    Ok(CorrelationReport { rows, csv })
}
