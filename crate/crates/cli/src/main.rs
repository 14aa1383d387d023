//! `clasher` — command-line front end of the streaming classifier service.
//!
//! `clasher serve` starts the HTTP service; every other verb is a client
//! of a running service. Path arguments are resolved by the server, so
//! client and server are expected to share a filesystem (the usual
//! single-host setup).

use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use clasher_client::{api, Client};
use clasher_core::corpus::CorpusSpec;
use clasher_core::engine::{
    default_curves, CorrelationRequest, CurvePair, LearnerKind, RunRequest, Scheme,
    SnapshotCadence, StreamConfig,
};
use clasher_core::geometry::GramSide;
use clasher_core::hashing::Normalization;

const DEFAULT_SERVER: &str = "http://127.0.0.1:7878";

#[derive(Parser)]
#[command(
    name = "clasher",
    version,
    about = "Bounded-resource multi-label text stream classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start the HTTP service.
    Serve {
        /// Address to bind; port 0 picks a free port.
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
    },
    /// Prequential test-then-train run over a JSONL stream.
    Run(RunArgs),
    /// Correlation of exact and hashed inner products over a dimension grid.
    Correlate(CorrelateArgs),
    /// Generate a synthetic multi-label corpus.
    GenCorpus(GenCorpusArgs),
    /// Fetch a session's model snapshot to a file.
    DumpModel {
        #[arg(long)]
        server: Option<String>,
        /// Session identifier, as printed by load-model or the service.
        #[arg(long)]
        session: String,
        /// Destination file for the snapshot JSON.
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Create a live session from a model snapshot file.
    LoadModel {
        #[arg(long)]
        server: Option<String>,
        /// Snapshot JSON produced by `run --model-out` or dump-model.
        #[arg(long = "model-in")]
        model_in: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Embedding dimension m.
    #[arg(long, default_value_t = 4096)]
    dim: usize,
    /// Embedding scheme: tf or tfidf.
    #[arg(long, default_value = "tfidf")]
    scheme: String,
    /// Learner: mode1, mode2, perceptron or knn1.
    #[arg(long, default_value = "mode1")]
    learner: String,
    /// Prediction threshold on region label statistics.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Bucket hash seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sign hash seed (must differ from --seed).
    #[arg(long, default_value_t = 2)]
    sign_seed: u64,
    /// Probability that a labelled document is used for training.
    #[arg(long, default_value_t = 1.0)]
    label_prob: f64,
    /// Seed of the per-round labelling coin.
    #[arg(long, default_value_t = 7)]
    label_seed: u64,
    /// Fixed snapshot interval; default is 500 rounds up to 20k, then 5000.
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Post-embedding normalization: none, l2 or l1-by-token-count.
    #[arg(long, default_value = "none")]
    normalize: String,
    /// Mode-2 only: suppress the double update of false-negative labels.
    #[arg(long, default_value_t = false)]
    dedupe: bool,
    /// Stop-word file (one word per line, # comments).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Skip latency measurement so outputs are byte-identical across runs.
    #[arg(long, default_value_t = false)]
    no_timing: bool,
}

impl ConfigArgs {
    fn build(&self) -> Result<StreamConfig> {
        let config = StreamConfig {
            dim: self.dim,
            scheme: self.scheme.parse::<Scheme>()?,
            learner: self.learner.parse::<LearnerKind>()?,
            theta: self.theta,
            index_seed: self.seed,
            sign_seed: self.sign_seed,
            label_prob: self.label_prob,
            label_seed: self.label_seed,
            cadence: match self.snapshot_every {
                Some(every) => SnapshotCadence::Fixed { every },
                None => SnapshotCadence::default(),
            },
            normalization: self.normalize.parse::<Normalization>()?,
            dedupe: self.dedupe,
            timing: !self.no_timing,
            stopwords: self.stopwords.clone(),
            ..StreamConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    server: Option<String>,
    /// Input stream: JSONL with id, text and labels fields.
    #[arg(long = "in")]
    input: PathBuf,
    /// Metrics CSV destination.
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Resume from a model snapshot (its config governs the run).
    #[arg(long = "model-in")]
    model_in: Option<PathBuf>,
    /// Write the final model snapshot here.
    #[arg(long = "model-out")]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    server: Option<String>,
    /// JSONL corpus (fits in memory; this is the batch oracle).
    #[arg(long = "in")]
    input: PathBuf,
    /// Correlation CSV destination.
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Dimension grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![256, 1024, 4096, 16384, 65536])]
    dims: Vec<usize>,
    /// Curves as exact:hashed code pairs (tf, tfidf, htf, htfidf).
    #[arg(long, value_delimiter = ',')]
    curves: Vec<String>,
    /// Hash seeds; the median over seeds traces one curve.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    /// Sampled document pairs per measurement.
    #[arg(long, default_value_t = 200_000)]
    pairs: usize,
    #[arg(long, default_value_t = 99)]
    sample_seed: u64,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long)]
    server: Option<String>,
    /// Destination JSONL path (server-side).
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    docs: usize,
    #[arg(long, default_value_t = 10)]
    topics: usize,
    #[arg(long, default_value_t = 20_000)]
    vocab: usize,
    #[arg(long, default_value_t = 1.1)]
    zipf: f64,
    #[arg(long, default_value_t = 8)]
    paired_topics: usize,
    #[arg(long, default_value_t = 0.75)]
    partner_prob: f64,
    #[arg(long, default_value_t = 0.7)]
    topic_word_frac: f64,
    #[arg(long, default_value_t = 200)]
    signature_words: usize,
    #[arg(long, default_value_t = 30)]
    len_min: usize,
    #[arg(long, default_value_t = 70)]
    len_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_curve(curve: &str) -> Result<CurvePair> {
    let (a, b) = curve
        .split_once(':')
        .with_context(|| format!("curve {curve:?} is not exact:hashed"))?;
    Ok((a.parse::<GramSide>()?, b.parse::<GramSide>()?))
}

fn client_for(server: &Option<String>) -> Client {
    Client::new(server.clone().unwrap_or_else(|| DEFAULT_SERVER.to_string()))
}

async fn run_command(args: RunArgs) -> Result<()> {
    let client = client_for(&args.server);
    let request = RunRequest {
        config: args.config.build()?,
        input: args.input,
        output: args.output.clone(),
        model_in: args.model_in,
        model_out: args.model_out,
    };
    let report = client.run(request).await?;
    if report.skipped > 0 {
        eprintln!("warning: skipped {} malformed input lines", report.skipped);
    }
    match &args.output {
        Some(path) => eprintln!("metrics written to {}", path.display()),
        None => print!("{}", report.csv),
    }
    if let Some(summary) = &report.summary {
        eprintln!(
            "rounds={} labels={} micro_f1={:.4} macro_f1={:.4} accuracy={:.4}",
            report.rounds, report.labels, summary.micro_f1, summary.macro_f1, summary.accuracy
        );
    } else {
        eprintln!("rounds=0 (empty stream)");
    }
    Ok(())
}

async fn correlate_command(args: CorrelateArgs) -> Result<()> {
    let client = client_for(&args.server);
    let curves = if args.curves.is_empty() {
        default_curves()
    } else {
        args.curves
            .iter()
            .map(|c| parse_curve(c))
            .collect::<Result<Vec<_>>>()?
    };
    let request = CorrelationRequest {
        corpus: args.input,
        dims: args.dims,
        curves,
        seeds: args.seeds,
        pairs: args.pairs,
        sample_seed: args.sample_seed,
        stopwords: args.stopwords,
        output: args.output.clone(),
    };
    let report = client.correlate(request).await?;
    match &args.output {
        Some(path) => eprintln!("{} rows written to {}", report.rows, path.display()),
        None => print!("{}", report.csv),
    }
    Ok(())
}

async fn gen_corpus_command(args: GenCorpusArgs) -> Result<()> {
    let client = client_for(&args.server);
    let spec = CorpusSpec {
        docs: args.docs,
        topics: args.topics,
        vocab_size: args.vocab,
        zipf_exponent: args.zipf,
        paired_topics: args.paired_topics,
        partner_prob: args.partner_prob,
        topic_word_frac: args.topic_word_frac,
        signature_words: args.signature_words,
        doc_len_min: args.len_min,
        doc_len_max: args.len_max,
        seed: args.seed,
    };
    spec.validate()?;
    let response = client
        .gen_corpus(api::GenCorpusRequest {
            spec,
            output: args.output,
        })
        .await?;
    eprintln!(
        "{} documents written to {}",
        response.docs,
        response.output.display()
    );
    Ok(())
}

async fn dump_model_command(
    server: Option<String>,
    session: String,
    output: PathBuf,
) -> Result<()> {
    let client = client_for(&server);
    let snapshot = client.model(&session).await?;
    std::fs::write(&output, serde_json::to_string(&snapshot)?)
        .with_context(|| format!("writing {}", output.display()))?;
    eprintln!(
        "model of session {session} ({} rounds, {} labels) written to {}",
        snapshot.rounds,
        snapshot.labels.len(),
        output.display()
    );
    Ok(())
}

async fn load_model_command(server: Option<String>, model_in: PathBuf) -> Result<()> {
    let client = client_for(&server);
    let body = std::fs::read_to_string(&model_in)
        .with_context(|| format!("reading {}", model_in.display()))?;
    let snapshot: api::ModelSnapshot = serde_json::from_str(&body)?;
    let created = client.load_session(snapshot).await?;
    println!("{}", created.session);
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "clasher_service=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Serve { addr } => {
            clasher_service::serve(addr).await?;
            Ok(())
        }
        Command::Run(args) => run_command(args).await,
        Command::Correlate(args) => correlate_command(args).await,
        Command::GenCorpus(args) => gen_corpus_command(args).await,
        Command::DumpModel {
            server,
            session,
            output,
        } => dump_model_command(server, session, output).await,
        Command::LoadModel { server, model_in } => load_model_command(server, model_in).await,
    }
}
