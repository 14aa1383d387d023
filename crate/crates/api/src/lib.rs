//! Request and response bodies of the HTTP interface. The heavyweight
//! payloads (configs, snapshots, reports) are the engine's own serializable
//! types; this crate adds the envelope structs both sides agree on.

use serde::{Deserialize, Serialize};

pub use clasher_core::corpus::CorpusSpec;
pub use clasher_core::engine::{
    CorrelationReport, CorrelationRequest, RunReport, RunRequest, StreamConfig,
};
pub use clasher_core::metrics::Summary;
pub use clasher_core::snapshot::ModelSnapshot;

/// Mount point of all routes.
pub const API_PREFIX: &str = "/v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub config: StreamConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadSessionRequest {
    pub snapshot: ModelSnapshot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session: String,
    pub rounds: u64,
    pub labels: usize,
    pub memory_bytes: u64,
    pub config: StreamConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionList {
    pub sessions: Vec<SessionInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRequest {
    /// Optional caller-side identifier, echoed back.
    #[serde(default)]
    pub id: Option<String>,
    pub text: String,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepResponse {
    #[serde(default)]
    pub id: Option<String>,
    pub round: u64,
    pub predicted: Vec<String>,
    pub trained: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictRequest {
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictResponse {
    pub predicted: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub rounds: u64,
    /// Absent until the session has evaluated at least one document.
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenCorpusRequest {
    pub spec: CorpusSpec,
    /// Server-side path the JSONL corpus is written to.
    pub output: std::path::PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenCorpusResponse {
    pub docs: usize,
    pub output: std::path::PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
