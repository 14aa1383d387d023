//! Async client for the clasher service. One method per endpoint; bodies
//! are the shared wire types re-exported from [`clasher_api`].

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use clasher_api as api;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("service error ({status}): {message}")]
    Service {
        status: reqwest::StatusCode,
        message: String,
    },
}

pub type ClientResult<T> = Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}{path}", self.base, api::API_PREFIX)
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> ClientResult<T> {
        let status = response.status();
        if status.is_success() {
            Ok(response.json().await?)
        } else {
            let message = match response.json::<api::ErrorBody>().await {
                Ok(body) => body.error,
                Err(_) => status.to_string(),
            };
            Err(ClientError::Service { status, message })
        }
    }

    async fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> ClientResult<T> {
        Self::decode(self.http.post(self.url(path)).json(body).send().await?).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> ClientResult<T> {
        Self::decode(self.http.get(self.url(path)).send().await?).await
    }

    pub async fn health(&self) -> ClientResult<api::HealthResponse> {
        self.get("/health").await
    }

    pub async fn create_session(
        &self,
        config: api::StreamConfig,
    ) -> ClientResult<api::SessionCreated> {
        self.post("/sessions", &api::CreateSessionRequest { config })
            .await
    }

    pub async fn load_session(
        &self,
        snapshot: api::ModelSnapshot,
    ) -> ClientResult<api::SessionCreated> {
        self.post("/sessions/load", &api::LoadSessionRequest { snapshot })
            .await
    }

    pub async fn list_sessions(&self) -> ClientResult<api::SessionList> {
        self.get("/sessions").await
    }

    pub async fn session_info(&self, session: &str) -> ClientResult<api::SessionInfo> {
        self.get(&format!("/sessions/{session}")).await
    }

    pub async fn delete_session(&self, session: &str) -> ClientResult<()> {
        let response = self
            .http
            .delete(self.url(&format!("/sessions/{session}")))
            .send()
            .await?;
        let status = response.status();
        if status.is_success() {
            Ok(())
        } else {
            let message = match response.json::<api::ErrorBody>().await {
                Ok(body) => body.error,
                Err(_) => status.to_string(),
            };
            Err(ClientError::Service { status, message })
        }
    }

    pub async fn step(
        &self,
        session: &str,
        request: api::StepRequest,
    ) -> ClientResult<api::StepResponse> {
        self.post(&format!("/sessions/{session}/step"), &request)
            .await
    }

    pub async fn predict(&self, session: &str, text: &str) -> ClientResult<api::PredictResponse> {
        self.post(
            &format!("/sessions/{session}/predict"),
            &api::PredictRequest { text: text.into() },
        )
        .await
    }

    pub async fn metrics(&self, session: &str) -> ClientResult<api::MetricsResponse> {
        self.get(&format!("/sessions/{session}/metrics")).await
    }

    pub async fn model(&self, session: &str) -> ClientResult<api::ModelSnapshot> {
        self.get(&format!("/sessions/{session}/model")).await
    }

    pub async fn run(&self, request: api::RunRequest) -> ClientResult<api::RunReport> {
        self.post("/runs", &request).await
    }

    pub async fn correlate(
        &self,
        request: api::CorrelationRequest,
    ) -> ClientResult<api::CorrelationReport> {
        self.post("/correlate", &request).await
    }

    pub async fn gen_corpus(
        &self,
        request: api::GenCorpusRequest,
    ) -> ClientResult<api::GenCorpusResponse> {
        self.post("/gen-corpus", &request).await
    }
}
