use serde::de::DeserializeOwned;
use serde::Serialize;

use wisar_core::pdm::Pdm;
use wisar_core::protocol::{
    CompareRequest, CompareResponse, DtfRequest, DtfResponse, EnvRequest, EnvResponse, GenerateRequest, PlanRequest,
    PlanResponse, PodRequest, PodResponse,
};

use crate::{ClientError, Result};

#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    http: reqwest::Client,
}

impl HttpClient {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        Self { base, http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        decode(resp).await
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        decode(self.http.get(format!("{}/health", self.base)).send().await?).await
    }

    pub async fn generate_pdm(&self, req: &GenerateRequest) -> Result<Pdm> {
        self.post("/pdm", req).await
    }

    pub async fn plan(&self, req: &PlanRequest) -> Result<PlanResponse> {
        self.post("/plan", req).await
    }

    pub async fn eval_pod(&self, req: &PodRequest) -> Result<PodResponse> {
        self.post("/eval/pod", req).await
    }

    pub async fn eval_dtf(&self, req: &DtfRequest) -> Result<DtfResponse> {
        self.post("/eval/dtf", req).await
    }

    pub async fn compare(&self, req: &CompareRequest) -> Result<CompareResponse> {
        self.post("/compare", req).await
    }

    pub async fn env(&self, session: &str, req: &EnvRequest) -> Result<EnvResponse> {
        self.post(&format!("/env/{session}"), req).await
    }
}

async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
    let status = resp.status();
    let bytes = resp.bytes().await?;
    if !status.is_success() {
        let message = serde_json::from_slice::<serde_json::Value>(&bytes)
            .ok()
            .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
            .unwrap_or_else(|| String::from_utf8_lossy(&bytes).into_owned());
        return Err(ClientError::Status { status: status.as_u16(), message });
    }
    Ok(serde_json::from_slice(&bytes)?)
}
