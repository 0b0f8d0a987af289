//! Wire protocol and HTTP client for the HTM region service.
//!
//! The service speaks JSON. Experiment specs and results are the engine's
//! own serializable types; this crate adds the session-level request and
//! response shapes plus a thin blocking client over reqwest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use htm_core::config::RegionConfig;
pub use htm_core::experiments::{
    AccuracyRow, BenchResult, BenchSpec, ClassifyResult, ClassifySpec, FieldSpec, NoiseSweepSpec,
    SequenceResult, SequenceSpec, TrainSpResult, TrainSpSpec,
};

pub mod types {
    use super::*;

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct Health {
        pub status: String,
        pub version: String,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct ApiError {
        pub error: String,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct SparsityRequest {
        pub num_columns: usize,
        pub winners_per_step: usize,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct SparsityResponse {
        pub percent: f64,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct CapacityRequest {
        pub num_columns: u64,
        pub winners_per_step: u64,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct CapacityResponse {
        /// Exact binomial coefficient as a decimal string.
        pub exact: String,
        /// The same value rounded to f64 for quick display.
        pub approx: f64,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct CreateRegionRequest {
        pub config: RegionConfig,
        #[serde(default)]
        pub field: FieldSpec,
        /// Grid shape for local fields; defaults to a square over input_size.
        #[serde(default)]
        pub grid: Option<(usize, usize)>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct RegionCreated {
        pub id: u64,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct RegionInfo {
        pub id: u64,
        pub config: RegionConfig,
        pub distal_synapses: usize,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct RegionList {
        pub regions: Vec<u64>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct StepRequest {
        /// Packed input bits as lowercase hex (little-endian nibbles).
        pub input_hex: String,
        pub input_len: usize,
        #[serde(default)]
        pub learn_sp: bool,
        #[serde(default)]
        pub learn_tm: bool,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct StepResponse {
        pub winners: Vec<usize>,
        pub overlaps: Vec<u32>,
        pub burst_columns: Vec<usize>,
        pub predicted_columns: Vec<usize>,
        pub active_cells: Vec<usize>,
        pub predictive_cells: Vec<usize>,
        pub learning_cells: Vec<usize>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct LookaheadRequest {
        pub depth: usize,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct LookaheadResponse {
        /// Predicted column ids per depth (depth 1 first).
        pub columns: Vec<Vec<usize>>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct SnapshotRequest {
        pub path: String,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct SnapshotResponse {
        pub bytes: usize,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct LoadRequest {
        pub path: String,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct FieldDump {
        /// One line per column: comma-separated receptive-field addresses.
        pub lines: String,
    }
}

use types::*;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service error ({status}): {message}")]
    Api { status: u16, message: String },
}

pub type ClientResult<T> = Result<T, ClientError>;

/// Blocking HTTP client for one service instance.
pub struct Client {
    base: String,
    http: reqwest::blocking::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base = base_url.into();
        while base.ends_with('/') {
            base.pop();
        }
        Client {
            base,
            http: reqwest::blocking::Client::builder()
                .timeout(None)
                .build()
                .expect("reqwest client"),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn check<T: serde::de::DeserializeOwned>(resp: reqwest::blocking::Response) -> ClientResult<T> {
        let status = resp.status();
        if status.is_success() {
            Ok(resp.json()?)
        } else {
            let message = resp
                .json::<ApiError>()
                .map(|e| e.error)
                .unwrap_or_else(|_| status.to_string());
            Err(ClientError::Api {
                status: status.as_u16(),
                message,
            })
        }
    }

    fn post<B: Serialize, T: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> ClientResult<T> {
        Self::check(self.http.post(format!("{}{path}", self.base)).json(body).send()?)
    }

    fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> ClientResult<T> {
        Self::check(self.http.get(format!("{}{path}", self.base)).send()?)
    }

    pub fn health(&self) -> ClientResult<Health> {
        self.get("/health")
    }

    pub fn default_config(&self) -> ClientResult<RegionConfig> {
        self.get("/config/default")
    }

    pub fn validate_config(&self, config: &RegionConfig) -> ClientResult<RegionConfig> {
        self.post("/config/validate", config)
    }

    pub fn sparsity(&self, req: &SparsityRequest) -> ClientResult<SparsityResponse> {
        self.post("/analysis/sparsity", req)
    }

    pub fn capacity(&self, req: &CapacityRequest) -> ClientResult<CapacityResponse> {
        self.post("/analysis/capacity", req)
    }

    pub fn create_region(&self, req: &CreateRegionRequest) -> ClientResult<RegionCreated> {
        self.post("/regions", req)
    }

    pub fn list_regions(&self) -> ClientResult<RegionList> {
        self.get("/regions")
    }

    pub fn region_info(&self, id: u64) -> ClientResult<RegionInfo> {
        self.get(&format!("/regions/{id}"))
    }

    pub fn region_fields(&self, id: u64) -> ClientResult<FieldDump> {
        self.get(&format!("/regions/{id}/fields"))
    }

    pub fn delete_region(&self, id: u64) -> ClientResult<()> {
        let resp = self
            .http
            .delete(format!("{}/regions/{id}", self.base))
            .send()?;
        let status = resp.status();
        if status.is_success() {
            Ok(())
        } else {
            let message = resp
                .json::<ApiError>()
                .map(|e| e.error)
                .unwrap_or_else(|_| status.to_string());
            Err(ClientError::Api {
                status: status.as_u16(),
                message,
            })
        }
    }

    pub fn step(&self, id: u64, req: &StepRequest) -> ClientResult<StepResponse> {
        self.post(&format!("/regions/{id}/step"), req)
    }

    pub fn lookahead(&self, id: u64, depth: usize) -> ClientResult<LookaheadResponse> {
        self.post(&format!("/regions/{id}/lookahead"), &LookaheadRequest { depth })
    }

    pub fn save_snapshot(&self, id: u64, path: &str) -> ClientResult<SnapshotResponse> {
        self.post(
            &format!("/regions/{id}/snapshot"),
            &SnapshotRequest { path: path.into() },
        )
    }

    pub fn load_snapshot(&self, path: &str) -> ClientResult<RegionCreated> {
        self.post("/regions/load", &LoadRequest { path: path.into() })
    }

    pub fn train_sp(&self, spec: &TrainSpSpec) -> ClientResult<TrainSpResult> {
        self.post("/experiments/train-sp", spec)
    }

    pub fn classify(&self, spec: &ClassifySpec) -> ClientResult<ClassifyResult> {
        self.post("/experiments/classify", spec)
    }

    pub fn noise_sweep(&self, spec: &NoiseSweepSpec) -> ClientResult<ClassifyResult> {
        self.post("/experiments/noise-sweep", spec)
    }

    pub fn sequence(&self, spec: &SequenceSpec) -> ClientResult<SequenceResult> {
        self.post("/experiments/sequence", spec)
    }

    pub fn bench(&self, spec: &BenchSpec) -> ClientResult<BenchResult> {
        self.post("/experiments/bench", spec)
    }
}
