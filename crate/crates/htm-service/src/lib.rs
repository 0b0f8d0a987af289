//! HTTP/JSON service exposing HTM regions and the experiment harness.
//!
//! Regions are long-lived server-side sessions: create one from a config,
//! stream inputs through it, ask for lookahead predictions, snapshot it to
//! disk and load it back. The heavyweight experiment endpoints run the full
//! pipelines server-side and return structured results.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use htm_client::types::*;
use htm_client::{BenchSpec, ClassifySpec, NoiseSweepSpec, SequenceSpec, TrainSpSpec};
use htm_core::bits::BitVector;
use htm_core::config::{encoding_capacity, sparsity_level, RegionConfig};
use htm_core::error::HtmError;
use htm_core::experiments::{self, FieldSpec};
use htm_core::region::Region;
use htm_core::snapshot;
use htm_core::synapse::FieldMode;

#[derive(Default)]
pub struct AppState {
    regions: Mutex<HashMap<u64, Region>>,
    next_id: AtomicU64,
}

type Shared = Arc<AppState>;

struct ServiceError {
    status: StatusCode,
    message: String,
}

impl ServiceError {
    fn bad_request(message: impl Into<String>) -> Self {
        ServiceError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ServiceError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }
}

impl From<HtmError> for ServiceError {
    fn from(e: HtmError) -> Self {
        let status = match &e {
            HtmError::Config(_) | HtmError::InputLength { .. } | HtmError::Field(_) => {
                StatusCode::BAD_REQUEST
            }
            HtmError::Data(_) | HtmError::Snapshot(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ServiceError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ApiError {
                error: self.message,
            }),
        )
            .into_response()
    }
}

type Handler<T> = Result<Json<T>, ServiceError>;

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn config_default() -> Json<RegionConfig> {
    Json(RegionConfig::default())
}

async fn config_validate(Json(cfg): Json<RegionConfig>) -> Handler<RegionConfig> {
    Ok(Json(cfg.validate()?))
}

async fn analysis_sparsity(Json(req): Json<SparsityRequest>) -> Handler<SparsityResponse> {
    let cfg = RegionConfig {
        num_columns: req.num_columns,
        winners_per_step: req.winners_per_step,
        ..RegionConfig::default()
    }
    .validate()?;
    Ok(Json(SparsityResponse {
        percent: sparsity_level(&cfg),
    }))
}

async fn analysis_capacity(Json(req): Json<CapacityRequest>) -> Handler<CapacityResponse> {
    let exact = encoding_capacity(req.num_columns, req.winners_per_step)?;
    let approx = exact.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    Ok(Json(CapacityResponse {
        exact: exact.to_string(),
        approx,
    }))
}

fn resolve_field(req: &CreateRegionRequest) -> Result<FieldMode, ServiceError> {
    match req.field {
        FieldSpec::Global => Ok(FieldMode::GlobalLfsr),
        FieldSpec::Local { radius } => {
            let (rows, cols) = match req.grid {
                Some(g) => g,
                None => {
                    let side = (req.config.input_size as f64).sqrt().round() as usize;
                    if side * side != req.config.input_size {
                        return Err(ServiceError::bad_request(
                            "local fields need a grid; input_size is not square and no grid given",
                        ));
                    }
                    (side, side)
                }
            };
            Ok(FieldMode::LocalRom { radius, rows, cols })
        }
    }
}

async fn region_create(
    State(state): State<Shared>,
    Json(req): Json<CreateRegionRequest>,
) -> Handler<RegionCreated> {
    let mode = resolve_field(&req)?;
    let region = Region::new(req.config, mode)?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed) + 1;
    state.regions.lock().unwrap().insert(id, region);
    Ok(Json(RegionCreated { id }))
}

async fn region_list(State(state): State<Shared>) -> Json<RegionList> {
    let mut regions: Vec<u64> = state.regions.lock().unwrap().keys().copied().collect();
    regions.sort_unstable();
    Json(RegionList { regions })
}

async fn region_info(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> Handler<RegionInfo> {
    let regions = state.regions.lock().unwrap();
    let region = regions
        .get(&id)
        .ok_or_else(|| ServiceError::not_found(format!("no region {id}")))?;
    Ok(Json(RegionInfo {
        id,
        config: region.config.clone(),
        distal_synapses: region.tm.synapse_count(),
    }))
}

async fn region_fields(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> Handler<FieldDump> {
    let regions = state.regions.lock().unwrap();
    let region = regions
        .get(&id)
        .ok_or_else(|| ServiceError::not_found(format!("no region {id}")))?;
    Ok(Json(FieldDump {
        lines: region.dump_fields(),
    }))
}

async fn region_delete(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> Result<StatusCode, ServiceError> {
    if state.regions.lock().unwrap().remove(&id).is_some() {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ServiceError::not_found(format!("no region {id}")))
    }
}

async fn region_step(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<StepRequest>,
) -> Handler<StepResponse> {
    let input = BitVector::from_hex(req.input_len, &req.input_hex)
        .ok_or_else(|| ServiceError::bad_request("input_hex does not decode to input_len bits"))?;
    let mut regions = state.regions.lock().unwrap();
    let region = regions
        .get_mut(&id)
        .ok_or_else(|| ServiceError::not_found(format!("no region {id}")))?;
    let report = region.step(&input, req.learn_sp, req.learn_tm)?;
    Ok(Json(StepResponse {
        winners: report.sp.winners.clone(),
        overlaps: report.sp.overlaps.clone(),
        burst_columns: report.tm.burst_columns.ones().collect(),
        predicted_columns: report.tm.predicted_columns.ones().collect(),
        active_cells: report.tm.active.ones().collect(),
        predictive_cells: report.tm.predictive.ones().collect(),
        learning_cells: report.tm.learning.ones().collect(),
    }))
}

async fn region_lookahead(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<LookaheadRequest>,
) -> Handler<LookaheadResponse> {
    if req.depth == 0 {
        return Err(ServiceError::bad_request("depth must be >= 1"));
    }
    let regions = state.regions.lock().unwrap();
    let region = regions
        .get(&id)
        .ok_or_else(|| ServiceError::not_found(format!("no region {id}")))?;
    let columns = region
        .lookahead(req.depth)
        .iter()
        .map(|v| v.ones().collect())
        .collect();
    Ok(Json(LookaheadResponse { columns }))
}

async fn region_snapshot(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<SnapshotRequest>,
) -> Handler<SnapshotResponse> {
    let regions = state.regions.lock().unwrap();
    let region = regions
        .get(&id)
        .ok_or_else(|| ServiceError::not_found(format!("no region {id}")))?;
    let bytes = snapshot::save_region(region, std::path::Path::new(&req.path))?;
    Ok(Json(SnapshotResponse { bytes }))
}

async fn region_load(
    State(state): State<Shared>,
    Json(req): Json<LoadRequest>,
) -> Handler<RegionCreated> {
    let region = snapshot::load_region(std::path::Path::new(&req.path))?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed) + 1;
    state.regions.lock().unwrap().insert(id, region);
    Ok(Json(RegionCreated { id }))
}

/// Run a CPU-bound experiment off the async executor.
async fn run_experiment<S, T, F>(spec: S, f: F) -> Handler<T>
where
    S: Send + 'static,
    T: Send + 'static,
    F: FnOnce(&S) -> htm_core::error::Result<T> + Send + 'static,
{
    let result = tokio::task::spawn_blocking(move || f(&spec))
        .await
        .map_err(|e| ServiceError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("experiment task failed: {e}"),
        })?;
    Ok(Json(result?))
}

async fn exp_train_sp(Json(spec): Json<TrainSpSpec>) -> Handler<htm_client::TrainSpResult> {
    run_experiment(spec, experiments::train_sp).await
}

async fn exp_classify(Json(spec): Json<ClassifySpec>) -> Handler<htm_client::ClassifyResult> {
    run_experiment(spec, experiments::classify).await
}

async fn exp_noise(Json(spec): Json<NoiseSweepSpec>) -> Handler<htm_client::ClassifyResult> {
    run_experiment(spec, experiments::noise_sweep).await
}

async fn exp_sequence(Json(spec): Json<SequenceSpec>) -> Handler<htm_client::SequenceResult> {
    run_experiment(spec, experiments::sequence).await
}

async fn exp_bench(Json(spec): Json<BenchSpec>) -> Handler<htm_client::BenchResult> {
    run_experiment(spec, experiments::bench).await
}

/// The service router with a fresh state.
pub fn app() -> Router {
    app_with_state(Arc::new(AppState::default()))
}

pub fn app_with_state(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/config/default", get(config_default))
        .route("/config/validate", post(config_validate))
        .route("/analysis/sparsity", post(analysis_sparsity))
        .route("/analysis/capacity", post(analysis_capacity))
        .route("/regions", post(region_create).get(region_list))
        .route(
            "/regions/:id",
            get(region_info).delete(region_delete),
        )
        .route("/regions/:id/fields", get(region_fields))
        .route("/regions/:id/step", post(region_step))
        .route("/regions/:id/lookahead", post(region_lookahead))
        .route("/regions/:id/snapshot", post(region_snapshot))
        .route("/regions/load", post(region_load))
        .route("/experiments/train-sp", post(exp_train_sp))
        .route("/experiments/classify", post(exp_classify))
        .route("/experiments/noise-sweep", post(exp_noise))
        .route("/experiments/sequence", post(exp_sequence))
        .route("/experiments/bench", post(exp_bench))
        .with_state(state)
}

/// Serve on an already-bound tokio listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, app()).await
}

/// Spawn the service on a background thread with its own runtime; returns
/// the bound address. Used by the CLI's embedded mode and by tests.
pub fn spawn_background(addr: &str) -> std::io::Result<(SocketAddr, std::thread::JoinHandle<()>)> {
    let listener = std::net::TcpListener::bind(addr)?;
    let bound = listener.local_addr()?;
    listener.set_nonblocking(true)?;
    let handle = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .expect("tokio runtime");
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).expect("tokio listener");
            if let Err(e) = serve(listener).await {
                tracing::error!("service stopped: {e}");
            }
        });
    });
    Ok((bound, handle))
}
