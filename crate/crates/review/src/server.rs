//! HTTP routes. Reads share a lock; verdicts go through one writer task.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot};

use tcsdet_core::io::{read_recording, Recording};

use crate::render::{render_view, SegmentView};
use crate::report::{export, metrics, queue, ExportDoc, MetricsDoc, QueueItem};
use crate::store::{Receipt, ReviewStore, VerdictRequest};
use crate::ReviewError;

type WriteJob = (VerdictRequest, oneshot::Sender<Result<Receipt, ReviewError>>);

/// Where segment requests read signals from.
pub enum RecordingSource {
    Memory(BTreeMap<String, Arc<Recording>>),
    /// Recording directories by id; the most recent one stays loaded.
    Dirs {
        dirs: BTreeMap<String, PathBuf>,
        loaded: Mutex<Option<Arc<Recording>>>,
    },
}

impl RecordingSource {
    pub fn dirs(dirs: BTreeMap<String, PathBuf>) -> Self {
        RecordingSource::Dirs {
            dirs,
            loaded: Mutex::new(None),
        }
    }

    fn get(&self, id: &str) -> Result<Arc<Recording>, ReviewError> {
        match self {
            RecordingSource::Memory(map) => map.get(id).cloned().ok_or_else(|| ReviewError::UnknownRecording(id.into())),
            RecordingSource::Dirs { dirs, loaded } => {
                let dir = dirs.get(id).ok_or_else(|| ReviewError::UnknownRecording(id.into()))?;
                let mut slot = loaded.lock().expect("recording cache poisoned");
                if let Some(rec) = slot.as_ref().filter(|r| r.id() == id) {
                    return Ok(rec.clone());
                }
                let rec = Arc::new(read_recording(dir)?);
                *slot = Some(rec.clone());
                Ok(rec)
            }
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<ReviewStore>>,
    recordings: Arc<RecordingSource>,
    writer: mpsc::Sender<WriteJob>,
}

impl AppState {
    /// Takes ownership of the store and starts its writer task; needs a
    /// running tokio runtime.
    pub fn new(store: ReviewStore, recordings: RecordingSource) -> Self {
        let store = Arc::new(RwLock::new(store));
        let (tx, mut rx) = mpsc::channel::<WriteJob>(64);
        let owned = store.clone();
        tokio::spawn(async move {
            while let Some((req, reply)) = rx.recv().await {
                let result = owned.write().expect("review store poisoned").append(req, Utc::now());
                let _ = reply.send(result);
            }
        });
        Self {
            store,
            recordings: Arc::new(recordings),
            writer: tx,
        }
    }

    pub fn store(&self) -> Arc<RwLock<ReviewStore>> {
        self.store.clone()
    }

    async fn submit(&self, req: VerdictRequest) -> Result<Receipt, ReviewError> {
        let (tx, rx) = oneshot::channel();
        self.writer.send((req, tx)).await.map_err(|_| ReviewError::Closed)?;
        rx.await.map_err(|_| ReviewError::Closed)?
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueueDoc {
    pub detections: Vec<QueueItem>,
    pub pending: usize,
    pub reviewed: usize,
    pub last_seq: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentQuery {
    rec: String,
    start_s: f64,
    end_s: f64,
    px: usize,
}

async fn list_detections(State(s): State<AppState>) -> Json<QueueDoc> {
    let store = s.store.read().expect("review store poisoned");
    let detections = queue(store.set(), store.log());
    let reviewed = store.log().len();
    Json(QueueDoc {
        pending: detections.len() - reviewed,
        reviewed,
        last_seq: store.last_seq(),
        detections,
    })
}

async fn segment(
    State(s): State<AppState>,
    q: Result<Query<SegmentQuery>, QueryRejection>,
) -> Result<Json<SegmentView>, ReviewError> {
    let Query(q) = q.map_err(|e| ReviewError::Malformed(e.body_text()))?;
    let recordings = s.recordings.clone();
    tokio::task::spawn_blocking(move || {
        let rec = recordings.get(&q.rec)?;
        render_view(&rec, q.start_s, q.end_s, q.px)
    })
    .await
    .map_err(|e| ReviewError::Malformed(e.to_string()))?
    .map(Json)
}

async fn review(
    State(s): State<AppState>,
    body: Result<Json<VerdictRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Receipt>), ReviewError> {
    let Json(req) = body.map_err(|e| ReviewError::Malformed(e.body_text()))?;
    let receipt = s.submit(req).await?;
    Ok((StatusCode::CREATED, Json(receipt)))
}

async fn export_doc(State(s): State<AppState>) -> Result<Json<ExportDoc>, ReviewError> {
    let store = s.store.read().expect("review store poisoned");
    export(store.set(), store.log()).map(Json)
}

async fn metrics_doc(State(s): State<AppState>) -> Result<Json<MetricsDoc>, ReviewError> {
    let store = s.store.read().expect("review store poisoned");
    metrics(store.set(), store.log()).map(Json)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/detections", get(list_detections))
        .route("/api/segment", get(segment))
        .route("/api/review", post(review))
        .route("/api/export", get(export_doc))
        .route("/api/metrics", get(metrics_doc))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    state: AppState,
    addr: SocketAddr,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
