//! HTTP review service over one rationale and its analysis results.

mod session;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use avc_core::analyzers::Evidence;
use avc_core::assurance::{
    extract_checklist, propagate, whatif, AssuranceError, AssuranceStatus, ChecklistItem, MachineResults, StatusReport,
    Verdict,
};
use avc_core::rationale::{to_interchange, Rationale};
use avc_core::subject::SubjectProgram;
use axum::extract::{Path as UrlPath, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tower_http::services::ServeDir;

pub use session::{default_session_path, Session, SessionError, SESSION_FORMAT};

pub const API_HEADER: &str = "x-avc-api";
pub const API_VERSION: &str = "1";
pub const DEFAULT_PORT: u16 = 7341;

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Assurance(#[from] AssuranceError),
    #[error("evidence for {0} was computed for another version of the program; rerun the analysis")]
    StaleEvidence(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
}

/// Status of every claim plus the warnings, as served by `/api/status`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusView {
    pub root: String,
    pub statuses: BTreeMap<String, AssuranceStatus>,
    pub warnings: Vec<String>,
}

impl From<StatusReport> for StatusView {
    fn from(s: StatusReport) -> Self {
        StatusView { root: s.root, statuses: s.statuses, warnings: s.warnings }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JudgmentRequest {
    pub item_id: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlayEntry {
    pub item_id: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub overlay: Vec<OverlayEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub status: StatusView,
    pub delta: Vec<String>,
}

/// One review: the rationale, its machine results and the session log.
pub struct Review {
    rationale: Rationale,
    interchange: Value,
    machine: MachineResults,
    items: Vec<ChecklistItem>,
    session: RwLock<Session>,
}

impl Review {
    /// Opens or creates the session at `session_path`, bound to the hashes
    /// of `rationale_source` and `prog`.
    pub fn open(
        rationale: Rationale,
        rationale_source: &str,
        prog: Option<&SubjectProgram>,
        machine: MachineResults,
        session_path: &Path,
    ) -> Result<Review, ReviewError> {
        if let Some(p) = prog {
            if let Some((id, _)) = machine.evidence.iter().find(|(_, e)| !e.is_current(p)) {
                return Err(ReviewError::StaleEvidence(id.clone()));
            }
        }
        let items = extract_checklist(&rationale, &machine)?;
        let rationale_hash = avc_core::sha256_hex(rationale_source.as_bytes());
        let session = Session::open(session_path, &rationale_hash, prog.map(|p| p.source_hash.as_str()))?;
        Ok(Review { interchange: to_interchange(&rationale), rationale, machine, items, session: RwLock::new(session) })
    }

    pub fn checklist(&self) -> &[ChecklistItem] {
        &self.items
    }

    pub fn evidence(&self, claim: &str) -> Option<&Evidence> {
        self.machine.evidence.get(claim)
    }

    pub fn session_path(&self) -> PathBuf {
        self.session.read().expect("session lock").path().to_path_buf()
    }

    pub fn status(&self) -> StatusView {
        let current = self.session.read().expect("session lock").log().current();
        propagate(&self.rationale, &self.machine, &current).into()
    }

    fn is_item(&self, id: &str) -> bool {
        self.items.iter().any(|i| i.id == id)
    }

    /// Records a verdict and returns the status after it is persisted.
    pub fn judge(&self, req: &JudgmentRequest) -> Result<StatusView, ApiError> {
        if !self.is_item(&req.item_id) {
            return Err(ApiError::unknown_item(&req.item_id));
        }
        let mut session = self.session.write().expect("session lock");
        session.judge(&req.item_id, req.verdict, &req.note).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(propagate(&self.rationale, &self.machine, &session.log().current()).into())
    }

    pub fn whatif(&self, req: &WhatIfRequest) -> Result<WhatIfResponse, ApiError> {
        let overlay: Vec<(String, Verdict)> = req.overlay.iter().map(|o| (o.item_id.clone(), o.verdict)).collect();
        let current = self.session.read().expect("session lock").log().current();
        match whatif(&self.rationale, &self.machine, &current, &overlay) {
            Ok(w) => Ok(WhatIfResponse { status: w.status.into(), delta: w.delta.into_iter().collect() }),
            Err(AssuranceError::UnknownItem(id)) => Err(ApiError::unknown_item(&id)),
            Err(e) => Err(ApiError::internal(e.to_string())),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn unknown_item(id: &str) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, message: format!("{id} is not a checklist item") }
    }

    fn internal(message: String) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type Shared = Arc<Review>;

async fn get_rationale(State(r): State<Shared>) -> Json<Value> {
    Json(r.interchange.clone())
}

async fn get_checklist(State(r): State<Shared>) -> Json<Vec<ChecklistItem>> {
    Json(r.items.clone())
}

async fn get_status(State(r): State<Shared>) -> Json<StatusView> {
    Json(r.status())
}

async fn get_evidence(State(r): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Evidence>, ApiError> {
    match r.evidence(&id) {
        Some(e) => Ok(Json(e.clone())),
        None => Err(ApiError { status: StatusCode::NOT_FOUND, message: format!("no evidence for {id}") }),
    }
}

async fn post_judgment(
    State(r): State<Shared>,
    Json(req): Json<JudgmentRequest>,
) -> Result<Json<StatusView>, ApiError> {
    tokio::task::spawn_blocking(move || r.judge(&req)).await.map_err(|e| ApiError::internal(e.to_string()))?.map(Json)
}

async fn post_whatif(
    State(r): State<Shared>,
    Json(req): Json<WhatIfRequest>,
) -> Result<Json<WhatIfResponse>, ApiError> {
    r.whatif(&req).map(Json)
}

async fn api_version(req: Request, next: Next) -> Response {
    let requested = req.headers().get(API_HEADER).cloned();
    let mut resp = match requested {
        Some(v) if v != API_VERSION => {
            let msg = format!("unsupported API version {:?}; this service speaks {API_VERSION}", v);
            (StatusCode::BAD_REQUEST, Json(json!({ "error": msg }))).into_response()
        }
        _ => next.run(req).await,
    };
    resp.headers_mut().insert(API_HEADER, HeaderValue::from_static(API_VERSION));
    resp
}

/// Routes under `/api`, plus static UI assets from `assets` when given.
pub fn router(review: Arc<Review>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/rationale", get(get_rationale))
        .route("/api/checklist", get(get_checklist))
        .route("/api/status", get(get_status))
        .route("/api/evidence/{claim_id}", get(get_evidence))
        .route("/api/judgments", post(post_judgment))
        .route("/api/whatif", post(post_whatif))
        .layer(middleware::from_fn(api_version))
        .with_state(review);
    match assets {
        Some(dir) if dir.is_dir() => api.fallback_service(ServeDir::new(dir)),
        _ => api,
    }
}

/// A running service. Dropping the handle stops it.
pub struct Handle {
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl Handle {
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }

    /// Runs until the server stops on its own.
    pub async fn wait(self) -> std::io::Result<()> {
        let Handle { stop: _stop, task, .. } = self;
        task.await.map_err(std::io::Error::other)?
    }
}

/// Binds `addr` and starts serving in the background.
pub async fn serve(review: Arc<Review>, addr: SocketAddr, assets: Option<&Path>) -> Result<Handle, ReviewError> {
    let listener = TcpListener::bind(addr).await.map_err(|source| ReviewError::Bind { addr, source })?;
    let local = listener.local_addr().map_err(|source| ReviewError::Bind { addr, source })?;
    let app = router(review, assets);
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(Handle { addr: local, stop: Some(tx), task })
}
