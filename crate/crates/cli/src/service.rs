//! HTTP/WebSocket session service.
//!
//! A session owns one loaded mesh with its metric and LoD. Frames are
//! rendered on the blocking pool; the WebSocket stream coalesces requests
//! so that only the newest pending one is rendered.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{DefaultBodyLimit, Path as UrlPath, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use hexlens_core::mesh::{load_mesh_str, MeshError, MeshFormat};
use hexlens_core::quality::{Metric, MetricError, VertexAggregation};
use hexlens_core::render::{
    pick_object_lens, render, ControlPoint, LensState, RenderError, RenderParams, RenderStats,
    Scene, TransferFunction,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::task::JoinHandle;

use crate::report::{quality_summary, LodLines, LodSummary, MeshSummary};

/// Size of the header preceding each PNG in a binary WebSocket frame:
/// frame id then payload length, both little-endian `u64`.
pub const FRAME_HEADER_LEN: usize = 16;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Directory sessions may load meshes from by relative path.
    pub data_dir: Option<PathBuf>,
    /// Request body cap in bytes.
    pub max_upload: usize,
    /// Render threads per frame; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            max_upload: 512 << 20,
            threads: None,
        }
    }
}

struct Session {
    scene: Scene,
    /// Session defaults; requests override them field by field.
    params: Mutex<RenderParams>,
    /// Serializes renders of one session to bound memory.
    render_lock: Mutex<()>,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
    next_id: Arc<AtomicU64>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> AppState {
        AppState {
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            config: Arc::new(config),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id:?}")))
    }
}

/// JSON error body: `{"error": "...", "required_capacity": n}`; the
/// capacity is only present for 507 responses.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    required_capacity: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            message: message.into(),
            required_capacity: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn body(&self) -> Value {
        let mut v = json!({ "error": self.message });
        if let Some(n) = self.required_capacity {
            v["required_capacity"] = json!(n);
        }
        v
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::CapacityExceeded { required, .. } => ApiError {
                status: StatusCode::INSUFFICIENT_STORAGE,
                message: e.to_string(),
                required_capacity: Some(required),
            },
            RenderError::InvalidParam(_) => ApiError::bad_request(e.to_string()),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

impl From<MeshError> for ApiError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io(ref io) if io.kind() == std::io::ErrorKind::NotFound => {
                ApiError::new(StatusCode::NOT_FOUND, e.to_string())
            }
            _ => ApiError::bad_request(e.to_string()),
        }
    }
}

impl From<MetricError> for ApiError {
    fn from(e: MetricError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request: {e}")))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_upload;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/lod", get(get_lod))
        .route("/sessions/{id}/render", post(render_frame))
        .route("/sessions/{id}/pick", post(pick))
        .route("/sessions/{id}/transfer-function", put(put_transfer_function))
        .route("/sessions/{id}/stream", get(stream))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

pub async fn serve(addr: std::net::SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(AppState::new(config))).await
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum UploadFormat {
    Medit,
    Vtk,
}

/// `POST /sessions` body: either inline `mesh` text with its `format`, or
/// a `path` relative to the service data directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    mesh: Option<String>,
    format: Option<UploadFormat>,
    path: Option<PathBuf>,
    #[serde(default)]
    metric: Option<String>,
    #[serde(default)]
    aggregation: VertexAggregation,
}

#[derive(Serialize)]
struct SessionInfo {
    id: String,
    mesh: MeshSummary,
    lod: LodSummary,
    metric: hexlens_core::quality::Summary,
    degenerate_cells: usize,
    params: RenderParams,
}

fn resolve_data_path(data_dir: Option<&Path>, rel: &Path) -> Result<PathBuf, ApiError> {
    let dir = data_dir.ok_or_else(|| {
        ApiError::new(StatusCode::FORBIDDEN, "loading by path is disabled (no data directory)")
    })?;
    let root = dir
        .canonicalize()
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let full = root
        .join(rel)
        .canonicalize()
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, format!("{} not found", rel.display())))?;
    if !full.starts_with(&root) {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "path escapes the data directory",
        ));
    }
    Ok(full)
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_json(&body)?;
    let metric: Metric = req
        .metric
        .as_deref()
        .unwrap_or("scaled-jacobian")
        .parse()
        .map_err(ApiError::bad_request)?;
    let data_dir = state.config.data_dir.clone();
    let (scene, info) = blocking(move || {
        let mesh = match (req.mesh, req.path) {
            (Some(text), None) => {
                let format = match req.format {
                    Some(UploadFormat::Medit) => MeshFormat::Medit,
                    Some(UploadFormat::Vtk) => MeshFormat::VtkLegacy,
                    None => return Err(ApiError::bad_request("inline meshes need a format")),
                };
                load_mesh_str(&text, format)?
            }
            (None, Some(rel)) => {
                let full = resolve_data_path(data_dir.as_deref(), &rel)?;
                hexlens_core::mesh::load_mesh_path(&full)?
            }
            _ => return Err(ApiError::bad_request("give exactly one of mesh or path")),
        };
        Ok(Scene::build_with_info(mesh, &metric, req.aggregation)?)
    })
    .await?;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let params = RenderParams::default();
    let response = SessionInfo {
        id: id.clone(),
        mesh: MeshSummary::of(scene.mesh()),
        lod: LodSummary::of(scene.lod(), scene.sheet_count()),
        metric: quality_summary(&info.raw_metric.name, &info.raw_metric.per_cell),
        degenerate_cells: info.degenerate_cells,
        params: params.clone(),
    };
    let session = Session {
        scene,
        params: Mutex::new(params),
        render_lock: Mutex::new(()),
    };
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id, Arc::new(session));
    tracing::info!(id = %response.id, cells = response.mesh.cells, "session created");
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

async fn get_session(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Value>, ApiError> {
    let s = state.session(&id)?;
    let params = s.params.lock().expect("params lock").clone();
    Ok(Json(json!({
        "id": id,
        "mesh": MeshSummary::of(s.scene.mesh()),
        "lod": LodSummary::of(s.scene.lod(), s.scene.sheet_count()),
        "params": params,
    })))
}

async fn delete_session(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<StatusCode, ApiError> {
    state
        .sessions
        .write()
        .expect("session map lock")
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id:?}")))
}

async fn get_lod(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<LodLines>, ApiError> {
    let s = state.session(&id)?;
    Ok(Json(LodLines::of(s.scene.mesh(), s.scene.lod())))
}

/// One frame request, used by `POST /render` and the stream.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRequest {
    /// Partial [`RenderParams`]; absent fields keep the session values.
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub lens: LensState,
    #[serde(default)]
    pub frame_id: u64,
}

/// Applies a partial JSON object onto `base`. Unknown keys and invalid
/// values are rejected.
pub fn merge_params(base: &RenderParams, patch: &Value) -> Result<RenderParams, ApiError> {
    let mut merged = serde_json::to_value(base).expect("params serialize");
    match patch {
        Value::Null => {}
        Value::Object(fields) => {
            let target = merged.as_object_mut().expect("params are an object");
            for (k, v) in fields {
                target.insert(k.clone(), v.clone());
            }
        }
        _ => return Err(ApiError::bad_request("params must be a JSON object")),
    }
    let params: RenderParams = serde_json::from_value(merged)
        .map_err(|e| ApiError::bad_request(format!("invalid params: {e}")))?;
    params.validate()?;
    Ok(params)
}

struct Frame {
    frame_id: u64,
    params: RenderParams,
    lens: LensState,
    png: Vec<u8>,
    stats: RenderStats,
}

fn render_request(
    session: &Session,
    req: FrameRequest,
    threads: Option<usize>,
) -> Result<Frame, ApiError> {
    let base = session.params.lock().expect("params lock").clone();
    let params = merge_params(&base, &req.params)?;
    req.lens.validate()?;
    let _guard = session.render_lock.lock().expect("render lock");
    let out = render(&session.scene, &params, &req.lens, threads)?;
    let png = out.image.encode_png()?;
    Ok(Frame {
        frame_id: req.frame_id,
        params,
        lens: req.lens,
        png,
        stats: out.stats,
    })
}

async fn render_frame(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let req: FrameRequest = if body.is_empty() {
        FrameRequest::default()
    } else {
        parse_json(&body)?
    };
    let threads = state.config.threads;
    let frame = blocking(move || render_request(&session, req, threads)).await?;
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    let mut set = |name: &'static str, value: String| {
        headers.insert(name, HeaderValue::from_str(&value).expect("ascii header"));
    };
    set("x-frame-id", frame.frame_id.to_string());
    set("x-render-ms", format!("{:.3}", frame.stats.total_ms));
    set("x-fragments", frame.stats.fragments.to_string());
    set(
        "x-max-fragments-per-pixel",
        frame.stats.max_fragments_per_pixel.to_string(),
    );
    Ok((headers, frame.png).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PickRequest {
    x: f64,
    y: f64,
    radius: f64,
    #[serde(default)]
    params: Value,
}

/// Returns `{"lens": ObjectLens}` or `{"lens": null}` on a miss.
async fn pick(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let req: PickRequest = parse_json(&body)?;
    if !(req.x.is_finite() && req.y.is_finite() && req.radius > 0.0) {
        return Err(ApiError::bad_request("pick needs finite x, y and radius > 0"));
    }
    blocking(move || {
        let base = session.params.lock().expect("params lock").clone();
        let params = merge_params(&base, &req.params)?;
        let camera = session.scene.camera(&params);
        let lens = pick_object_lens(session.scene.mesh(), &camera, req.x, req.y, req.radius)
            .map(LensState::Object);
        Ok(Json(json!({ "lens": lens })))
    })
    .await
}

/// Replaces the session transfer function with a list of control points.
async fn put_transfer_function(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let points: Vec<ControlPoint> = parse_json(&body)?;
    let tf = TransferFunction::new(points)?;
    let mut params = session.params.lock().expect("params lock");
    params.transfer_function = tf;
    Ok(Json(json!({ "transfer_function": params.transfer_function })))
}

async fn stream(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let threads = state.config.threads;
    Ok(ws.on_upgrade(move |socket| stream_session(socket, session, threads)))
}

/// Binary stream frame: 16-byte header then the PNG.
pub fn encode_frame(frame_id: u64, png: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + png.len());
    out.extend_from_slice(&frame_id.to_le_bytes());
    out.extend_from_slice(&(png.len() as u64).to_le_bytes());
    out.extend_from_slice(png);
    out
}

/// Splits a binary stream frame into its id and PNG payload.
pub fn decode_frame(bytes: &[u8]) -> Option<(u64, &[u8])> {
    let header = bytes.get(..FRAME_HEADER_LEN)?;
    let id = u64::from_le_bytes(header[..8].try_into().ok()?);
    let len = u64::from_le_bytes(header[8..].try_into().ok()?);
    let payload = &bytes[FRAME_HEADER_LEN..];
    (payload.len() as u64 == len).then_some((id, payload))
}

fn text(v: Value) -> Message {
    Message::Text(v.to_string().into())
}

/// Latest-wins render loop: while a frame renders, newer requests replace
/// any request still waiting, so the client never sees a backlog.
async fn stream_session(mut socket: WebSocket, session: Arc<Session>, threads: Option<usize>) {
    let mut pending: Option<FrameRequest> = None;
    let mut job: Option<JoinHandle<Result<Frame, (u64, ApiError)>>> = None;
    loop {
        if job.is_none() {
            if let Some(req) = pending.take() {
                let session = session.clone();
                job = Some(tokio::task::spawn_blocking(move || {
                    let id = req.frame_id;
                    render_request(&session, req, threads).map_err(|e| (id, e))
                }));
            }
        }
        tokio::select! {
            msg = socket.recv() => {
                let Some(Ok(msg)) = msg else { break };
                let text_msg = match msg {
                    Message::Text(t) => t,
                    Message::Close(_) => break,
                    Message::Binary(_) => {
                        let err = json!({"type": "error", "message": "expected a JSON text message"});
                        if socket.send(text(err)).await.is_err() { break }
                        continue;
                    }
                    _ => continue,
                };
                match serde_json::from_str::<FrameRequest>(text_msg.as_str()) {
                    Ok(req) => {
                        if let Some(dropped) = pending.replace(req) {
                            tracing::debug!(frame_id = dropped.frame_id, "superseded");
                        }
                    }
                    Err(e) => {
                        let err = json!({"type": "error", "message": format!("invalid request: {e}")});
                        if socket.send(text(err)).await.is_err() { break }
                    }
                }
            }
            res = async { job.as_mut().expect("guarded").await }, if job.is_some() => {
                job = None;
                let sent = match res {
                    Ok(Ok(frame)) => send_frame(&mut socket, frame).await,
                    Ok(Err((frame_id, e))) => {
                        let mut body = e.body();
                        body["type"] = json!("error");
                        body["message"] = body["error"].take();
                        body.as_object_mut().expect("object").remove("error");
                        body["frame_id"] = json!(frame_id);
                        body["status"] = json!(e.status.as_u16());
                        socket.send(text(body)).await
                    }
                    Err(e) => {
                        tracing::error!("render task failed: {e}");
                        break;
                    }
                };
                if sent.is_err() { break }
            }
        }
    }
}

async fn send_frame(socket: &mut WebSocket, frame: Frame) -> Result<(), axum::Error> {
    let meta = json!({
        "type": "frame",
        "frame_id": frame.frame_id,
        "params": frame.params,
        "lens": frame.lens,
        "stats": frame.stats,
        "bytes": frame.png.len(),
    });
    socket.send(text(meta)).await?;
    let payload = encode_frame(frame.frame_id, &frame.png);
    socket.send(Message::Binary(payload.into())).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_header_round_trip() {
        let bytes = encode_frame(0x0102_0304_0506_0708, b"png!");
        assert_eq!(bytes.len(), FRAME_HEADER_LEN + 4);
        assert_eq!(&bytes[..8], &[8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(&bytes[8..16], &4u64.to_le_bytes());
        assert_eq!(decode_frame(&bytes), Some((0x0102_0304_0506_0708, &b"png!"[..])));
        assert_eq!(decode_frame(&bytes[..10]), None);
        assert_eq!(decode_frame(&bytes[..18]), None);
    }

    #[test]
    fn merge_overrides_only_given_fields() {
        let base = RenderParams {
            delta: 0.7,
            ..RenderParams::default()
        };
        let merged = merge_params(&base, &json!({"lod": 2, "accent": 3.0})).unwrap();
        assert_eq!(merged.lod, 2);
        assert_eq!(merged.accent, 3.0);
        assert_eq!(merged.delta, 0.7);
        assert!(merge_params(&base, &json!({"bogus": 1})).is_err());
        assert!(merge_params(&base, &json!({"accent": 0.5})).is_err());
        assert!(merge_params(&base, &json!([1])).is_err());
        assert_eq!(merge_params(&base, &Value::Null).unwrap(), base);
    }

    #[test]
    fn data_paths_cannot_escape() {
        let dir = std::env::temp_dir().join(format!("hexlens-svc-{}", std::process::id()));
        std::fs::create_dir_all(dir.join("inner")).unwrap();
        std::fs::write(dir.join("inner/a.mesh"), "x").unwrap();
        let inner = dir.join("inner");
        assert!(resolve_data_path(Some(&inner), Path::new("a.mesh")).is_ok());
        let esc = resolve_data_path(Some(&inner), Path::new("../inner/../../etc/passwd"));
        assert!(esc.is_err());
        assert_eq!(
            resolve_data_path(None, Path::new("a.mesh")).unwrap_err().status,
            StatusCode::FORBIDDEN
        );
        std::fs::remove_dir_all(dir).unwrap();
    }
}
