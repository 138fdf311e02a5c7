//! Session-scoped HTTP JSON API.
//!
//! A session is created from an uploaded CSV; its id is derived from the
//! upload, so retrying the same upload returns the same session. Every
//! response carries the session's dataset `version` (JSON field and
//! `x-dataset-version` header). A request body may include `"version"`; if
//! it does not match the current version the request is rejected with 409.
//! Replacing the dataset bumps the version and drops models and rules built
//! on the old one.
//!
//! Computation runs on the blocking pool. Reads of a session proceed
//! concurrently; mutations take its write lock. Results are memoized per
//! `(session, version, route, body)`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use glc_core::coords::{self, CoordinateSystemSpec, GlcGraph, PairingSpec, SystemKind};
use glc_core::glc_l::{self, ModelArtifact, TrainConfig};
use glc_core::rules::{evaluate_rule, AnyRule, FspConfig, RectRule};
use glc_core::GlcError;
use parking_lot::{Mutex, RwLock};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::config::Settings;
use crate::error::{core_kind, CliError, CliResult};
use crate::ops::{self, Prepared, RenderOptions, RenderTarget};

pub const VERSION_HEADER: &str = "x-dataset-version";
pub const DEFAULT_MODEL: &str = "default";
pub const DEFAULT_RULE: &str = "fsp";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
    version: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
            version: None,
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
    }

    fn stale(expected: u64, current: u64) -> Self {
        Self {
            version: Some(current),
            ..Self::new(
                StatusCode::CONFLICT,
                "stale_version",
                format!("request was made against version {expected}, dataset is at {current}"),
            )
        }
    }

    fn bad_body(e: serde_json::Error) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", e.to_string())
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        match &e {
            CliError::Core(g) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, core_kind(g), e.to_string()),
            CliError::Usage(_) | CliError::Json(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, e.kind(), e.to_string())
            }
            CliError::Io(_) | CliError::Config(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string())
            }
        }
    }
}

impl From<GlcError> for ApiError {
    fn from(e: GlcError) -> Self {
        CliError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": { "kind": self.kind, "message": self.message } });
        if let Some(v) = self.version {
            body["version"] = json!(v);
        }
        let mut resp = (self.status, Json(body)).into_response();
        if let Some(v) = self.version {
            resp.headers_mut()
                .insert(VERSION_HEADER, HeaderValue::from_str(&v.to_string()).expect("digits"));
        }
        resp
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub csv: String,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
}

fn default_label() -> String {
    "class".into()
}

fn default_delimiter() -> String {
    ",".into()
}

impl Source {
    fn delimiter_byte(&self) -> CliResult<u8> {
        match self.delimiter.as_bytes() {
            [b] => Ok(*b),
            _ if self.delimiter == "\\t" => Ok(b'\t'),
            _ => Err(CliError::Usage(format!(
                "delimiter must be one byte, got `{}`",
                self.delimiter
            ))),
        }
    }

    /// Session ids are a digest of the upload, which makes creation
    /// idempotent.
    fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.label.as_bytes());
        h.update([0]);
        h.update(self.delimiter.as_bytes());
        h.update([0]);
        h.update(self.csv.as_bytes());
        hex::encode(&h.finalize()[..8])
    }

    fn load(&self, row_cap: usize) -> CliResult<Prepared> {
        ops::load_text(&self.csv, &self.label, self.delimiter_byte()?, row_cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRule {
    pub pairing: PairingSpec,
    pub rule: RectRule,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub version: u64,
    pub source: Source,
    pub data: Arc<Prepared>,
    pub models: BTreeMap<String, ModelArtifact>,
    pub rules: BTreeMap<String, StoredRule>,
    /// Bumped whenever a model or rule is stored; part of the cache key.
    revision: u64,
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    id: String,
    version: u64,
    source: Source,
    models: BTreeMap<String, ModelArtifact>,
    rules: BTreeMap<String, StoredRule>,
}

impl Session {
    fn file(&self) -> SessionFile {
        SessionFile {
            id: self.id.clone(),
            version: self.version,
            source: self.source.clone(),
            models: self.models.clone(),
            rules: self.rules.clone(),
        }
    }
}

pub struct AppState {
    pub settings: Settings,
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    cache: Mutex<HashMap<String, Value>>,
}

impl AppState {
    /// Loads persisted sessions from the state directory, if configured.
    pub fn new(settings: Settings) -> CliResult<Arc<Self>> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &settings.state_dir {
            std::fs::create_dir_all(dir)?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            for path in paths {
                let file: SessionFile = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
                let data = file.source.load(settings.row_cap)?;
                let session = Session {
                    id: file.id.clone(),
                    version: file.version,
                    source: file.source,
                    data: Arc::new(data),
                    models: file.models,
                    rules: file.rules,
                    revision: 0,
                };
                sessions.insert(file.id, Arc::new(RwLock::new(session)));
            }
        }
        Ok(Arc::new(Self {
            settings,
            sessions: RwLock::new(sessions),
            cache: Mutex::new(HashMap::new()),
        }))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<RwLock<Session>>> {
        self.sessions.read().get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, s: &Session) -> ApiResult<()> {
        if let Some(dir) = &self.settings.state_dir {
            write_atomic(&dir.join(format!("{}.json", s.id)), &serde_json::to_vec_pretty(&s.file()).map_err(CliError::from)?)
                .map_err(CliError::from)?;
        }
        Ok(())
    }

    fn cached(&self, key: &str) -> Option<Value> {
        self.cache.lock().get(key).cloned()
    }

    fn remember(&self, key: String, value: Value) {
        let mut cache = self.cache.lock();
        if cache.len() >= self.settings.cache_entries.max(1) {
            cache.clear();
        }
        cache.insert(key, value);
    }

    fn forget_session(&self, id: &str) {
        let prefix = format!("{id}:");
        self.cache.lock().retain(|k, _| !k.starts_with(&prefix));
    }
}

fn write_atomic(path: &FsPath, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

fn with_version(mut v: Value, version: u64) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("version".into(), json!(version));
        v
    } else {
        json!({ "version": version, "result": v })
    }
}

fn respond(status: StatusCode, version: u64, body: Value) -> Response {
    let mut resp = (status, Json(with_version(body, version))).into_response();
    resp.headers_mut()
        .insert(VERSION_HEADER, HeaderValue::from_str(&version.to_string()).expect("digits"));
    resp
}

fn parse_body(body: &Bytes) -> ApiResult<Value> {
    if body.iter().all(|b| b.is_ascii_whitespace()) {
        return Ok(json!({}));
    }
    let v: Value = serde_json::from_slice(body).map_err(ApiError::bad_body)?;
    if !v.is_object() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_body",
            "request body must be a JSON object",
        ));
    }
    Ok(v)
}

fn typed<T: DeserializeOwned>(mut v: Value) -> ApiResult<T> {
    if let Value::Object(m) = &mut v {
        m.remove("version");
    }
    serde_json::from_value(v).map_err(ApiError::bad_body)
}

fn check_version(body: &Value, current: u64) -> ApiResult<()> {
    match body.get("version") {
        None | Some(Value::Null) => Ok(()),
        Some(v) => match v.as_u64() {
            Some(expected) if expected == current => Ok(()),
            Some(expected) => Err(ApiError::stale(expected, current)),
            None => Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_body",
                "version must be a non-negative integer",
            )),
        },
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

struct Snapshot {
    version: u64,
    revision: u64,
    data: Arc<Prepared>,
    models: BTreeMap<String, ModelArtifact>,
    rules: BTreeMap<String, StoredRule>,
}

/// Runs a read-only computation against the session's current data,
/// memoized by route and body.
async fn compute(
    state: &Arc<AppState>,
    id: &str,
    route: &'static str,
    body: Bytes,
    f: impl FnOnce(Snapshot, Value) -> ApiResult<Value> + Send + 'static,
) -> ApiResult<(u64, Value)> {
    let session = state.session(id)?;
    let body = parse_body(&body)?;
    let snap = {
        let s = session.read();
        check_version(&body, s.version)?;
        Snapshot {
            version: s.version,
            revision: s.revision,
            data: s.data.clone(),
            models: s.models.clone(),
            rules: s.rules.clone(),
        }
    };
    let version = snap.version;
    let mut canonical = body.clone();
    if let Value::Object(m) = &mut canonical {
        m.remove("version");
    }
    let key = format!("{id}:{version}:{}:{route}:{canonical}", snap.revision);
    if let Some(hit) = state.cached(&key) {
        return Ok((version, hit));
    }
    let out = blocking(move || f(snap, body)).await?;
    state.remember(key, out.clone());
    Ok((version, out))
}

/// Stores an artifact produced at `version`, unless the dataset moved on.
fn store(
    state: &Arc<AppState>,
    id: &str,
    version: u64,
    apply: impl FnOnce(&mut Session),
) -> ApiResult<()> {
    let session = state.session(id)?;
    let mut s = session.write();
    if s.version != version {
        return Err(ApiError::stale(version, s.version));
    }
    apply(&mut s);
    s.revision += 1;
    state.persist(&s)
}

fn to_value<T: Serialize>(v: &T) -> ApiResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::from(e).into())
}

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let source: Source = typed(parse_body(&body)?)?;
    let id = source.id();
    if let Ok(existing) = state.session(&id) {
        let s = existing.read();
        let summary = to_value(&ops::summary(&s.data))?;
        return Ok(respond(StatusCode::OK, s.version, json!({ "id": id, "dataset": summary })));
    }
    let row_cap = state.settings.row_cap;
    let src = source.clone();
    let data = blocking(move || src.load(row_cap).map_err(ApiError::from)).await?;
    let summary = to_value(&ops::summary(&data))?;
    let session = Session {
        id: id.clone(),
        version: 1,
        source,
        data: Arc::new(data),
        models: BTreeMap::new(),
        rules: BTreeMap::new(),
        revision: 0,
    };
    state.persist(&session)?;
    // a concurrent identical upload may have won the race; keep the first
    let mut sessions = state.sessions.write();
    let entry = sessions.entry(id.clone()).or_insert_with(|| Arc::new(RwLock::new(session)));
    let version = entry.read().version;
    Ok(respond(StatusCode::CREATED, version, json!({ "id": id, "dataset": summary })))
}

async fn get_dataset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let s = session.read();
    let d = &s.data;
    let body = json!({
        "id": id,
        "summary": to_value(&ops::summary(d))?,
        "attribute_names": d.raw.attribute_names(),
        "rows": d.raw.rows(),
        "normalized_rows": d.normalized.rows(),
        "labels": d.raw.labels(),
        "normalization": to_value(&d.normalization)?,
        "models": s.models.keys().collect::<Vec<_>>(),
        "rules": s.rules.keys().collect::<Vec<_>>(),
    });
    Ok(respond(StatusCode::OK, s.version, body))
}

#[derive(Deserialize)]
struct ReplaceDataset {
    csv: String,
    label: Option<String>,
    delimiter: Option<String>,
}

async fn replace_dataset(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let body = parse_body(&body)?;
    let (current_version, current_source) = {
        let s = session.read();
        check_version(&body, s.version)?;
        (s.version, s.source.clone())
    };
    let req: ReplaceDataset = typed(body)?;
    let source = Source {
        csv: req.csv,
        label: req.label.unwrap_or(current_source.label.clone()),
        delimiter: req.delimiter.unwrap_or(current_source.delimiter.clone()),
    };
    if source == current_source {
        let s = session.read();
        let summary = to_value(&ops::summary(&s.data))?;
        return Ok(respond(StatusCode::OK, s.version, json!({ "id": id, "dataset": summary })));
    }
    let row_cap = state.settings.row_cap;
    let src = source.clone();
    let data = blocking(move || src.load(row_cap).map_err(ApiError::from)).await?;
    let summary = to_value(&ops::summary(&data))?;
    let mut s = session.write();
    if s.version != current_version {
        return Err(ApiError::stale(current_version, s.version));
    }
    s.version += 1;
    s.source = source;
    s.data = Arc::new(data);
    s.models.clear();
    s.rules.clear();
    state.persist(&s)?;
    state.forget_session(&id);
    Ok(respond(StatusCode::OK, s.version, json!({ "id": id, "dataset": summary })))
}

#[derive(Deserialize)]
struct EncodeRequest {
    system: String,
    pairing: Option<PairingSpec>,
    offsets: Option<Value>,
    angles: Option<Vec<f64>>,
    #[serde(default = "yes")]
    normalized: bool,
    rows: Option<Vec<usize>>,
}

fn yes() -> bool {
    true
}

fn system_from(req: &EncodeRequest, d: &glc_core::Dataset) -> ApiResult<CoordinateSystemSpec> {
    let kind: SystemKind = req.system.parse()?;
    let bad = |e: serde_json::Error| ApiError::bad_body(e);
    let system = match (kind, &req.offsets, &req.angles) {
        (SystemKind::Spc, Some(o), _) => CoordinateSystemSpec::Spc {
            offsets: serde_json::from_value(o.clone()).map_err(bad)?,
        },
        (SystemKind::InLine, Some(o), _) => CoordinateSystemSpec::InLine {
            offsets: serde_json::from_value(o.clone()).map_err(bad)?,
        },
        (SystemKind::CpcStars, _, Some(a)) => CoordinateSystemSpec::CpcStars { angles: a.clone() },
        _ => ops::default_system(kind, d, None),
    };
    system.validate()?;
    Ok(system)
}

async fn encode(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let (version, out) = compute(&state, &id, "encode", body, |snap, body| {
        let req: EncodeRequest = typed(body)?;
        let d = snap.data.space(req.normalized);
        let system = system_from(&req, d)?;
        let scene = ops::scene(d, &system, req.pairing.as_ref(), req.rows.as_deref())?;
        Ok(json!({ "system": to_value(&system)?, "pairing": to_value(&req.pairing)?, "graphs": to_value(&scene.graphs)? }))
    })
    .await?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct DecodeRequest {
    graphs: Vec<GlcGraph>,
}

async fn decode(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let (version, out) = compute(&state, &id, "decode", body, |_, body| {
        let req: DecodeRequest = typed(body)?;
        let points = req
            .graphs
            .iter()
            .map(coords::decode)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(json!({ "points": points }))
    })
    .await?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct TrainRequest {
    seed: Option<u64>,
    restarts: Option<usize>,
    max_iters: Option<usize>,
    positive_class: Option<String>,
    #[serde(default = "default_model")]
    name: String,
}

fn default_model() -> String {
    DEFAULT_MODEL.into()
}

async fn glcl_train(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let settings = state.settings.clone();
    let (version, out) = compute(&state, &id, "glcl/train", body, move |snap, body| {
        let req: TrainRequest = typed(body)?;
        let base = TrainConfig::default();
        let cfg = TrainConfig {
            seed: req.seed.unwrap_or(settings.seed),
            restarts: req.restarts.unwrap_or(settings.restarts),
            max_iters: req.max_iters.unwrap_or(base.max_iters),
            positive_class: req.positive_class,
            ..base
        };
        let mut v = to_value(&ops::train(&snap.data, &cfg)?)?;
        v["name"] = json!(req.name);
        Ok(v)
    })
    .await?;
    let name = out["name"].as_str().unwrap_or(DEFAULT_MODEL).to_string();
    let model: ModelArtifact = serde_json::from_value(out["model"].clone()).map_err(CliError::from)?;
    store(&state, &id, version, |s| {
        s.models.insert(name, model);
    })?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct AnglesRequest {
    angles: Vec<f64>,
    signs: Option<Vec<f64>>,
    threshold: Option<f64>,
    positive_class: Option<String>,
}

async fn glcl_angles(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let (version, out) = compute(&state, &id, "glcl/angles", body, |snap, body| {
        let req: AnglesRequest = typed(body)?;
        let eval = glc_l::evaluate_angles(
            &snap.data.normalized,
            &req.angles,
            req.signs.as_deref(),
            req.threshold,
            req.positive_class.as_deref(),
        )?;
        to_value(&eval)
    })
    .await?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct EvalRequest {
    rule: Value,
    pairing: Option<PairingSpec>,
    #[serde(default = "yes")]
    normalized: bool,
}

async fn rules_eval(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let (version, out) = compute(&state, &id, "rules/eval", body, |snap, body| {
        let req: EvalRequest = typed(body)?;
        let rule: AnyRule = if req.rule.get("kind").is_some() {
            serde_json::from_value(req.rule).map_err(ApiError::bad_body)?
        } else {
            AnyRule::Rect(serde_json::from_value(req.rule).map_err(ApiError::bad_body)?)
        };
        let d = snap.data.space(req.normalized);
        let m = d.n_attributes() + d.n_attributes() % 2;
        let pairing = req.pairing.unwrap_or_else(|| PairingSpec::identity(m));
        let report = evaluate_rule(&rule, d, &pairing)?;
        Ok(json!({ "report": to_value(&report)? }))
    })
    .await?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct FspRequest {
    #[serde(flatten)]
    config: FspConfig,
    positive_class: Option<String>,
    #[serde(default = "default_rule")]
    name: String,
}

fn default_rule() -> String {
    DEFAULT_RULE.into()
}

async fn fsp(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let settings = state.settings.clone();
    let (version, out) = compute(&state, &id, "fsp", body, move |snap, mut body| {
        // the session seed applies unless the request sets one
        if body.get("seed").is_none() {
            body["seed"] = json!(settings.fsp.seed);
        }
        let req: FspRequest = typed(body)?;
        let mut v = to_value(&ops::fsp(&snap.data, &req.config, req.positive_class.as_deref())?)?;
        v["name"] = json!(req.name);
        Ok(v)
    })
    .await?;
    let name = out["name"].as_str().unwrap_or(DEFAULT_RULE).to_string();
    let stored = StoredRule {
        pairing: serde_json::from_value(out["pairing"].clone()).map_err(CliError::from)?,
        rule: serde_json::from_value(out["rule"].clone()).map_err(CliError::from)?,
    };
    store(&state, &id, version, |s| {
        s.rules.insert(name, stored);
    })?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize)]
struct ExplainRequest {
    row: usize,
    #[serde(default = "three")]
    k: usize,
    #[serde(default = "default_model")]
    model: String,
}

fn three() -> usize {
    3
}

async fn explain(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let (version, out) = compute(&state, &id, "explain", body, |snap, body| {
        let req: ExplainRequest = typed(body)?;
        let model = snap.models.get(&req.model).ok_or_else(|| {
            ApiError::new(
                StatusCode::CONFLICT,
                "missing_model",
                format!("no model `{}`; train one first", req.model),
            )
        })?;
        to_value(&ops::explain(&snap.data, model, req.row, req.k)?)
    })
    .await?;
    Ok(respond(StatusCode::OK, version, out))
}

#[derive(Deserialize, Serialize)]
struct RenderQuery {
    /// 1-based, `1-2,3-4`.
    pairing: Option<String>,
    normalize: Option<bool>,
    spacing: Option<f64>,
    model: Option<String>,
    rule: Option<String>,
}

async fn render_svg(
    State(state): State<Arc<AppState>>,
    Path((id, system)): Path<(String, String)>,
    Query(q): Query<RenderQuery>,
) -> ApiResult<Response> {
    let target: RenderTarget = system.parse()?;
    let body = Bytes::from(serde_json::to_vec(&q).map_err(CliError::from)?);
    let spec = state.settings.render.clone();
    let (version, out) = compute(&state, &id, "render", body, move |snap, _| {
        let (rule, rule_pairing) = match &q.rule {
            None => (None, None),
            Some(name) => {
                let r = snap.rules.get(name).ok_or_else(|| {
                    ApiError::new(StatusCode::CONFLICT, "missing_rule", format!("no rule `{name}`; run fsp first"))
                })?;
                (Some(r.rule.clone()), Some(r.pairing.clone()))
            }
        };
        let model = match target {
            RenderTarget::Glcl => {
                let name = q.model.as_deref().unwrap_or(DEFAULT_MODEL);
                Some(snap.models.get(name).cloned().ok_or_else(|| {
                    ApiError::new(StatusCode::CONFLICT, "missing_model", format!("no model `{name}`; train one first"))
                })?)
            }
            RenderTarget::System(_) => None,
        };
        let pairing = match &q.pairing {
            Some(p) => Some(ops::parse_pairing(p)?),
            None => rule_pairing,
        };
        let opts = RenderOptions {
            pairing,
            spacing: q.spacing,
            normalize: q.normalize.unwrap_or(false),
            model,
            rule,
        };
        Ok(Value::String(ops::render(&snap.data, target, &opts, &spec)?))
    })
    .await?;
    let svg = out.as_str().unwrap_or_default().to_string();
    let mut resp = ([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response();
    resp.headers_mut()
        .insert(VERSION_HEADER, HeaderValue::from_str(&version.to_string()).expect("digits"));
    Ok(resp)
}

// ---------------------------------------------------------------------------
// Router
// ---------------------------------------------------------------------------

pub fn router(state: Arc<AppState>) -> Router {
    let origin = match &state.settings.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::any(),
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers(Any)
        .expose_headers([HeaderName::from_static(VERSION_HEADER)]);
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/dataset", get(get_dataset).post(replace_dataset))
        .route("/sessions/{id}/encode", post(encode))
        .route("/sessions/{id}/decode", post(decode))
        .route("/sessions/{id}/glcl/train", post(glcl_train))
        .route("/sessions/{id}/glcl/angles", post(glcl_angles))
        .route("/sessions/{id}/rules/eval", post(rules_eval))
        .route("/sessions/{id}/fsp", post(fsp))
        .route("/sessions/{id}/explain", post(explain))
        .route("/sessions/{id}/render/{system}", get(render_svg))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(settings: Settings) -> CliResult<()> {
    let addr: SocketAddr = format!("{}:{}", settings.host, settings.port)
        .parse()
        .map_err(|e| CliError::Config(format!("bind address: {e}")))?;
    let state = AppState::new(settings)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
