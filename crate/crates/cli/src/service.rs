//! HTTP API over the shared operations, plus in-memory derivation sessions.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, TryLockError};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use lftab_core::table::TableRecord;
use lftab_core::{fixtures, Answer, ExecConfig, LogicType, Table};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{ApiError, Kind};
use crate::ops;
use crate::session::{Finalized, Session, SessionView};

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);
pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Tables are read from `<dir>/tables`; finalized annotations are
    /// appended to `<dir>/annotations.jsonl`.
    pub data_dir: Option<PathBuf>,
    pub exec_config: ExecConfig,
    pub session_ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { data_dir: None, exec_config: ExecConfig::default(), session_ttl: DEFAULT_SESSION_TTL }
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

pub struct AppState {
    tables: BTreeMap<String, Arc<Table>>,
    exec_config: ExecConfig,
    ttl: Duration,
    sessions: Mutex<HashMap<String, Entry>>,
    annotations: Option<PathBuf>,
    append_lock: Mutex<()>,
}

fn is_table_file(p: &FsPath) -> bool {
    p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "csv" | "tsv" | "psv"))
}

fn load_tables(dir: &FsPath) -> Result<Vec<Table>, ApiError> {
    let read = std::fs::read_dir(dir).map_err(|e| ApiError::io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = read.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| is_table_file(p)).collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Table::load(p).map_err(|e| ApiError::new(Kind::Domain, "BadTable", format!("{}: {e}", p.display()))))
        .collect()
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl AppState {
    /// The bundled fixture is always served; a data directory adds its tables.
    pub fn new(cfg: ServiceConfig) -> Result<Self, ApiError> {
        let mut tables = BTreeMap::new();
        let fixture = fixtures::opec_2012();
        tables.insert(fixture.table_id.clone(), Arc::new(fixture));
        let mut annotations = None;
        if let Some(dir) = &cfg.data_dir {
            let table_dir = dir.join("tables");
            if table_dir.is_dir() {
                for t in load_tables(&table_dir)? {
                    tables.insert(t.table_id.clone(), Arc::new(t));
                }
            }
            annotations = Some(dir.join(ANNOTATIONS_FILE));
        }
        Ok(AppState {
            tables,
            exec_config: cfg.exec_config,
            ttl: cfg.session_ttl,
            sessions: Mutex::new(HashMap::new()),
            annotations,
            append_lock: Mutex::new(()),
        })
    }

    pub fn table(&self, id: &str) -> Result<Arc<Table>, ApiError> {
        self.tables
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(Kind::NotFound, "UnknownTable", format!("no table `{id}`")))
    }

    /// Drops sessions idle for longer than the expiry.
    pub fn expire_sessions(&self) -> usize {
        let mut map = lock(&self.sessions);
        let before = map.len();
        map.retain(|_, e| e.last_used.elapsed() <= self.ttl);
        before - map.len()
    }

    pub fn session_count(&self) -> usize {
        lock(&self.sessions).len()
    }

    fn create_session(&self, table: Arc<Table>, logic_type: LogicType) -> SessionView {
        self.expire_sessions();
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), table, logic_type, self.exec_config);
        let view = session.view();
        lock(&self.sessions).insert(id, Entry { session: Arc::new(Mutex::new(session)), last_used: Instant::now() });
        view
    }

    /// Shared handle to a live session; touching it resets its idle clock.
    pub fn session_handle(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.expire_sessions();
        let mut map = lock(&self.sessions);
        let entry = map
            .get_mut(id)
            .ok_or_else(|| ApiError::new(Kind::NotFound, "UnknownSession", format!("no session `{id}`")))?;
        entry.last_used = Instant::now();
        Ok(entry.session.clone())
    }

    /// Runs `f` with exclusive access to a session. A session already in
    /// use by another request is a conflict, never a wait.
    fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<R, ApiError>) -> Result<R, ApiError> {
        let handle = self.session_handle(id)?;
        let mut guard = match handle.try_lock() {
            Ok(g) => g,
            Err(TryLockError::WouldBlock) => {
                return Err(ApiError::new(Kind::Conflict, "SessionBusy", format!("session `{id}` is being modified")))
            }
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
        };
        f(&mut guard)
    }

    fn append_annotation(&self, session: &Session, done: &Finalized) -> Result<bool, ApiError> {
        let Some(path) = &self.annotations else {
            return Ok(false);
        };
        let at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let line = json!({
            "session_id": session.id,
            "table_id": session.table.table_id,
            "logic_type": done.logic_type,
            "logic_str": done.logic_str,
            "interpretation": done.interpretation,
            "sentence": done.sentence,
            "answers": session.record.answers,
            "finalized_at": at,
        });
        let _guard = lock(&self.append_lock);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ApiError::io(format!("{}: {e}", path.display())))?;
        writeln!(file, "{line}").map_err(|e| ApiError::io(format!("{}: {e}", path.display())))?;
        Ok(true)
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<Json<T>, ApiError>;

/// Request bodies are decoded here so malformed JSON gets a coded error.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::usage(format!("invalid request body: {e}")))
}

#[derive(Deserialize)]
struct LogicRequest {
    logic_str: String,
}

#[derive(Deserialize)]
struct TableLogicRequest {
    table_id: Option<String>,
    table: Option<TableRecord>,
    logic_str: String,
    #[serde(default)]
    config: Option<ExecConfig>,
    #[serde(default)]
    trace: bool,
}

impl TableLogicRequest {
    fn table(self: &TableLogicRequest, state: &AppState) -> Result<Arc<Table>, ApiError> {
        match (&self.table_id, &self.table) {
            (Some(id), None) => state.table(id),
            (None, Some(rec)) => ops::inline_table(rec.clone()).map(Arc::new),
            _ => Err(ApiError::usage("give exactly one of `table_id` and `table`")),
        }
    }
}

async fn parse(bytes: Bytes) -> ApiResult<ops::Parsed> {
    let req: LogicRequest = body(&bytes)?;
    ops::parse_report(&req.logic_str).map(Json)
}

async fn typecheck(bytes: Bytes) -> ApiResult<ops::Checked> {
    let req: LogicRequest = body(&bytes)?;
    ops::check(&req.logic_str).map(Json)
}

async fn execute(State(state): State<Shared>, bytes: Bytes) -> ApiResult<ops::Executed> {
    let req: TableLogicRequest = body(&bytes)?;
    let table = req.table(&state)?;
    let cfg = req.config.unwrap_or(state.exec_config);
    cfg.validate().map_err(|m| ApiError::new(Kind::Usage, "InvalidConfig", m))?;
    ops::execute(&table, &req.logic_str, &cfg, req.trace).map(Json)
}

async fn realize(State(state): State<Shared>, bytes: Bytes) -> ApiResult<ops::Realized> {
    let req: TableLogicRequest = body(&bytes)?;
    let table = req.table(&state)?;
    ops::realize(&table, &req.logic_str).map(Json)
}

async fn interpret(bytes: Bytes) -> ApiResult<ops::Interpreted> {
    let req: LogicRequest = body(&bytes)?;
    ops::interpret_str(&req.logic_str).map(Json)
}

#[derive(Serialize)]
struct TableSummary {
    table_id: String,
    caption: String,
    columns: Vec<String>,
    rows: usize,
}

async fn list_tables(State(state): State<Shared>) -> Json<Vec<TableSummary>> {
    Json(
        state
            .tables
            .values()
            .map(|t| TableSummary {
                table_id: t.table_id.clone(),
                caption: t.caption.clone(),
                columns: t.columns.clone(),
                rows: t.row_count(),
            })
            .collect(),
    )
}

async fn get_table(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<TableRecord> {
    Ok(Json(state.table(&id)?.to_record()))
}

async fn logic_types() -> Json<Vec<ops::LogicTypeInfo>> {
    Json(ops::logic_types())
}

#[derive(Deserialize)]
struct CreateSession {
    table_id: String,
    logic_type: String,
}

async fn create_session(State(state): State<Shared>, bytes: Bytes) -> ApiResult<SessionView> {
    let req: CreateSession = body(&bytes)?;
    let table = state.table(&req.table_id)?;
    let lt: LogicType = req.logic_type.parse().map_err(|m| ApiError::new(Kind::Usage, "UnknownLogicType", m))?;
    Ok(Json(state.create_session(table, lt)))
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<SessionView> {
    state.with_session(&id, |s| Ok(s.view())).map(Json)
}

#[derive(Deserialize)]
struct AnswerRequest {
    question_id: String,
    answer: Answer,
}

async fn answer(State(state): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<SessionView> {
    let req: AnswerRequest = body(&bytes)?;
    state
        .with_session(&id, |s| {
            s.answer(&req.question_id, req.answer)?;
            Ok(s.view())
        })
        .map(Json)
}

#[derive(Deserialize, Default)]
struct FinalizeRequest {
    #[serde(default)]
    sentence: Option<String>,
}

#[derive(Serialize)]
struct FinalizeResponse {
    #[serde(flatten)]
    result: Finalized,
    persisted: bool,
}

async fn finalize(State(state): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<FinalizeResponse> {
    let req: FinalizeRequest =
        if bytes.iter().all(u8::is_ascii_whitespace) { FinalizeRequest::default() } else { body(&bytes)? };
    state
        .with_session(&id, |s| {
            let result = s.finalize(req.sentence)?;
            let persisted = state.append_annotation(s, &result)?;
            Ok(FinalizeResponse { result, persisted })
        })
        .map(Json)
}

async fn not_found() -> ApiError {
    ApiError::new(Kind::NotFound, "NotFound", "no such endpoint")
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/parse", post(parse))
        .route("/typecheck", post(typecheck))
        .route("/execute", post(execute))
        .route("/realize", post(realize))
        .route("/interpret", post(interpret))
        .route("/tables", get(list_tables))
        .route("/tables/{id}", get(get_table))
        .route("/logic-types", get(logic_types))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/finalize", post(finalize))
        .fallback(not_found)
        .with_state(state)
}

/// Serves until interrupted, sweeping idle sessions once a minute.
pub async fn serve(bind: &str, state: Shared) -> Result<(), ApiError> {
    let listener =
        tokio::net::TcpListener::bind(bind).await.map_err(|e| ApiError::io(format!("cannot bind {bind}: {e}")))?;
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = sweeper.expire_sessions();
            if n > 0 {
                log::info!("expired {n} idle sessions");
            }
        }
    });
    log::info!("listening on {bind} with {} tables", state.tables.len());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ApiError::new(Kind::Internal, "Internal", e.to_string()))
}
