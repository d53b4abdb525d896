//! HTTP and server-sent-events front end for exploration sessions.
//!
//! Every session is kept in memory behind its own lock and persisted as an
//! append-only JSON-lines log `<id>.jsonl` in the data directory. On start
//! the logs are replayed, so a restarted server carries on where it left.

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::io::AsyncWriteExt;
use tokio::sync::{broadcast, Mutex, RwLock};

use coexplore_core::expert::AnswerJson;
use coexplore_core::session::{Event, PendingJson, Session, SessionSpec, Snapshot};
use coexplore_core::Error;

/// An error as the API reports it.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::Stale { .. } => (StatusCode::CONFLICT, "stale"),
            Error::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            Error::InvalidCounterexample { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_counterexample"),
            Error::Protocol(_) => (StatusCode::BAD_REQUEST, "protocol"),
            Error::Io(_) | Error::Replay { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.kind.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct Hosted {
    session: Mutex<Session>,
    tx: broadcast::Sender<Event>,
    path: PathBuf,
}

/// All sessions of one data directory.
pub struct Store {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Hosted>>>,
}

const CHANNEL: usize = 1024;

impl Store {
    /// Loads every session log in `dir`, creating the directory if needed.
    /// Logs that fail to replay are skipped and reported.
    pub async fn open(dir: impl Into<PathBuf>) -> std::io::Result<(Store, Vec<(PathBuf, Error)>)> {
        let dir = dir.into();
        tokio::fs::create_dir_all(&dir).await?;
        let mut sessions = HashMap::new();
        let mut failed = Vec::new();
        let mut entries = tokio::fs::read_dir(&dir).await?;
        let mut paths = Vec::new();
        while let Some(e) = entries.next_entry().await? {
            let p = e.path();
            if p.extension().is_some_and(|x| x == "jsonl") {
                paths.push(p);
            }
        }
        paths.sort();
        for p in paths {
            let text = tokio::fs::read_to_string(&p).await?;
            match Session::replay(&text) {
                Ok(s) => {
                    let full = s.log_text();
                    if full != text {
                        // Torn tail or events the log missed: rewrite it whole.
                        write_atomic(&p, &full).await?;
                    }
                    let (tx, _) = broadcast::channel(CHANNEL);
                    sessions.insert(
                        s.id().to_string(),
                        Arc::new(Hosted {
                            session: Mutex::new(s),
                            tx,
                            path: p,
                        }),
                    );
                }
                Err(e) => {
                    tracing::error!(path = %p.display(), error = %e, "cannot resume session");
                    failed.push((p, e));
                }
            }
        }
        tracing::info!(sessions = sessions.len(), dir = %dir.display(), "store opened");
        Ok((
            Store {
                dir,
                sessions: RwLock::new(sessions),
            },
            failed,
        ))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub async fn ids(&self) -> Vec<String> {
        let mut v: Vec<String> = self.sessions.read().await.keys().cloned().collect();
        v.sort();
        v
    }

    async fn get(&self, id: &str) -> ApiResult<Arc<Hosted>> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Creates and persists a session with fresh id and join tokens.
    pub async fn create(&self, spec: SessionSpec) -> ApiResult<Created> {
        let id = format!("{:016x}", rand::random::<u64>());
        let n = match (&spec.roster, &spec.experts) {
            (r, Some(docs)) if r.is_empty() => docs.len(),
            (r, _) => r.len(),
        };
        let tokens: Vec<String> = (0..n).map(|_| format!("{:032x}", rand::random::<u128>())).collect();
        let session = Session::create(id.clone(), spec, tokens.clone())?;
        let path = self.dir.join(format!("{id}.jsonl"));
        write_atomic(&path, &session.log_text()).await?;
        let roster = session
            .spec()
            .roster
            .iter()
            .zip(&tokens)
            .map(|(r, t)| JoinInfo {
                id: r.id.clone(),
                name: r.name.clone(),
                token: t.clone(),
            })
            .collect();
        let snapshot = session.snapshot();
        let (tx, _) = broadcast::channel(CHANNEL);
        self.sessions.write().await.insert(
            id.clone(),
            Arc::new(Hosted {
                session: Mutex::new(session),
                tx,
                path,
            }),
        );
        tracing::info!(session = %id, "created");
        Ok(Created { id, roster, snapshot })
    }

    pub async fn snapshot(&self, id: &str) -> ApiResult<Snapshot> {
        let h = self.get(id).await?;
        let s = h.session.lock().await;
        Ok(s.snapshot())
    }

    pub async fn pending(&self, id: &str, expert: &str, token: &str) -> ApiResult<PendingReply> {
        let h = self.get(id).await?;
        let s = h.session.lock().await;
        authorize(&s, expert, token)?;
        Ok(PendingReply {
            question: s.pending_for(expert)?,
            finished: s.is_finished(),
        })
    }

    /// Applies one answer, appends the resulting events to the log and
    /// publishes them. Nothing changes if any step fails.
    pub async fn answer(&self, id: &str, req: AnswerRequest) -> ApiResult<AnswerReply> {
        let h = self.get(id).await?;
        let mut s = h.session.lock().await;
        authorize(&s, &req.expert, &req.token)?;
        let mut next = s.clone();
        let events = next.submit(&req.expert, req.question_id, &req.answer)?.to_vec();
        let mut text = String::new();
        for e in &events {
            text.push_str(&e.to_line());
            text.push('\n');
        }
        append(&h.path, &text).await?;
        *s = next;
        for e in &events {
            let _ = h.tx.send(e.clone());
        }
        Ok(AnswerReply {
            events: events.iter().map(Event::public).collect(),
            question: s.pending_for(&req.expert)?,
            finished: s.is_finished(),
        })
    }

    /// Public events after `from`, plus a receiver for the ones to come.
    async fn subscribe(&self, id: &str, from: u64) -> ApiResult<(Vec<Event>, broadcast::Receiver<Event>)> {
        let h = self.get(id).await?;
        let s = h.session.lock().await;
        let rx = h.tx.subscribe();
        let backlog = s
            .events()
            .iter()
            .filter(|e| e.seq > from)
            .map(Event::public)
            .collect();
        Ok((backlog, rx))
    }
}

fn authorize(s: &Session, expert: &str, token: &str) -> ApiResult<()> {
    s.authorize(expert, token).map_err(|e| match e {
        Error::Protocol(m) if m.starts_with("bad join token") => ApiError::new(StatusCode::FORBIDDEN, "forbidden", m),
        other => other.into(),
    })
}

async fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    let mut f = tokio::fs::File::create(&tmp).await?;
    f.write_all(text.as_bytes()).await?;
    f.sync_all().await?;
    drop(f);
    tokio::fs::rename(&tmp, path).await
}

async fn append(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = tokio::fs::OpenOptions::new().append(true).open(path).await?;
    f.write_all(text.as_bytes()).await?;
    f.sync_data().await
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JoinInfo {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub token: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub roster: Vec<JoinInfo>,
    pub snapshot: Snapshot,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PendingReply {
    pub question: Option<PendingJson>,
    pub finished: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub expert: String,
    #[serde(default)]
    pub token: String,
    pub question_id: u64,
    pub answer: AnswerJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnswerReply {
    pub events: Vec<Event>,
    pub question: Option<PendingJson>,
    pub finished: bool,
}

#[derive(Deserialize)]
struct PendingQuery {
    expert: String,
    #[serde(default)]
    token: String,
}

#[derive(Deserialize)]
struct EventsQuery {
    from: Option<u64>,
}

async fn create_session(State(store): State<Arc<Store>>, Json(spec): Json<SessionSpec>) -> ApiResult<(StatusCode, Json<Created>)> {
    Ok((StatusCode::CREATED, Json(store.create(spec).await?)))
}

async fn get_session(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Snapshot>> {
    Ok(Json(store.snapshot(&id).await?))
}

async fn get_pending(
    State(store): State<Arc<Store>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<PendingQuery>,
) -> ApiResult<Json<PendingReply>> {
    Ok(Json(store.pending(&id, &q.expert, &q.token).await?))
}

async fn post_answer(
    State(store): State<Arc<Store>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<AnswerRequest>,
) -> ApiResult<Json<AnswerReply>> {
    Ok(Json(store.answer(&id, req).await?))
}

fn sse_event(e: &Event) -> SseEvent {
    SseEvent::default()
        .id(e.seq.to_string())
        .event(e.name())
        .data(e.to_line())
}

async fn get_events(
    State(store): State<Arc<Store>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<EventsQuery>,
    headers: HeaderMap,
) -> ApiResult<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>> {
    let last_id = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok());
    let from = last_id.or(q.from).unwrap_or(0);
    let (backlog, rx) = store.subscribe(&id, from).await?;
    let last = backlog.last().map_or(from, |e| e.seq);
    // A lagging subscriber is cut off; it reconnects with Last-Event-ID.
    let live = stream::unfold((rx, last), |(mut rx, last)| async move {
        loop {
            match rx.recv().await {
                Ok(e) if e.seq <= last => continue,
                Ok(e) => {
                    let seq = e.seq;
                    return Some((e.public(), (rx, seq)));
                }
                Err(_) => return None,
            }
        }
    });
    let s = stream::iter(backlog)
        .chain(live)
        .map(|e| Ok::<_, Infallible>(sse_event(&e)));
    Ok(Sse::new(s).keep_alive(KeepAlive::default()))
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/pending", get(get_pending))
        .route("/sessions/{id}/answers", post(post_answer))
        .route("/sessions/{id}/events", get(get_events))
        .with_state(store)
}

/// Serves `dir` on `addr` until the process is stopped.
pub async fn serve(addr: &str, dir: impl Into<PathBuf>) -> std::io::Result<()> {
    let (store, failed) = Store::open(dir).await?;
    for (p, e) in &failed {
        tracing::warn!(path = %p.display(), error = %e, "skipped");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(store))).await
}
