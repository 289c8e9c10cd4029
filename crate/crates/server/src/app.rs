use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use sketchsearch::classifier::{ElementPrediction, Recognizer};
use sketchsearch::corpus::CorpusIndex;
use sketchsearch::query::{CanvasState, SessionSnapshot};
use sketchsearch::search::{MetricWeights, Ranking, SearchEngine};
use sketchsearch::stroke::{Point, Stroke};
use sketchsearch::Category;

use crate::error::{ApiError, ErrorCode};
use crate::feedback::{FeedbackLog, FeedbackRecord, Vote};
use crate::screens::{Resolution, ScreenImages};
use crate::session::{Reply, Session, SessionStore};

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(3600);

/// Largest stroke accepted, in points.
const MAX_STROKE_POINTS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub session_ttl: Duration,
    pub screens_dir: Option<PathBuf>,
    pub feedback_log: PathBuf,
    pub weights: MetricWeights,
}

struct Inner {
    index: Arc<CorpusIndex>,
    recognizer: Arc<dyn Recognizer>,
    engine: SearchEngine,
    sessions: SessionStore,
    images: ScreenImages,
    feedback: FeedbackLog,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(
        index: Arc<CorpusIndex>,
        recognizer: Arc<dyn Recognizer>,
        config: ServiceConfig,
    ) -> std::io::Result<Self> {
        Ok(Self(Arc::new(Inner {
            index,
            recognizer,
            engine: SearchEngine::new(config.weights),
            sessions: SessionStore::new(config.session_ttl),
            images: ScreenImages::new(config.screens_dir),
            feedback: FeedbackLog::open(&config.feedback_log)?,
        })))
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.0.sessions
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.0.index
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/categories", get(categories))
        .route("/api/session", post(create_session))
        .route("/api/stroke", post(add_stroke))
        .route("/api/stroke/undo", post(undo_stroke))
        .route("/api/stroke/redo", post(redo_stroke))
        .route("/api/element/done", post(element_done))
        .route("/api/element/remove-last", post(remove_last))
        .route("/api/results", get(results))
        .route("/api/feedback", post(feedback))
        .route("/screens/{id}/thumb", get(thumb))
        .route("/screens/{id}/full", get(full))
        .with_state(state)
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(ErrorCode::MalformedBody, e.body_text()))
}

/// Runs `f` on the session off the async workers, serialized per session.
/// A repeated nonce replays the first reply without running `f` again.
async fn with_session<F>(state: AppState, id: String, nonce: Option<String>, f: F) -> Response
where
    F: FnOnce(&Inner, &mut Session) -> Result<Value, ApiError> + Send + 'static,
{
    let task = tokio::task::spawn_blocking(move || {
        let Some(session) = state.0.sessions.get(&id) else {
            return ApiError::new(ErrorCode::UnknownSession, format!("no live session `{id}`"))
                .into_response();
        };
        let mut session = session.lock();
        if let Some(reply) = nonce.as_deref().and_then(|n| session.cached_reply(n)) {
            return reply.into_response();
        }
        let reply = match f(&state.0, &mut session) {
            Ok(body) => Reply {
                status: StatusCode::OK,
                body,
            },
            Err(e) => Reply {
                status: e.code.status(),
                body: e.body(),
            },
        };
        if let Some(n) = nonce {
            session.remember(n, reply.clone());
        }
        reply.into_response()
    });
    task.await.unwrap_or_else(|e| {
        ApiError::new(ErrorCode::Internal, format!("request task failed: {e}")).into_response()
    })
}

fn prediction_json(p: &Option<ElementPrediction>) -> Value {
    match p {
        Some(p) => json!(p.entries),
        None => Value::Null,
    }
}

fn sketch_json(session: &Session) -> Value {
    json!({
        "top3": prediction_json(&session.prediction),
        "strokes": session.canvas.current().len(),
        "can_undo": !session.canvas.current().is_empty(),
        "can_redo": session.canvas.redo_depth() > 0,
    })
}

fn elements_json(canvas: &CanvasState) -> Value {
    SessionSnapshot::from_canvas(canvas, None)
        .elements
        .iter()
        .map(|e| json!({ "category": e.category, "bbox": e.bbox }))
        .collect()
}

fn page_json(inner: &Inner, ranking: &Ranking, page: usize) -> Value {
    let p = ranking.page(&inner.index, page);
    let results: Vec<Value> = p
        .results
        .iter()
        .map(|hit| {
            json!({
                "id": hit.id,
                "score": hit.score,
                "thumb": format!("/screens/{}/thumb", hit.id),
                "full": format!("/screens/{}/full", hit.id),
            })
        })
        .collect();
    json!({ "page": p.page, "total": p.total, "results": results })
}

fn empty_page() -> Value {
    json!({ "page": 0, "total": 0, "results": [] })
}

fn reclassify(inner: &Inner, session: &mut Session) -> Result<(), ApiError> {
    session.prediction = if session.canvas.current().is_empty() {
        None
    } else {
        Some(inner.recognizer.classify(session.canvas.current())?)
    };
    Ok(())
}

/// Searches with every committed element and caches the ranking.
fn research(inner: &Inner, session: &mut Session) -> Result<Value, ApiError> {
    if session.canvas.committed().is_empty() {
        session.ranking = None;
        return Ok(json!({ "query": [], "search": empty_page() }));
    }
    let query = session.canvas.build_query()?;
    let ranking = inner.engine.rank(&query, &inner.index);
    let page = page_json(inner, &ranking, 0);
    session.ranking = Some(ranking);
    let query: Vec<Value> = query
        .elements
        .iter()
        .map(|e| {
            json!({
                "category": e.query_category(),
                "bbox": [e.bbox.cx, e.bbox.cy, e.bbox.w, e.bbox.h],
            })
        })
        .collect();
    Ok(json!({ "query": query, "search": page }))
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "screens": state.0.index.len(),
        "sessions": state.0.sessions.len(),
    }))
}

async fn categories() -> Json<Value> {
    let all: Vec<Value> = Category::ALL
        .iter()
        .map(|c| json!({ "name": c.name(), "source": format!("{:?}", c.source()) }))
        .collect();
    Json(json!({ "primitives": all, "compounds": [{ "name": "text_button", "drawn_as": ["squiggle", "square"] }] }))
}

async fn create_session(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "session_id": state.0.sessions.create() }))
}

#[derive(Deserialize)]
struct SessionRequest {
    session_id: String,
    #[serde(default)]
    nonce: Option<String>,
}

#[derive(Deserialize)]
struct StrokeRequest {
    session_id: String,
    points: Vec<[f64; 2]>,
    #[serde(default)]
    nonce: Option<String>,
}

async fn add_stroke(
    State(state): State<AppState>,
    payload: Result<Json<StrokeRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    with_session(state, req.session_id, req.nonce, move |inner, session| {
        if req.points.is_empty() {
            return Err(ApiError::new(ErrorCode::EmptyStroke, "a stroke needs at least one point"));
        }
        if req.points.len() > MAX_STROKE_POINTS {
            return Err(ApiError::new(
                ErrorCode::InvalidPoint,
                format!("a stroke may hold at most {MAX_STROKE_POINTS} points"),
            ));
        }
        let points = req.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let stroke = Stroke::new(points).map_err(|e| ApiError::new(ErrorCode::InvalidPoint, e.to_string()))?;
        session.canvas.add_stroke(stroke);
        reclassify(inner, session)?;
        Ok(sketch_json(session))
    })
    .await
}

async fn undo_stroke(
    State(state): State<AppState>,
    payload: Result<Json<SessionRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    with_session(state, req.session_id, req.nonce, |inner, session| {
        let edit = session.canvas.undo_stroke();
        if !edit.is_noop() {
            reclassify(inner, session)?;
        }
        let mut out = sketch_json(session);
        out["noop"] = json!(edit.is_noop());
        Ok(out)
    })
    .await
}

async fn redo_stroke(
    State(state): State<AppState>,
    payload: Result<Json<SessionRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    with_session(state, req.session_id, req.nonce, |inner, session| {
        let edit = session.canvas.redo_stroke();
        if !edit.is_noop() {
            reclassify(inner, session)?;
        }
        let mut out = sketch_json(session);
        out["noop"] = json!(edit.is_noop());
        Ok(out)
    })
    .await
}

#[derive(Deserialize)]
struct DoneRequest {
    session_id: String,
    #[serde(default)]
    chosen: Option<String>,
    #[serde(default)]
    nonce: Option<String>,
}

async fn element_done(
    State(state): State<AppState>,
    payload: Result<Json<DoneRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    with_session(state, req.session_id, req.nonce, move |inner, session| {
        if session.canvas.current().is_empty() {
            return Err(ApiError::new(ErrorCode::EmptySketch, "no strokes to commit"));
        }
        // Recompute so the choice is checked against the sketch as it is now.
        reclassify(inner, session)?;
        let prediction = session.prediction.clone().expect("sketch is nonempty");
        let category = match req.chosen {
            None => prediction.best(),
            Some(name) => {
                let c: Category = name
                    .parse()
                    .map_err(|_| ApiError::new(ErrorCode::InvalidChoice, format!("unknown category `{name}`")))?;
                if !prediction.contains(c) {
                    return Err(ApiError::new(
                        ErrorCode::InvalidChoice,
                        format!("`{c}` is not among the current top three"),
                    ));
                }
                c
            }
        };
        session.canvas.commit_element(category)?;
        session.prediction = None;
        let mut out = research(inner, session)?;
        out["committed"] = json!(category);
        out["elements"] = elements_json(&session.canvas);
        Ok(out)
    })
    .await
}

async fn remove_last(
    State(state): State<AppState>,
    payload: Result<Json<SessionRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    with_session(state, req.session_id, req.nonce, |inner, session| {
        let edit = session.canvas.remove_last_icon();
        let mut out = if edit.is_noop() {
            json!({
                "query": [],
                "search": session.ranking.as_ref().map_or_else(empty_page, |r| page_json(inner, r, 0)),
            })
        } else {
            research(inner, session)?
        };
        out["noop"] = json!(edit.is_noop());
        out["elements"] = elements_json(&session.canvas);
        Ok(out)
    })
    .await
}

#[derive(Deserialize)]
struct ResultsQuery {
    session_id: String,
    #[serde(default)]
    page: usize,
}

async fn results(
    State(state): State<AppState>,
    params: Result<Query<ResultsQuery>, QueryRejection>,
) -> Response {
    let q = match params {
        Ok(Query(q)) => q,
        Err(e) => return ApiError::new(ErrorCode::MalformedQuery, e.body_text()).into_response(),
    };
    with_session(state, q.session_id, None, move |inner, session| {
        let ranking = session
            .ranking
            .as_ref()
            .ok_or_else(|| ApiError::new(ErrorCode::NoSearch, "no search has run in this session"))?;
        Ok(page_json(inner, ranking, q.page))
    })
    .await
}

#[derive(Deserialize)]
struct FeedbackRequest {
    session_id: String,
    vote: String,
    #[serde(default)]
    screen_id: Option<String>,
    #[serde(default)]
    nonce: Option<String>,
}

async fn feedback(
    State(state): State<AppState>,
    payload: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Response {
    let req = match body(payload) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let id = req.session_id.clone();
    with_session(state, req.session_id, req.nonce, move |inner, session| {
        let vote: Vote = req
            .vote
            .parse()
            .map_err(|_| ApiError::new(ErrorCode::InvalidVote, format!("vote must be `up` or `down`, got `{}`", req.vote)))?;
        let record = FeedbackRecord {
            session_id: id,
            timestamp_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis() as u64),
            vote,
            screen_id: req.screen_id,
            query: SessionSnapshot::from_canvas(&session.canvas, None),
        };
        inner
            .feedback
            .append(&record)
            .map_err(|e| ApiError::new(ErrorCode::Internal, format!("feedback log: {e}")))?;
        Ok(json!({ "ok": true }))
    })
    .await
}

fn image(state: &AppState, id: &str, res: Resolution, headers: &HeaderMap) -> Response {
    if state.0.index.position(id).is_none() {
        return ApiError::new(ErrorCode::UnknownScreen, format!("no screen `{id}` in the corpus")).into_response();
    }
    match state.0.images.load(id, res) {
        Ok(img) => {
            let cache = (header::CACHE_CONTROL, "public, max-age=86400");
            let matches = headers
                .get(header::IF_NONE_MATCH)
                .and_then(|v| v.to_str().ok())
                .is_some_and(|v| v == img.etag);
            if matches {
                return (StatusCode::NOT_MODIFIED, [cache, (header::ETAG, img.etag.as_str())]).into_response();
            }
            (
                [
                    (header::CONTENT_TYPE, img.content_type),
                    cache,
                    (header::ETAG, img.etag.as_str()),
                ],
                img.bytes,
            )
                .into_response()
        }
        Err(e) => e.into_response(),
    }
}

async fn thumb(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    image(&state, &id, Resolution::Thumb, &headers)
}

async fn full(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    image(&state, &id, Resolution::Full, &headers)
}
