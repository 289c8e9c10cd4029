use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sketchsearch::classifier::TemplateRecognizer;
use sketchsearch::corpus::{ingest, CategoryMapping, CorpusIndex};
use sketchsearch::geometry::BBox;
use sketchsearch::query::{QueryElement, SearchQuery, CANVAS_HEIGHT, CANVAS_WIDTH};
use sketchsearch::search::{screen_score, MetricWeights};
use sketchsearch::shapes::generate;
use sketchsearch::{synth, Category};
use sketchsearch_server::{router, AppState, ServiceConfig};
use tower::ServiceExt;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sample_corpus")
}

struct Harness {
    app: Router,
    log: PathBuf,
    _tmp: tempfile::TempDir,
}

fn harness_with(index: CorpusIndex, ttl: Duration) -> Harness {
    let tmp = tempfile::tempdir().unwrap();
    let log = tmp.path().join("feedback.jsonl");
    let config = ServiceConfig {
        session_ttl: ttl,
        screens_dir: Some(fixture_dir()),
        feedback_log: log.clone(),
        weights: MetricWeights::default(),
    };
    let state = AppState::new(Arc::new(index), Arc::new(TemplateRecognizer::shipped()), config).unwrap();
    Harness {
        app: router(state),
        log,
        _tmp: tmp,
    }
}

fn sample_index() -> CorpusIndex {
    ingest(fixture_dir(), &CategoryMapping::default()).unwrap()
}

fn harness() -> Harness {
    harness_with(sample_index(), Duration::from_secs(3600))
}

impl Harness {
    async fn raw(&self, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, headers, bytes)
    }

    async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        let req = Request::post(path)
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let (status, _, bytes) = self.raw(req).await;
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn get(&self, path: &str) -> (StatusCode, Value) {
        let (status, _, bytes) = self.raw(Request::get(path).body(Body::empty()).unwrap()).await;
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn session(&self) -> String {
        let (status, body) = self.post("/api/session", json!({})).await;
        assert_eq!(status, StatusCode::OK);
        body["session_id"].as_str().unwrap().to_string()
    }

    async fn stroke(&self, sid: &str, points: &[[f64; 2]]) -> (StatusCode, Value) {
        self.post("/api/stroke", json!({ "session_id": sid, "points": points })).await
    }

    /// Draws a generated doodle of `c` stretched over `bbox` (canvas units),
    /// then commits it as `c`. Doodles the recognizer does not place in its
    /// top three are undone and redrawn from the next seed.
    async fn draw_element(&self, sid: &str, c: Category, bbox: BBox, seed: u64) -> Value {
        for attempt in 0..32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + attempt);
            let sketch = generate(c, &mut rng);
            let b = sketch.bounds().unwrap();
            let mut last = Value::Null;
            for s in sketch.strokes() {
                let pts: Vec<[f64; 2]> = s
                    .points()
                    .iter()
                    .map(|p| {
                        let u = if b.width() > 0.0 { (p.x - b.min.x) / b.width() } else { 0.5 };
                        let v = if b.height() > 0.0 { (p.y - b.min.y) / b.height() } else { 0.5 };
                        [bbox.left() + u * bbox.w, bbox.top() + v * bbox.h]
                    })
                    .collect();
                let (status, body) = self.stroke(sid, &pts).await;
                assert_eq!(status, StatusCode::OK);
                last = body;
            }
            let listed = last["top3"]
                .as_array()
                .unwrap()
                .iter()
                .any(|e| e["category"] == c.name());
            if !listed {
                for _ in sketch.strokes() {
                    self.post("/api/stroke/undo", json!({ "session_id": sid })).await;
                }
                continue;
            }
            let (status, body) = self
                .post("/api/element/done", json!({ "session_id": sid, "chosen": c.name() }))
                .await;
            assert_eq!(status, StatusCode::OK, "{body}");
            return body;
        }
        panic!("no drawable {c} doodle for {bbox:?}");
    }
}

fn error_code(body: &Value) -> &str {
    body["error"]["code"].as_str().unwrap()
}

fn square_stroke() -> Vec<[f64; 2]> {
    vec![[100.0, 100.0], [300.0, 100.0], [300.0, 300.0], [100.0, 300.0], [100.0, 100.0]]
}

fn ids(search: &Value) -> Vec<String> {
    search["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect()
}

/// Full brute-force ranking of a normalized query over an index.
fn brute_ranking(index: &CorpusIndex, query: &SearchQuery) -> Vec<String> {
    let mut scored: Vec<(f64, &str)> = index
        .screens()
        .iter()
        .map(|s| (screen_score(query, s, index.idf_table(), &MetricWeights::default()), s.id.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    scored.into_iter().map(|(_, id)| id.to_string()).collect()
}

#[tokio::test]
async fn sessions_are_distinct_and_empty() {
    let h = harness();
    let a = h.session().await;
    let b = h.session().await;
    assert_ne!(a, b);
    let (status, body) = h.post("/api/element/remove-last", json!({ "session_id": a })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["noop"], json!(true));
    assert_eq!(body["elements"], json!([]));
}

#[tokio::test]
async fn stroke_validation() {
    let h = harness();
    let sid = h.session().await;
    let (status, body) = h.stroke("no-such-session", &square_stroke()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "unknown_session");

    let (status, body) = h.stroke(&sid, &[]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "empty_stroke");

    let (status, body) = h.post("/api/stroke", json!({ "session_id": sid, "points": "zigzag" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "malformed_body");

    let req = Request::post("/api/stroke")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let (status, _, bytes) = h.raw(req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(error_code(&body), "malformed_body");
}

#[tokio::test]
async fn square_stroke_predicts_square() {
    let h = harness();
    let sid = h.session().await;
    let (status, body) = h.stroke(&sid, &square_stroke()).await;
    assert_eq!(status, StatusCode::OK);
    let top3 = body["top3"].as_array().unwrap();
    assert_eq!(top3.len(), 3);
    assert!(top3.iter().any(|e| e["category"] == "square"), "{body}");
    let conf: Vec<f64> = top3.iter().map(|e| e["confidence"].as_f64().unwrap()).collect();
    assert!(conf.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(body["strokes"], 1);
    assert_eq!(body["can_undo"], true);
    assert_eq!(body["can_redo"], false);
}

#[tokio::test]
async fn undo_redo_noop_flags() {
    let h = harness();
    let sid = h.session().await;
    let (_, body) = h.post("/api/stroke/undo", json!({ "session_id": sid })).await;
    assert_eq!(body["noop"], true);
    assert_eq!(body["top3"], Value::Null);

    h.stroke(&sid, &square_stroke()).await;
    let (_, body) = h.post("/api/stroke/undo", json!({ "session_id": sid })).await;
    assert_eq!(body["noop"], false);
    assert_eq!(body["can_redo"], true);
    let (_, body) = h.post("/api/stroke/redo", json!({ "session_id": sid })).await;
    assert_eq!(body["noop"], false);
    assert_eq!(body["strokes"], 1);

    h.post("/api/stroke/undo", json!({ "session_id": sid })).await;
    h.stroke(&sid, &[[10.0, 10.0], [40.0, 12.0]]).await;
    let (_, body) = h.post("/api/stroke/redo", json!({ "session_id": sid })).await;
    assert_eq!(body["noop"], true);
    assert_eq!(body["can_redo"], false);
}

#[tokio::test]
async fn done_requires_strokes_and_defaults_to_best() {
    let h = harness();
    let sid = h.session().await;
    let (status, body) = h.post("/api/element/done", json!({ "session_id": sid })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(error_code(&body), "empty_sketch");

    let (_, stroke) = h.stroke(&sid, &square_stroke()).await;
    let best = stroke["top3"][0]["category"].clone();
    let (status, body) = h.post("/api/element/done", json!({ "session_id": sid })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["committed"], best);
    assert_eq!(body["search"]["total"], 10);
    assert!(body["search"]["results"].as_array().unwrap().len() <= 80);
    let first = &body["search"]["results"][0];
    let id = first["id"].as_str().unwrap();
    assert_eq!(first["thumb"], format!("/screens/{id}/thumb"));
}

#[tokio::test]
async fn chosen_must_be_in_top3() {
    let h = harness();
    let sid = h.session().await;
    let (_, stroke) = h.stroke(&sid, &square_stroke()).await;
    let top: Vec<&str> = stroke["top3"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["category"].as_str().unwrap())
        .collect();
    let outside = Category::ALL.iter().find(|c| !top.contains(&c.name())).unwrap();
    let (status, body) = h
        .post("/api/element/done", json!({ "session_id": sid, "chosen": outside.name() }))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "invalid_choice");
    let (status, body) = h
        .post("/api/element/done", json!({ "session_id": sid, "chosen": top[2] }))
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["committed"], top[2]);
}

#[tokio::test]
async fn planted_screen_ranks_first() {
    // Screen 1010: a title, two sliders, a switch, a card and a caption.
    let h = harness();
    let sid = h.session().await;
    let px = |x1: f64, y1: f64, x2: f64, y2: f64| {
        let (sx, sy) = (CANVAS_WIDTH / 1440.0, CANVAS_HEIGHT / 2560.0);
        BBox::from_corners(x1 * sx, y1 * sy, x2 * sx, y2 * sy)
    };
    let elements = [
        (Category::Slider, px(160.0, 700.0, 1280.0, 780.0)),
        (Category::Slider, px(160.0, 960.0, 1280.0, 1040.0)),
        (Category::Switch, px(1100.0, 1180.0, 1320.0, 1270.0)),
        (Category::Square, px(100.0, 1500.0, 1340.0, 2100.0)),
        (Category::Squiggle, px(120.0, 260.0, 900.0, 340.0)),
        (Category::Squiggle, px(200.0, 2240.0, 1000.0, 2320.0)),
    ];
    let mut last = Value::Null;
    for (i, (c, b)) in elements.iter().enumerate() {
        last = h.draw_element(&sid, *c, *b, i as u64).await;
    }
    assert_eq!(ids(&last["search"])[0], "1010");
    assert!((last["search"]["results"][0]["score"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(last["elements"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn remove_last_rescores() {
    let h = harness();
    let index = sample_index();
    let sid = h.session().await;
    let b1 = BBox::new(225.0, 250.0, 350.0, 20.0);
    let b2 = BBox::new(380.0, 420.0, 60.0, 25.0);
    h.draw_element(&sid, Category::Slider, b1, 1).await;
    h.draw_element(&sid, Category::Switch, b2, 2).await;
    let (status, body) = h.post("/api/element/remove-last", json!({ "session_id": sid })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["noop"], false);
    assert_eq!(body["elements"].as_array().unwrap().len(), 1);

    // The committed box is the tight bounds of the drawn strokes.
    let e = &body["elements"][0]["bbox"];
    let committed = BBox::new(
        e[0].as_f64().unwrap(),
        e[1].as_f64().unwrap(),
        e[2].as_f64().unwrap(),
        e[3].as_f64().unwrap(),
    );
    let query = SearchQuery::new(vec![QueryElement::new(
        Category::Slider,
        committed.normalized(CANVAS_WIDTH, CANVAS_HEIGHT),
    )])
    .unwrap();
    assert_eq!(ids(&body["search"]), brute_ranking(&index, &query));

    let (_, body) = h.post("/api/element/remove-last", json!({ "session_id": sid })).await;
    assert_eq!(body["noop"], false);
    assert_eq!(body["search"]["total"], 0);
    let (status, body) = h.get(&format!("/api/results?session_id={sid}")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(error_code(&body), "no_search");
}

#[tokio::test]
async fn results_pages_are_cached_slices() {
    let mapping = CategoryMapping::default();
    let index = CorpusIndex::build(synth::corpus(200, 5), &mapping).unwrap();
    let h = harness_with(index, Duration::from_secs(3600));
    let sid = h.session().await;

    let (status, body) = h.get(&format!("/api/results?session_id={sid}&page=0")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(error_code(&body), "no_search");

    let done = h.draw_element(&sid, Category::Squiggle, BBox::new(200.0, 100.0, 200.0, 20.0), 3).await;
    let (_, p0) = h.get(&format!("/api/results?session_id={sid}&page=0")).await;
    assert_eq!(p0, done["search"]);
    let (_, p1) = h.get(&format!("/api/results?session_id={sid}&page=1")).await;
    let (_, p2) = h.get(&format!("/api/results?session_id={sid}&page=2")).await;
    let (_, past) = h.get(&format!("/api/results?session_id={sid}&page=9")).await;
    assert_eq!(ids(&p0).len(), 80);
    assert_eq!(ids(&p1).len(), 80);
    assert_eq!(ids(&p2).len(), 40);
    assert_eq!(past["results"], json!([]));
    assert_eq!(past["total"], 200);
    let (_, again) = h.get(&format!("/api/results?session_id={sid}&page=1")).await;
    assert_eq!(again, p1);
    // Pages concatenate to a score-descending ranking.
    let scores: Vec<f64> = [&p0, &p1, &p2]
        .iter()
        .flat_map(|p| p["results"].as_array().unwrap().iter().map(|r| r["score"].as_f64().unwrap()))
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let (status, body) = h.get("/api/results?page=x").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "malformed_query");
}

#[tokio::test]
async fn screen_images() {
    let h = harness();
    let get = |path: &str| Request::get(path).body(Body::empty()).unwrap();
    let (s1, headers, thumb) = h.raw(get("/screens/1010/thumb")).await;
    let (s2, _, full) = h.raw(get("/screens/1010/full")).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(headers[header::CONTENT_TYPE], "image/png");
    assert!(headers[header::CACHE_CONTROL].to_str().unwrap().contains("max-age"));
    assert_ne!(thumb.len(), full.len());
    assert!(full.len() > thumb.len());
    let (_, _, again) = h.raw(get("/screens/1010/thumb")).await;
    assert_eq!(again, thumb);

    let etag = headers[header::ETAG].clone();
    let req = Request::get("/screens/1010/thumb")
        .header(header::IF_NONE_MATCH, etag)
        .body(Body::empty())
        .unwrap();
    let (status, _, _) = h.raw(req).await;
    assert_eq!(status, StatusCode::NOT_MODIFIED);

    let (status, body) = h.get("/screens/9999/thumb").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "unknown_screen");
}

#[tokio::test]
async fn feedback_appends_one_line_per_vote() {
    let h = harness();
    let sid = h.session().await;
    let lines = |p: &Path| std::fs::read_to_string(p).map_or(0, |s| s.lines().count());
    let (status, body) = h
        .post("/api/feedback", json!({ "session_id": sid, "vote": "up", "screen_id": "1010" }))
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["ok"], true);
    assert_eq!(lines(&h.log), 1);
    h.post("/api/feedback", json!({ "session_id": sid, "vote": "down" })).await;
    assert_eq!(lines(&h.log), 2);

    let (status, body) = h.post("/api/feedback", json!({ "session_id": sid, "vote": "sideways" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "invalid_vote");
    assert_eq!(lines(&h.log), 2);

    let first: Value = serde_json::from_str(std::fs::read_to_string(&h.log).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["vote"], "up");
    assert_eq!(first["session_id"], sid.as_str());
    assert_eq!(first["screen_id"], "1010");
}

#[tokio::test]
async fn repeated_nonce_replays_reply() {
    let h = harness();
    let sid = h.session().await;
    let body = json!({ "session_id": sid, "points": square_stroke(), "nonce": "n-1" });
    let (_, first) = h.post("/api/stroke", body.clone()).await;
    let (_, second) = h.post("/api/stroke", body).await;
    assert_eq!(first, second);
    assert_eq!(second["strokes"], 1);
    let (_, third) = h
        .post("/api/stroke", json!({ "session_id": sid, "points": square_stroke(), "nonce": "n-2" }))
        .await;
    assert_eq!(third["strokes"], 2);

    let undo = json!({ "session_id": sid, "nonce": "u-1" });
    h.post("/api/stroke/undo", undo.clone()).await;
    let (_, replay) = h.post("/api/stroke/undo", undo).await;
    assert_eq!(replay["strokes"], 1);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let h = harness_with(sample_index(), Duration::from_millis(50));
    let sid = h.session().await;
    assert_eq!(h.stroke(&sid, &square_stroke()).await.0, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(120)).await;
    let (status, body) = h.stroke(&sid, &square_stroke()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "unknown_session");
}

#[tokio::test]
async fn interleaved_sessions_match_serial() {
    let script = [
        ("/api/stroke", Some(square_stroke())),
        ("/api/stroke", Some(vec![[50.0, 600.0], [400.0, 610.0]])),
        ("/api/stroke/undo", None),
        ("/api/element/done", None),
        ("/api/stroke", Some(vec![[50.0, 600.0], [400.0, 610.0]])),
        ("/api/element/done", None),
        ("/api/element/remove-last", None),
    ];
    let step = |sid: &str, i: usize| {
        let (path, pts) = &script[i];
        let mut body = json!({ "session_id": sid });
        if let Some(p) = pts {
            body["points"] = json!(p);
        }
        (path.to_string(), body)
    };

    let serial = harness();
    let mut expected = Vec::new();
    let s = serial.session().await;
    for i in 0..script.len() {
        let (path, body) = step(&s, i);
        expected.push(serial.post(&path, body).await);
    }

    let h = harness();
    let a = h.session().await;
    let b = h.session().await;
    let (mut got_a, mut got_b) = (Vec::new(), Vec::new());
    for i in 0..script.len() {
        let (pa, ba) = step(&a, i);
        let (pb, bb) = step(&b, i);
        let (ra, rb) = tokio::join!(h.post(&pa, ba), h.post(&pb, bb));
        got_a.push(ra);
        got_b.push(rb);
    }
    assert_eq!(got_a, expected);
    assert_eq!(got_b, expected);
}

#[tokio::test]
async fn categories_and_health() {
    let h = harness();
    let (_, body) = h.get("/api/categories").await;
    assert_eq!(body["primitives"].as_array().unwrap().len(), 23);
    let (status, body) = h.get("/api/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["screens"], 10);
}
