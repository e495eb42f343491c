mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use contourbench_gateway::server::{router, AppState, ServiceConfig, SessionCreated, SubmitResponse};
use contourbench_gateway::submissions;
use futures::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

fn setup() -> (tempfile::TempDir, ServiceConfig, Arc<AppState>) {
    let dir = tempfile::tempdir().unwrap();
    common::write_dataset(dir.path());
    let cfg = ServiceConfig {
        dataset_root: dir.path().to_owned(),
        listen: "127.0.0.1:0".parse().unwrap(),
        params: common::test_params(),
        cutoff: 0.5,
    };
    let state = Arc::new(AppState::new(&cfg).unwrap());
    (dir, cfg, state)
}

async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(state, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn open_session(state: &Arc<AppState>) -> SessionCreated {
    let (status, body) = call_json(state, "POST", "/session", Some(json!({"image_id": "sq"}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    serde_json::from_value(body).unwrap()
}

fn square_payload() -> Value {
    let points: Vec<[f64; 2]> = common::square_points().iter().map(|p| [p.x, p.y]).collect();
    json!({"type": "stroke_points", "points": points, "end_stroke": true})
}

#[tokio::test]
async fn health_and_images() {
    let (_dir, _cfg, st) = setup();
    let (status, body) = call_json(&st, "GET", "/healthz", None).await;
    assert_eq!((status, body["status"].as_str()), (StatusCode::OK, Some("ok")));
    let (_, next) = call_json(&st, "GET", "/images/next", None).await;
    assert_eq!(next["image_id"], "sq");
    assert_eq!(next["image_url"], "/images/sq");
    let (status, png) = call(&st, "GET", "/images/sq", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(png.starts_with(b"\x89PNG"));
    assert_eq!(call(&st, "GET", "/images/nope", None).await.0, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&st, "POST", "/session", Some(json!({"image_id": "nope"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn perfect_trace_over_http_is_accepted_and_logged() {
    let (_dir, cfg, st) = setup();
    let s = open_session(&st).await;
    assert_eq!((s.width, s.height), (common::W, common::H));
    let (status, score) = call_json(&st, "POST", &format!("/session/{}/stroke", s.session_id), Some(square_payload())).await;
    assert_eq!(status, StatusCode::OK, "{score}");
    assert_eq!(score["type"], "score");
    assert_eq!(score["score"], 20.0);
    let (status, body) = call_json(&st, "POST", &format!("/session/{}/submit", s.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
    let verdict: SubmitResponse = serde_json::from_value(body.clone()).unwrap();
    assert_eq!(body["status"], "accepted");
    assert_eq!(verdict.score_fraction, 1.0);

    let (status, _) = call_json(&st, "POST", &format!("/session/{}/submit", s.session_id), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let loaded = submissions::load(&cfg.submissions_dir().join(submissions::LOG_FILE)).unwrap();
    assert_eq!(loaded.records.len(), 1);
    let rec = &loaded.records[0];
    assert_eq!(rec.session_id, s.session_id);
    assert_eq!(rec.drawing.strokes()[0].points(), common::square_points().as_slice());
}

#[tokio::test]
async fn empty_submission_is_rejected() {
    let (_dir, _cfg, st) = setup();
    let s = open_session(&st).await;
    let (_, body) = call_json(&st, "POST", &format!("/session/{}/submit", s.session_id), None).await;
    assert_eq!(body["status"], "rejected");
    assert_eq!(body["score_fraction"], 0.0);
}

fn assert_no_coordinates(v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                for banned in ["point", "reward_points", "penalty_points", "x", "y", "index"] {
                    assert_ne!(k, banned, "field {k} leaked");
                }
                assert_no_coordinates(child);
            }
        }
        Value::Array(items) => {
            // coordinates would show up as [x, y] pairs
            assert!(!(items.len() == 2 && items.iter().all(Value::is_number)), "pair {v} leaked");
            items.iter().for_each(assert_no_coordinates);
        }
        _ => {}
    }
}

#[tokio::test]
async fn session_snapshot_is_redacted() {
    let (_dir, _cfg, st) = setup();
    let s = open_session(&st).await;
    let (_, score) = call_json(&st, "POST", &format!("/session/{}/stroke", s.session_id), Some(square_payload())).await;
    assert_no_coordinates(&score);
    let (status, view) = call_json(&st, "GET", &format!("/session/{}", s.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["collected"], 20);
    assert_eq!(view["reward_count"], 20);
    assert!(!view["recent_events"].as_array().unwrap().is_empty());
    assert_no_coordinates(&view);
    let expected: Vec<&str> = vec![
        "collected", "height", "image_id", "recent_events", "reward_count", "score", "session_id", "status", "triggered",
        "width",
    ];
    let mut keys: Vec<&str> = view.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, expected);
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let (_dir, _cfg, st) = setup();
    let a = open_session(&st).await;
    let b = open_session(&st).await;
    assert_ne!(a.session_id, b.session_id);
    let half: Vec<[f64; 2]> = vec![[20.0, 20.0], [100.0, 20.0]];
    let (ua, ub) = (format!("/session/{}/stroke", a.session_id), format!("/session/{}/stroke", b.session_id));
    let (ra, rb) = tokio::join!(
        call_json(&st, "POST", &ua, Some(square_payload())),
        call_json(&st, "POST", &ub, Some(json!({"type": "stroke_points", "points": half}))),
    );
    assert_eq!(ra.1["score"], 20.0);
    let b_score = rb.1["score"].as_f64().unwrap();
    assert!(b_score < 20.0);
    let (_, va) = call_json(&st, "GET", &format!("/session/{}", a.session_id), None).await;
    let (_, vb) = call_json(&st, "GET", &format!("/session/{}", b.session_id), None).await;
    assert_eq!(va["score"], 20.0);
    assert_eq!(vb["score"].as_f64().unwrap(), b_score);
}

#[tokio::test]
async fn bad_stroke_requests() {
    let (_dir, _cfg, st) = setup();
    let s = open_session(&st).await;
    let uri = format!("/session/{}/stroke", s.session_id);
    let (status, body) = call_json(&st, "POST", &uri, Some(json!({"type": "stroke_points", "points": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    assert_eq!(call(&st, "POST", "/session/none/stroke", Some(square_payload())).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&st, "GET", "/session/none", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn websocket_round_trip() {
    let (_dir, cfg, st) = setup();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(st.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let s = open_session(&st).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/session/{}/stream", s.session_id))
        .await
        .unwrap();

    // the square in small batches, as a client would stream it
    let pts = common::square_points();
    let mut total = 0.0;
    for chunk in pts.chunks(2) {
        let batch: Vec<[f64; 2]> = chunk.iter().map(|p| [p.x, p.y]).collect();
        ws.send(Message::text(json!({"type": "stroke_points", "points": batch}).to_string())).await.unwrap();
        let reply: Value = serde_json::from_str(ws.next().await.unwrap().unwrap().to_text().unwrap()).unwrap();
        assert_eq!(reply["type"], "score");
        assert_no_coordinates(&reply);
        total += reply["delta"].as_f64().unwrap();
    }
    ws.send(Message::text(json!({"type": "stroke_end"}).to_string())).await.unwrap();
    let reply: Value = serde_json::from_str(ws.next().await.unwrap().unwrap().to_text().unwrap()).unwrap();
    assert_eq!(reply["score"], 20.0);
    assert_eq!(total, 20.0);

    ws.send(Message::text("not json")).await.unwrap();
    let reply: Value = serde_json::from_str(ws.next().await.unwrap().unwrap().to_text().unwrap()).unwrap();
    assert_eq!(reply["type"], "error");
    ws.close(None).await.unwrap();

    let (_, body) = call_json(&st, "POST", &format!("/session/{}/submit", s.session_id), None).await;
    assert_eq!(body["status"], "accepted");
    let loaded = submissions::load(&cfg.submissions_dir().join(submissions::LOG_FILE)).unwrap();
    assert_eq!(loaded.records.len(), 1);
}

#[test]
fn missing_dataset_is_an_error() {
    let cfg = ServiceConfig {
        dataset_root: "/nonexistent/contourbench".into(),
        listen: "127.0.0.1:0".parse().unwrap(),
        params: common::test_params(),
        cutoff: 0.5,
    };
    assert!(AppState::new(&cfg).is_err());
    let dir = tempfile::tempdir().unwrap();
    common::write_dataset(dir.path());
    let bad_cutoff = ServiceConfig { dataset_root: dir.path().to_owned(), cutoff: 0.0, ..cfg };
    assert!(AppState::new(&bad_cutoff).is_err());
}
