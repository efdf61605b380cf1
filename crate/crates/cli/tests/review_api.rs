use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use lectalign::corpus::{AlignmentResult, ChunkAlignment, Document, DocumentPair, IndexRange, Language, Method};
use lectalign::dataset::{JudgmentLog, ReviewSession, SplitSpec};
use lectalign_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn results(sizes: &[usize]) -> Vec<(DocumentPair, AlignmentResult)> {
    sizes
        .iter()
        .enumerate()
        .map(|(d, &n)| {
            let lecture = format!("l{d}");
            let src = Document::new("c", &lecture, Language::En, (0..n).map(|i| format!("s{d} {i}.")));
            let tgt = Document::new("c", &lecture, Language::Ja, (0..n).map(|i| format!("t{d}{i}。")));
            let pair = DocumentPair::new(src, tgt).unwrap();
            let score = 0.9 - d as f64 * 0.1;
            let a = (0..n)
                .map(|i| ChunkAlignment::new(IndexRange::single(i), IndexRange::single(i), score))
                .collect();
            let r = AlignmentResult::new(pair.pair_id.clone(), Method::Dp, a);
            (pair, r)
        })
        .collect()
}

const SPEC: SplitSpec = SplitSpec {
    test_volume: 2,
    dev_volume: 2,
    ratio: 0.5,
};

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(body: impl Into<String>) -> Request<Body> {
    Request::post("/api/judgment")
        .header("content-type", "application/json")
        .body(Body::from(body.into()))
        .unwrap()
}

fn judgment(pair: &str, index: usize, verdict: &str) -> String {
    json!({"pair_id": pair, "alignment_index": index, "verdict": verdict}).to_string()
}

#[tokio::test]
async fn session_next_and_judgment_flow() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("j.jsonl");
    let r = results(&[2, 2, 2]);
    let state = AppState::new(ReviewSession::with_log(&r, SPEC, &log).unwrap(), "tester");
    let app = router(state.clone(), None);

    let (status, body) = call(&app, get("/api/session")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["queue_size"], 3);
    assert_eq!(body["spec"]["test_volume"], 2);

    let (_, next) = call(&app, get("/api/next")).await;
    assert_eq!(next["pair_id"], "c/l0/en-ja");
    assert_eq!(next["alignment_index"], 0);
    assert_eq!(next["src_text"], "s0 0.");
    assert_eq!(next["doc_progress"]["total"], 2);

    let (status, out) = call(&app, post(judgment("c/l0/en-ja", 0, "good"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(out["progress"]["judgments"], 1);
    assert!(out["document_verdict"].is_null());
    assert_eq!(JudgmentLog::read(&log).unwrap().len(), 1);
    assert_eq!(JudgmentLog::read(&log).unwrap()[0].judge, "tester");

    let (_, out) = call(&app, post(judgment("c/l0/en-ja", 1, "good"))).await;
    assert_eq!(out["document_verdict"], "accepted");
    assert_eq!(out["progress"]["test_pool"], 2);

    let (status, _) = call(&app, post(judgment("c/l0/en-ja", 0, "bad"))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, post(judgment("c/zzz/en-ja", 0, "bad"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    for bad in ["{", r#"{"pair_id": "c/l1/en-ja"}"#, r#"{"pair_id": "c/l1/en-ja", "alignment_index": 0, "verdict": "maybe"}"#] {
        let (status, _) = call(&app, post(bad)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
    assert_eq!(JudgmentLog::read(&log).unwrap().len(), 2);

    for k in 0..2 {
        let (status, _) = call(&app, post(judgment("c/l1/en-ja", k, "good"))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, next) = call(&app, get("/api/next")).await;
    assert_eq!(next, json!({"done": true}));
    let (_, progress) = call(&app, get("/api/progress")).await;
    assert_eq!(progress["phase"], "done");
    assert_eq!(progress["dev_pool"], 2);

    let replayed = ReviewSession::replay(&r, SPEC, &JudgmentLog::read(&log).unwrap()).unwrap();
    assert!(state.with_session(|live| live.same_state(&replayed)));
}

#[tokio::test]
async fn exhausted_queue_reports_done() {
    let dir = tempfile::tempdir().unwrap();
    let r = results(&[1]);
    let state = AppState::new(ReviewSession::with_log(&r, SPEC, dir.path().join("j.jsonl")).unwrap(), "t");
    let app = router(state, None);
    call(&app, post(judgment("c/l0/en-ja", 0, "bad"))).await;
    let (_, next) = call(&app, get("/api/next")).await;
    assert_eq!(next, json!({"done": true, "exhausted": true}));
}

#[tokio::test]
async fn ui_assets_and_placeholder() {
    let dir = tempfile::tempdir().unwrap();
    let r = results(&[1]);
    let session = || ReviewSession::new(&r, SPEC).unwrap();
    let (status, body) = call(&router(AppState::new(session(), "t"), None), get("/")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("/api"));
    std::fs::write(dir.path().join("index.html"), "<p>review ui</p>").unwrap();
    let app = router(AppState::new(session(), "t"), Some(dir.path().to_path_buf()));
    let (status, body) = call(&app, get("/")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<p>review ui</p>".into()));
    let (status, _) = call(&app, get("/api/progress")).await;
    assert_eq!(status, StatusCode::OK);
}
