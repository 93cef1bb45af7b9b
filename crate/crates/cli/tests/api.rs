use std::sync::Arc;

use oversight_cli::server::{serve_listener, AppState, ServeConfig};
use oversight_core::service::Service;
use oversight_core::{MockModel, NO_EDIT_CRITIQUE};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

struct Api {
    base: String,
    http: Client,
    state: Arc<AppState>,
    video: String,
}

const ANN: &str = "annotator-token";
const REV: &str = "reviewer-token";
const MGR: &str = "manager-token";

async fn start() -> Api {
    let labels = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/golden/G-CAMR-01.labels.jsonl")).unwrap();
    let video = serde_json::from_str::<Value>(labels.lines().next().unwrap()).unwrap()["video_id"].as_str().unwrap().to_string();
    let mut svc = Service::in_memory(Arc::new(MockModel::with_seed(3)) as oversight_cli::model::SharedClient);
    svc.ingest(&labels).unwrap();
    let state = AppState::new(svc, ServeConfig::default().tokens());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve_listener(listener, state.clone()));
    Api { base, http: Client::new(), state, video }
}

impl Api {
    fn item(&self) -> String {
        format!("{}/camera", self.video)
    }

    async fn get(&self, path: &str, token: &str) -> (StatusCode, Value) {
        let r = self.http.get(format!("{}{path}", self.base)).bearer_auth(token).send().await.unwrap();
        (r.status(), r.json().await.unwrap_or(Value::Null))
    }

    async fn version(&self) -> u64 {
        self.get(&format!("/items/{}", self.item()), ANN).await.1["version"].as_u64().unwrap()
    }

    async fn post(&self, action: &str, token: &str, user: &str, version: Option<u64>, key: &str, body: Value) -> (StatusCode, Value) {
        let mut req = self
            .http
            .post(format!("{}/items/{}/{action}", self.base, self.item()))
            .bearer_auth(token)
            .header("X-User", user)
            .header("Idempotency-Key", key)
            .json(&body);
        if let Some(v) = version {
            req = req.header("If-Match", v.to_string());
        }
        let r = req.send().await.unwrap();
        (r.status(), r.json().await.unwrap())
    }

    /// Drives the camera item to Submitted by annotator `ann`.
    async fn to_submitted(&self, ann: &str) {
        let (s, _) = self.post("precaption", ANN, ann, Some(self.version().await), "p", json!({})).await;
        assert_eq!(s, StatusCode::OK);
        let (s, _) = self.post("critique", ANN, ann, Some(self.version().await), "c", json!({ "critique": NO_EDIT_CRITIQUE })).await;
        assert_eq!(s, StatusCode::OK);
        let (s, _) = self.post("finalize", ANN, ann, Some(self.version().await), "f", json!({ "score": 5, "minutes": 2.5 })).await;
        assert_eq!(s, StatusCode::OK);
        let (s, body) = self.post("submit", ANN, ann, Some(self.version().await), "s", json!({})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(body["item"]["state"], "Submitted");
    }
}

#[tokio::test]
async fn annotator_round_trip_then_review() {
    let api = start().await;
    let (s, queue) = api.get("/queue?role=annotator&aspect=camera", ANN).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(queue.as_array().unwrap().len(), 1);
    assert_eq!(queue[0]["item_id"], api.item());

    api.to_submitted("ann-1").await;
    let (_, queue) = api.get("/queue?role=reviewer", REV).await;
    assert_eq!(queue.as_array().unwrap().len(), 1);

    let (s, body) = api.post("review", REV, "rev-1", Some(api.version().await), "r", json!({ "decision": "approve" })).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["item"]["state"], "Accepted");

    let (s, stats) = api.get("/stats", MGR).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(stats["accepted"], 1);
    let (s, ledger) = api.get("/ledger/ann-1", MGR).await;
    assert_eq!(s, StatusCode::OK);
    assert!(ledger.as_array().unwrap().is_empty(), "set is incomplete");
}

#[tokio::test]
async fn stale_version_is_409_and_missing_if_match_is_428() {
    let api = start().await;
    let v = api.version().await;
    let (s, _) = api.post("precaption", ANN, "ann-1", Some(v), "p1", json!({})).await;
    assert_eq!(s, StatusCode::OK);
    let (s, body) = api.post("critique", ANN, "ann-1", Some(v), "c1", json!({ "critique": NO_EDIT_CRITIQUE })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "version_conflict");
    let (s, _) = api.post("critique", ANN, "ann-1", None, "c2", json!({ "critique": NO_EDIT_CRITIQUE })).await;
    assert_eq!(s, StatusCode::PRECONDITION_REQUIRED);
}

#[tokio::test]
async fn unknown_item_role_violation_and_auth() {
    let api = start().await;
    let (s, _) = api.get("/items/nope/camera", ANN).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, _) = api.post("precaption", ANN, "ann-1", Some(api.version().await), "p", json!({})).await;
    assert_eq!(s, StatusCode::OK);
    let (s, body) = api.post("critique", REV, "rev-1", Some(api.version().await), "c", json!({ "critique": NO_EDIT_CRITIQUE })).await;
    assert_eq!(s, StatusCode::FORBIDDEN, "{body}");

    let (s, _) = api.get("/stats", "wrong").await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn self_review_is_forbidden() {
    let api = start().await;
    api.to_submitted("same-person").await;
    let (s, _) = api.post("review", REV, "same-person", Some(api.version().await), "r", json!({ "decision": "approve" })).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn replayed_idempotency_key_returns_original_result() {
    let api = start().await;
    let v = api.version().await;
    let first = api.post("precaption", ANN, "ann-1", Some(v), "once", json!({})).await;
    let events = api.state.event_count();
    // a double click: same key, same stale version
    let second = api.post("precaption", ANN, "ann-1", Some(v), "once", json!({})).await;
    assert_eq!(first, second);
    assert_eq!(api.state.event_count(), events);

    let (s, _) = api.post("finalize", ANN, "ann-1", Some(v + 1), "once", json!({ "score": 3 })).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "key reused for another request");
}

#[tokio::test]
async fn appeal_goes_to_the_manager() {
    let api = start().await;
    api.to_submitted("ann-1").await;
    let (s, body) = api
        .post("review", REV, "rev-1", Some(api.version().await), "r", json!({ "decision": "reject", "corrections": "Wrong direction." }))
        .await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["item"]["state"], "Rejected");

    let (s, body) = api.post("appeal", ANN, "ann-1", Some(api.version().await), "a", json!({ "note": "It does move backward." })).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["item"]["state"], "Appealed");
    let (_, queue) = api.get("/queue?role=manager", MGR).await;
    assert_eq!(queue.as_array().unwrap().len(), 1);

    let (s, _) = api.post("appeal", MGR, "mgr", Some(api.version().await), "m0", json!({})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, body) = api.post("appeal", MGR, "mgr", Some(api.version().await), "m1", json!({ "accept": true })).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_ne!(body["item"]["state"], "Appealed");
}
