mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use evarena_service::{router, Condition, CreateSession, Service};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(b) => Body::from(b.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn app() -> (Arc<Service>, Router) {
    let service = Arc::new(common::service());
    (service.clone(), router(service, None))
}

#[tokio::test]
async fn full_flow() {
    let (_, app) = app();
    assert_eq!(call(&app, "GET", "/healthz", None).await, (StatusCode::OK, json!({"status": "ok"})));

    let (status, created) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"condition": "single-agent-sentence", "agent": "search:tfidf-sa", "dataset": "dream", "limit": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["items"], 3);
    let id = created["session_id"].as_str().unwrap().to_string();

    let (status, item) = call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(item["status"], "item");
    assert_eq!(item["options"][1]["label"], "B");
    assert_eq!(item["sentences"].as_array().unwrap().len(), 1);
    assert_eq!(item["choose"], "option");
    let item_id = item["item_id"].as_str().unwrap();

    let answers = format!("/sessions/{id}/answers");
    let (status, err) = call(&app, "POST", &answers, Some(json!({"item_id": item_id, "choice": 3}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["error"], "choice_out_of_range");
    let (status, ack) = call(&app, "POST", &answers, Some(json!({"item_id": item_id, "choice": 1}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ack["accepted"], true);
    assert_eq!(ack["progress"]["answered"], 1);
    let (status, err) = call(&app, "POST", &answers, Some(json!({"item_id": item_id, "choice": 1}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "duplicate");

    // one question: the session is done after one response
    let (_, done) = call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(done, json!({"status": "done"}));

    let (status, report) = call(&app, "GET", &format!("/sessions/{id}/report"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["responses"], 1);
    assert_eq!(report["condition"], "single-agent-sentence");
    assert!(report["pick_rate"]["count"] == 1);
}

#[tokio::test]
async fn error_statuses() {
    let (_, app) = app();
    let (status, err) = call(&app, "GET", "/sessions/nope/next", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "unknown_session");
    let (status, _) = call(&app, "GET", "/sessions/nope/report", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"condition": "telepathy"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "invalid_request");
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"condition": "full-passage", "dataset": "none"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "empty_slice");
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"condition": "pooled-evidence", "agent": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "unknown_agent");
    let (_, created) = call(&app, "POST", "/sessions", Some(json!({"condition": "no-passage", "limit": 2}))).await;
    let id = created["session_id"].as_str().unwrap();
    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(json!({"item_id": "abc", "choice": 0}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "unknown_item");
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(json!({"choice": 0}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

/// Walk every item of every condition over HTTP and audit each payload.
#[tokio::test]
async fn no_payload_leaks() {
    let (service, app) = app();
    let mut audited = 0;
    for condition in Condition::ALL {
        let mut request = CreateSession::new(condition);
        request.turns = 2;
        if condition.needs_agent() {
            request.agent = Some("search:tfidf-sa".into());
        }
        let (status, created) = call(&app, "POST", "/sessions", Some(serde_json::to_value(&request).unwrap())).await;
        assert_eq!(status, StatusCode::CREATED);
        let id = created["session_id"].as_str().unwrap().to_string();
        let mut payloads = vec![created];
        loop {
            let (_, next) = call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
            payloads.push(next.clone());
            if next["status"] == "done" {
                break;
            }
            let findings = service.audit_payload(&id, &next).unwrap();
            assert!(findings.is_empty(), "{condition}: {findings:?}");
            let body = json!({"item_id": next["item_id"], "choice": 0});
            let (status, ack) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(body)).await;
            assert_eq!(status, StatusCode::OK);
            payloads.push(ack);
        }
        for p in &payloads {
            assert!(service.audit_payload(&id, p).unwrap().is_empty(), "{condition}: {p}");
            audited += 1;
        }
        // negative control: the audit sees an injected field
        let mut tampered = payloads[1].clone();
        tampered["gold_index"] = json!(0);
        assert!(!service.audit_payload(&id, &tampered).unwrap().is_empty());
    }
    assert!(audited > 5 * 8);
}

#[tokio::test]
async fn serves_static_bundle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>evarena</h1>").unwrap();
    let app = router(Arc::new(common::service()), Some(dir.path().to_path_buf()));
    let (status, body) = call(&app, "GET", "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<h1>evarena</h1>".into()));
    let (status, _) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
}
