//! Responses conform to the frozen schema in docs/wire-protocol.schema.json.

use axum::body::Body;
use axum::http::{Method, Request};
use emuc_core::assets;
use emuc_server::{app_state, router, ServerConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn schema_doc() -> Value {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/wire-protocol.schema.json"
    );
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validator(def: &str) -> jsonschema::Validator {
    let mut doc = schema_doc();
    doc["$ref"] = json!(format!("#/$defs/{def}"));
    jsonschema::validator_for(&doc).unwrap()
}

fn assert_valid(def: &str, instance: &Value) {
    let v = validator(def);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{def}: {errors:?}\n{instance}");
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (u16, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

#[tokio::test]
async fn every_response_kind_matches_the_schema() {
    let config = ServerConfig::default();
    let app = router(&config, app_state(&config));

    let create = json!({ "source": assets::MINIMED });
    assert_valid("CreateRequest", &create);
    let (status, snap) = call(&app, Method::POST, "/api/sessions", Some(create)).await;
    assert_eq!(status, 201);
    assert_valid("Snapshot", &snap);
    let id = snap["session"].as_str().unwrap().to_string();

    for t in ["click_on_off", "click_UP", "click_UP"] {
        let fire = json!({ "trigger": t });
        assert_valid("FireRequest", &fire);
        let (status, snap) = call(
            &app,
            Method::POST,
            &format!("/api/sessions/{id}/fire"),
            Some(fire),
        )
        .await;
        assert_eq!(status, 200);
        assert_valid("Snapshot", &snap);
    }
    let (_, full) = call(&app, Method::GET, &format!("/api/sessions/{id}"), None).await;
    assert_valid("Snapshot", &full);
    assert_eq!(full["history"].as_array().unwrap().len(), 3);
    let (_, replay) = call(
        &app,
        Method::GET,
        &format!("/api/sessions/{id}/replay"),
        None,
    )
    .await;
    assert_valid("Replay", &replay);
    let (_, reset) = call(
        &app,
        Method::POST,
        &format!("/api/sessions/{id}/reset"),
        None,
    )
    .await;
    assert_valid("Snapshot", &reset);

    let (status, err) = call(
        &app,
        Method::POST,
        "/api/sessions",
        Some(json!({ "source": "diagram" })),
    )
    .await;
    assert_eq!(status, 422);
    assert_valid("Error", &err);
    assert!(!err["diagnostics"].as_array().unwrap().is_empty());
    let (status, err) = call(&app, Method::GET, "/api/sessions/unknown", None).await;
    assert_eq!(status, 404);
    assert_valid("Error", &err);
    let (status, err) = call(
        &app,
        Method::POST,
        &format!("/api/sessions/{id}/fire"),
        Some(json!({ "trigger": "x" })),
    )
    .await;
    assert_eq!(status, 400);
    assert_valid("Error", &err);
}

#[test]
fn schema_rejects_drift() {
    let v = validator("Snapshot");
    let mut snap: Value = serde_json::from_str(&doc_example()).unwrap();
    assert!(v.is_valid(&snap));
    snap["extra"] = json!(1);
    assert!(!v.is_valid(&snap));
    assert!(!validator("FireRequest").is_valid(&json!({ "event": "x" })));
    assert!(!validator("Variable").is_valid(&json!({ "name": "x", "type": "float", "value": "1" })));
}

/// The snapshot example in docs/wire-protocol.md.
fn doc_example() -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/wire-protocol.md");
    let text = std::fs::read_to_string(path).unwrap();
    let start = text.find("```json\n").unwrap() + "```json\n".len();
    let end = text[start..].find("```").unwrap() + start;
    text[start..end].to_string()
}
