use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use futures_util::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use iasm_session::router;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn load_body() -> Value {
    json!({
        "asmText": fixture("broker.asm"),
        "stateJson": serde_json::from_str::<Value>(&fixture("broker_state.json")).unwrap(),
    })
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, v)
}

#[tokio::test]
async fn http_session_lifecycle() {
    let app = router();
    let (st, created) = call(&app, "POST", "/session", Some(load_body())).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(created["id"], "s1");
    assert_eq!(created["messages"][0]["type"], "hello");
    assert_eq!(created["messages"][1]["queries"].as_array().unwrap().len(), 3);

    let (_, snap) = call(&app, "GET", "/session/s1", None).await;
    assert_eq!(snap["pending"].as_array().unwrap().len(), 3);
    assert_eq!(snap["finished"], Value::Null);

    let round = json!({"replies": [{"query": ["l:q0", "e:stock", "e:price", "e:amount"], "reply": "e:yes"}]});
    let (st, out) = call(&app, "POST", "/session/s1/round", Some(round)).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(out[0]["type"], "roundAccepted");
    assert_eq!(out[1]["verdict"], "Success");

    let (_, snap) = call(&app, "GET", "/session/s1", None).await;
    assert_eq!(snap["finished"], "Success");
    assert!(snap["pending"].as_array().unwrap().is_empty());

    let (_, out) = call(&app, "POST", "/session/s1/message", Some(json!({"type": "nextStep"}))).await;
    assert_eq!(out[0]["type"], "pending");
    assert_eq!(out[0]["stepIndex"], 1);
}

#[tokio::test]
async fn http_errors() {
    let app = router();
    let (st, _) = call(&app, "GET", "/session/s9", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, created) = call(&app, "POST", "/session", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(created["messages"], json!([]));
    let id = created["id"].as_str().unwrap().to_string();
    let (_, out) = call(&app, "POST", &format!("/session/{id}/message"), Some(json!({"type": "reset"}))).await;
    assert_eq!(out[0]["code"], "NoProgram");
    let (_, out) = call(&app, "POST", &format!("/session/{id}/message"), Some(json!({"nope": 1}))).await;
    assert_eq!(out[0]["code"], "BadMessage");
    let (_, created) = call(&app, "POST", "/session", None).await;
    assert_eq!(created["id"], "s2");
}

#[tokio::test]
async fn websocket_plays_a_step() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router()).await.unwrap() });

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    let mut load = load_body();
    load["type"] = json!("loadProgram");
    ws.send(Message::Text(load.to_string().into())).await.unwrap();

    async fn next(ws: &mut (impl StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin)) -> Value {
        loop {
            match ws.next().await.unwrap().unwrap() {
                Message::Text(t) => return serde_json::from_str(&t).unwrap(),
                _ => continue,
            }
        }
    }

    assert_eq!(next(&mut ws).await["type"], "hello");
    let pending = next(&mut ws).await;
    assert_eq!(pending["type"], "pending");

    let round = json!({"type": "submitRound", "replies": [{"query": ["l:t"], "reply": "e:ok"}]});
    ws.send(Message::Text(round.to_string().into())).await.unwrap();
    assert_eq!(next(&mut ws).await["type"], "roundAccepted");
    let done = next(&mut ws).await;
    assert_eq!(done["type"], "stepDone");
    assert_eq!(done["updates"][0]["symbol"], "cancelled/0");

    ws.send(Message::Text("garbage".into())).await.unwrap();
    assert_eq!(next(&mut ws).await["code"], "BadMessage");
    ws.close(None).await.unwrap();
}
