//! HTTP and websocket front end over [`Session`].

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::protocol::{ClientMessage, ServerMessage};
use crate::session::Session;
use iasm_core::engine::ReplyEntry;

/// Live sessions. Each session handles one message at a time.
#[derive(Default)]
pub struct Sessions {
    map: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl Sessions {
    pub fn create(&self) -> (String, Arc<Mutex<Session>>) {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst) + 1);
        let s = Arc::new(Mutex::new(Session::new()));
        self.map.lock().expect("sessions").insert(id.clone(), s.clone());
        (id, s)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.map.lock().expect("sessions").get(id).cloned()
    }
}

type Shared = Arc<Sessions>;

#[derive(Serialize)]
struct Created {
    id: String,
    messages: Vec<ServerMessage>,
}

#[derive(Deserialize)]
struct RoundBody {
    replies: Vec<ReplyEntry>,
}

fn not_found(id: &str) -> Response {
    (StatusCode::NOT_FOUND, format!("no session {id}")).into_response()
}

fn run(s: &Mutex<Session>, msg: ClientMessage) -> Vec<ServerMessage> {
    s.lock().expect("session").handle(msg)
}

/// `POST /session`. An optional `loadProgram` body is applied at once.
async fn create(State(app): State<Shared>, body: String) -> Response {
    let (id, s) = app.create();
    let messages = if body.trim().is_empty() {
        Vec::new()
    } else {
        let mut v: serde_json::Value = match serde_json::from_str(&body) {
            Ok(v) => v,
            Err(e) => return (StatusCode::BAD_REQUEST, e.to_string()).into_response(),
        };
        if let Some(obj) = v.as_object_mut() {
            obj.entry("type").or_insert_with(|| "loadProgram".into());
        }
        s.lock().expect("session").handle_text(&v.to_string())
    };
    Json(Created { id, messages }).into_response()
}

/// `POST /session/{id}/round`: all replies form one round.
async fn round(State(app): State<Shared>, Path(id): Path<String>, Json(body): Json<RoundBody>) -> Response {
    match app.get(&id) {
        Some(s) => Json(run(&s, ClientMessage::SubmitRound { replies: body.replies })).into_response(),
        None => not_found(&id),
    }
}

/// `POST /session/{id}/message`: any client message.
async fn message(State(app): State<Shared>, Path(id): Path<String>, body: String) -> Response {
    match app.get(&id) {
        Some(s) => Json(s.lock().expect("session").handle_text(&body)).into_response(),
        None => not_found(&id),
    }
}

/// `GET /session/{id}`.
async fn show(State(app): State<Shared>, Path(id): Path<String>) -> Response {
    match app.get(&id) {
        Some(s) => Json(s.lock().expect("session").snapshot()).into_response(),
        None => not_found(&id),
    }
}

async fn ws_existing(State(app): State<Shared>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    match app.get(&id) {
        Some(s) => ws.on_upgrade(move |socket| pump(socket, s)),
        None => not_found(&id),
    }
}

async fn ws_fresh(State(app): State<Shared>, ws: WebSocketUpgrade) -> Response {
    let (_, s) = app.create();
    ws.on_upgrade(move |socket| pump(socket, s))
}

/// Each text frame is one client message; every reply goes out as its own
/// frame, in order.
async fn pump(mut socket: WebSocket, s: Arc<Mutex<Session>>) {
    while let Some(Ok(frame)) = socket.recv().await {
        let text = match frame {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let replies = s.lock().expect("session").handle_text(&text);
        for r in replies {
            let out = serde_json::to_string(&r).expect("serializable");
            if socket.send(Message::Text(out.into())).await.is_err() {
                return;
            }
        }
    }
}

pub fn router() -> Router {
    router_with(Arc::new(Sessions::default()))
}

pub fn router_with(sessions: Arc<Sessions>) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}", get(show))
        .route("/session/{id}/round", post(round))
        .route("/session/{id}/message", post(message))
        .route("/session/{id}/ws", get(ws_existing))
        .route("/ws", get(ws_fresh))
        .with_state(sessions)
}

/// Serve until the process ends.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    serve_with(addr, Arc::new(Sessions::default()), |_| {}).await
}

/// Serve `sessions`, reporting the bound address once listening.
pub async fn serve_with(
    addr: SocketAddr,
    sessions: Arc<Sessions>,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router_with(sessions)).await
}
