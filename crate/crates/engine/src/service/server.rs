use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, put};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};

use super::protocol::ServerMessage;
use super::session::{spawn, Incoming, SessionConfig};
use super::store::WeightStore;

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub weights_dir: Option<PathBuf>,
    pub token: Option<String>,
    pub session: SessionConfig,
}

#[derive(Clone)]
struct AppState {
    store: WeightStore,
    token: Option<String>,
    session: SessionConfig,
}

impl AppState {
    fn authorized(&self, query: &HashMap<String, String>) -> bool {
        self.token.as_ref().is_none_or(|t| query.get("token") == Some(t))
    }
}

/// Routes over an existing store.
pub fn router(store: WeightStore, token: Option<String>, session: SessionConfig) -> Router {
    let state = AppState { store, token, session };
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/weights", get(list_weights))
        .route("/weights/{id}", put(upload_weights).post(upload_weights))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> anyhow::Result<()> {
    let store = match &config.weights_dir {
        Some(dir) => WeightStore::open(dir)?,
        None => WeightStore::new(),
    };
    let app = router(store, config.token, config.session);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

async fn list_weights(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> Response {
    if !state.authorized(&q) {
        return StatusCode::UNAUTHORIZED.into_response();
    }
    Json(state.store.list()).into_response()
}

async fn upload_weights(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> Response {
    if !state.authorized(&q) {
        return StatusCode::UNAUTHORIZED.into_response();
    }
    let store = state.store.clone();
    match tokio::task::spawn_blocking(move || store.upload(&id, &body)).await {
        Ok(Ok(info)) => (StatusCode::CREATED, Json(info)).into_response(),
        Ok(Err(e)) => (StatusCode::BAD_REQUEST, e.to_string()).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn ws_upgrade(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
    ws: WebSocketUpgrade,
) -> Response {
    if !state.authorized(&q) {
        return StatusCode::UNAUTHORIZED.into_response();
    }
    ws.on_upgrade(move |socket| run_socket(socket, state))
}

fn text(msg: &ServerMessage) -> Message {
    Message::Text(serde_json::to_string(msg).expect("server messages serialize").into())
}

async fn run_socket(socket: WebSocket, state: AppState) {
    let handle = spawn(state.store.clone(), state.session);
    let commands = handle.commands;
    let mut messages = handle.messages;
    let mut frames = handle.frames;
    let (mut sink, mut stream) = socket.split();

    let reader = async move {
        while let Some(Ok(msg)) = stream.next().await {
            let incoming = match msg {
                Message::Text(t) => Incoming::Text(t.to_string()),
                Message::Binary(_) => Incoming::Text(String::from("<binary>")),
                Message::Close(_) => break,
                _ => continue,
            };
            if commands.send(incoming).is_err() {
                break;
            }
        }
        // dropping `commands` stops the session thread
    };

    let writer = async move {
        loop {
            let sent = tokio::select! {
                biased;
                m = messages.recv() => match m {
                    Some(m) => sink.send(text(&m)).await,
                    None => break,
                },
                f = frames.recv() => match f {
                    Some((meta, pixels)) => match sink.send(text(&meta)).await {
                        Ok(()) => sink.send(Message::Binary(pixels.into())).await,
                        Err(e) => Err(e),
                    },
                    None => break,
                },
            };
            if sent.is_err() {
                break;
            }
        }
    };

    tokio::select! {
        _ = reader => {},
        _ = writer => {},
    }
    if let Err(e) = tokio::task::spawn_blocking(move || handle.thread.join()).await {
        tracing::warn!("session thread join failed: {e}");
    }
}
