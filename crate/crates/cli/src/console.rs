//! Local web endpoint for operator consoles: the UI bundle at `/` and a
//! WebSocket at `/live` carrying JSON events both ways.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use rover_core::basestation::{ConsoleEvent, OperatorCommand};
use tokio::sync::broadcast;

pub const DEFAULT_CONSOLE_PORT: u16 = 8080;

const INDEX_HTML: &str = include_str!("../assets/index.html");

/// Fan-out of bridge events to every console, and fan-in of their commands.
#[derive(Clone)]
pub struct ConsoleHub {
    events: broadcast::Sender<String>,
    sync: Arc<Mutex<Vec<String>>>,
    commands: mpsc::Sender<OperatorCommand>,
    ui_dir: Option<PathBuf>,
}

fn to_json(e: &ConsoleEvent) -> String {
    serde_json::to_string(e).expect("console events serialize")
}

impl ConsoleHub {
    pub fn new(ui_dir: Option<PathBuf>) -> (Self, mpsc::Receiver<OperatorCommand>) {
        let (events, _) = broadcast::channel(256);
        let (commands, rx) = mpsc::channel();
        (Self { events, sync: Arc::default(), commands, ui_dir }, rx)
    }

    pub fn publish(&self, event: &ConsoleEvent) {
        // no subscribers is fine
        let _ = self.events.send(to_json(event));
    }

    /// Another way in for commands, e.g. a terminal.
    pub fn command_sender(&self) -> mpsc::Sender<OperatorCommand> {
        self.commands.clone()
    }

    /// State replayed to each console as it connects.
    pub fn set_sync(&self, events: &[ConsoleEvent]) {
        *self.sync.lock().expect("sync lock") = events.iter().map(to_json).collect();
    }

    pub fn router(self) -> Router {
        Router::new().route("/", get(index)).route("/live", get(live)).with_state(self)
    }
}

async fn index(State(hub): State<ConsoleHub>) -> impl IntoResponse {
    if let Some(dir) = &hub.ui_dir {
        if let Ok(page) = tokio::fs::read_to_string(dir.join("index.html")).await {
            return Html(page);
        }
    }
    Html(INDEX_HTML.to_string())
}

async fn live(ws: WebSocketUpgrade, State(hub): State<ConsoleHub>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, hub))
}

async fn client(socket: WebSocket, hub: ConsoleHub) {
    let commands = hub.commands.clone();
    serve_client(socket, hub).await;
    // a console that vanishes mid-keypress must not leave the rover driving
    let _ = commands.send(OperatorCommand::Keys { keys: Vec::new() });
}

async fn serve_client(mut socket: WebSocket, hub: ConsoleHub) {
    let mut events = hub.events.subscribe();
    let greeting: Vec<String> = hub.sync.lock().expect("sync lock").clone();
    for text in greeting {
        if socket.send(WsMessage::Text(text.into())).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            event = events.recv() => match event {
                Ok(text) => {
                    if socket.send(WsMessage::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => log::debug!("console lagged by {n} events"),
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(WsMessage::Text(text))) => match serde_json::from_str::<OperatorCommand>(&text) {
                    Ok(cmd) => {
                        if hub.commands.send(cmd).is_err() {
                            return;
                        }
                    }
                    Err(e) => {
                        let reply = to_json(&ConsoleEvent::Rejected { reason: format!("unreadable command: {e}") });
                        if socket.send(WsMessage::Text(reply.into())).await.is_err() {
                            return;
                        }
                    }
                },
                Some(Ok(WsMessage::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

/// Runs the endpoint on its own thread and returns the bound address.
/// Safe to call from inside another async runtime.
pub fn spawn(hub: ConsoleHub, port: u16) -> anyhow::Result<SocketAddr> {
    let listener = std::net::TcpListener::bind(("127.0.0.1", port))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    std::thread::Builder::new().name("console".into()).spawn(move || {
        runtime.block_on(async move {
            let served = match tokio::net::TcpListener::from_std(listener) {
                Ok(listener) => axum::serve(listener, hub.router()).await,
                Err(e) => Err(e),
            };
            if let Err(e) = served {
                log::error!("console endpoint stopped: {e}");
            }
        })
    })?;
    Ok(addr)
}
