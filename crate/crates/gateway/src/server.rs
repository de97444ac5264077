//! Websocket transport: one client at a time on `/ws`, engine ticks paced in
//! real time.

use std::net::SocketAddr;
use std::sync::atomic::AtomicU32;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{OwnedSemaphorePermit, Semaphore};
use tokio::time::MissedTickBehavior;

use crate::protocol::ServerMessage;
use crate::session::{GatewayConfig, GatewaySession};

#[derive(Clone)]
struct AppState {
    cfg: Arc<GatewayConfig>,
    counter: Arc<AtomicU32>,
    slot: Arc<Semaphore>,
}

pub fn router(cfg: GatewayConfig) -> Router {
    let state = AppState {
        cfg: Arc::new(cfg),
        counter: Arc::new(AtomicU32::new(0)),
        slot: Arc::new(Semaphore::new(1)),
    };
    Router::new().route("/ws", get(upgrade)).with_state(state)
}

pub async fn serve(listener: TcpListener, cfg: GatewayConfig) -> std::io::Result<()> {
    axum::serve(listener, router(cfg)).await
}

/// Binds `addr` and serves in the background; returns the bound address.
pub async fn spawn(addr: SocketAddr, cfg: GatewayConfig) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener, cfg))))
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    let permit = state.slot.clone().try_acquire_owned().ok();
    ws.on_upgrade(move |socket| async move {
        match permit {
            Some(permit) => connection(socket, state, permit).await,
            None => reject(socket).await,
        }
    })
}

async fn reject(mut socket: WebSocket) {
    let msg = ServerMessage::error("gateway busy: one client per session").to_json();
    let _ = socket.send(Message::Text(msg.into())).await;
    let _ = socket.send(Message::Close(None)).await;
}

async fn connection(mut socket: WebSocket, state: AppState, _permit: OwnedSemaphorePermit) {
    let mut session = GatewaySession::new(state.cfg.clone(), state.counter.clone());
    let mut clock = tokio::time::interval(Duration::from_secs_f64(state.cfg.sim.timestep));
    clock.set_missed_tick_behavior(MissedTickBehavior::Burst);
    loop {
        let was_running = session.is_running();
        let out = tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => session.handle_text(text.as_str()),
                Some(Ok(Message::Binary(bytes))) => match std::str::from_utf8(&bytes) {
                    Ok(text) => session.handle_text(text),
                    Err(_) => session.handle_text(""),
                },
                Some(Ok(Message::Ping(_) | Message::Pong(_))) => Vec::new(),
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => {
                    let out = session.disconnect();
                    log_end(&out);
                    return;
                }
            },
            _ = clock.tick(), if was_running => session.step(),
        };
        if !was_running && session.is_running() {
            clock.reset();
        }
        log_end(&out);
        for m in out {
            if socket.send(Message::Text(m.to_json().into())).await.is_err() {
                log_end(&session.disconnect());
                return;
            }
        }
        if session.is_closed() {
            let _ = socket.send(Message::Close(None)).await;
            return;
        }
    }
}

fn log_end(out: &[ServerMessage]) {
    for m in out {
        match m {
            ServerMessage::SessionEnded { digest, aborted, metrics } => {
                tracing::info!(%digest, aborted, kill = metrics.kill_ratio, noticed = metrics.noticed_ratio, "session ended")
            }
            ServerMessage::Error { message } => tracing::warn!(%message, "closing connection"),
            _ => {}
        }
    }
}
