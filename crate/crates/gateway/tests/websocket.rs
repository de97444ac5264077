use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use gazerun_core::SimConfig;
use gazerun_gateway::server;
use gazerun_gateway::{GatewayConfig, ServerMessage};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(seconds: f64, record: Option<std::path::PathBuf>) -> SocketAddr {
    let cfg = GatewayConfig {
        sim: SimConfig {
            session_duration: seconds,
            ..Default::default()
        },
        record,
        ..Default::default()
    };
    let (addr, _) = server::spawn("127.0.0.1:0".parse().unwrap(), cfg).await.unwrap();
    addr
}

async fn connect(addr: SocketAddr) -> Client {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn send(c: &mut Client, json: &str) {
    c.send(Message::text(json)).await.unwrap();
}

/// Next server message, or `None` once the connection closes.
async fn next(c: &mut Client) -> Option<ServerMessage> {
    loop {
        let m = tokio::time::timeout(Duration::from_secs(10), c.next()).await.expect("server went quiet")?;
        match m.ok()? {
            Message::Text(t) => return Some(serde_json::from_str(t.as_str()).unwrap()),
            Message::Close(_) => return None,
            _ => continue,
        }
    }
}

#[tokio::test]
async fn plays_a_short_session_end_to_end() {
    let addr = start(1.0, None).await;
    let mut c = connect(addr).await;
    send(&mut c, r#"{"type":"Hello","protocol_version":1}"#).await;
    match next(&mut c).await {
        Some(ServerMessage::Welcome { session_ticks, snapshot_hz, .. }) => {
            assert_eq!(session_ticks, 60);
            assert_eq!(snapshot_hz, 30.0);
        }
        other => panic!("expected Welcome, got {other:?}"),
    }
    send(&mut c, r#"{"type":"StartSession","mode":"tracked"}"#).await;
    let mut ticks = Vec::new();
    let ended = loop {
        send(&mut c, r#"{"type":"Gaze","u":0.5,"v":0.6,"valid":true}"#).await;
        match next(&mut c).await {
            Some(ServerMessage::Snapshot(s)) => ticks.push(s.tick),
            Some(ServerMessage::SessionEnded { digest, aborted, .. }) => break (digest, aborted),
            other => panic!("unexpected {other:?}"),
        }
    };
    assert!(!ended.1);
    assert_eq!(ended.0.len(), 16);
    assert_eq!(ticks.first(), Some(&0));
    assert_eq!(ticks.last(), Some(&60));
    assert!(ticks.windows(2).all(|w| w[0] < w[1]));
    assert!(ticks.len() >= 30, "about 30 Hz over one second");
}

#[tokio::test]
async fn one_client_at_a_time() {
    let addr = start(5.0, None).await;
    let mut first = connect(addr).await;
    send(&mut first, r#"{"type":"Hello","protocol_version":1}"#).await;
    assert!(matches!(next(&mut first).await, Some(ServerMessage::Welcome { .. })));
    let mut second = connect(addr).await;
    assert!(matches!(next(&mut second).await, Some(ServerMessage::Error { .. })));
    assert!(next(&mut second).await.is_none());
    drop(first);
    // the slot frees once the first connection is gone
    let mut third = None;
    for _ in 0..50 {
        tokio::time::sleep(Duration::from_millis(20)).await;
        let mut c = connect(addr).await;
        send(&mut c, r#"{"type":"Hello","protocol_version":1}"#).await;
        if let Some(ServerMessage::Welcome { .. }) = next(&mut c).await {
            third = Some(c);
            break;
        }
    }
    assert!(third.is_some());
}

#[tokio::test]
async fn disconnect_mid_session_records_an_aborted_session() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(60.0, Some(dir.path().to_path_buf())).await;
    let mut c = connect(addr).await;
    send(&mut c, r#"{"type":"Hello","protocol_version":1}"#).await;
    next(&mut c).await;
    send(&mut c, r#"{"type":"StartSession","mode":"tracked"}"#).await;
    for _ in 0..5 {
        next(&mut c).await;
    }
    drop(c);
    let status = dir.path().join("session_1/status.json");
    for _ in 0..100 {
        if status.is_file() {
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(status).unwrap()).unwrap();
    assert_eq!(s["aborted"], true);
    assert!(s["ticks"].as_u64().unwrap() < 3600);
}

#[tokio::test]
async fn garbage_gets_an_error_frame_and_a_close() {
    let addr = start(5.0, None).await;
    let mut c = connect(addr).await;
    c.send(Message::binary(vec![0xff, 0x00, 0x13, 0x37])).await.unwrap();
    assert!(matches!(next(&mut c).await, Some(ServerMessage::Error { .. })));
    assert!(next(&mut c).await.is_none());
}
