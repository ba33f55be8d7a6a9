use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use rover_cli::console::{spawn, ConsoleHub};
use rover_core::basestation::{ConnectionStatus, ConsoleEvent, OperatorCommand};
use serde_json::Value;
use tokio_tungstenite::tungstenite::Message;

async fn next_json<S>(ws: &mut S) -> Value
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.expect("event in time").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

#[tokio::test]
async fn live_socket_relays_events_and_commands() {
    let (hub, commands) = ConsoleHub::new(None);
    hub.set_sync(&[ConsoleEvent::Status { status: ConnectionStatus::Connected, reason: None }]);
    let addr = spawn(hub.clone(), 0).unwrap();

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/live")).await.unwrap();
    let hello = next_json(&mut ws).await;
    assert_eq!(hello["type"], "status");
    assert_eq!(hello["status"], "connected");

    ws.send(Message::Text(r#"{"type":"estop"}"#.into())).await.unwrap();
    let got = tokio::task::spawn_blocking(move || {
        let cmd = commands.recv_timeout(Duration::from_secs(5)).unwrap();
        (cmd, commands)
    })
    .await
    .unwrap();
    assert_eq!(got.0, OperatorCommand::EStop);
    let commands = got.1;

    ws.send(Message::Text("{not json".into())).await.unwrap();
    let reply = next_json(&mut ws).await;
    assert_eq!(reply["type"], "rejected");

    hub.publish(&ConsoleEvent::Rejected { reason: "estopped".into() });
    let pushed = next_json(&mut ws).await;
    assert_eq!(pushed["reason"], "estopped");

    // dropping the console releases any held keys
    ws.close(None).await.unwrap();
    let released = tokio::task::spawn_blocking(move || commands.recv_timeout(Duration::from_secs(5)).unwrap()).await.unwrap();
    assert_eq!(released, OperatorCommand::Keys { keys: vec![] });
}

#[tokio::test]
async fn index_page_is_served() {
    let (hub, _commands) = ConsoleHub::new(None);
    let addr = spawn(hub, 0).unwrap();
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream.write_all(b"GET / HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));
    assert!(body.contains("/live"));
}
