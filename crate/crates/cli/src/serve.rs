//! Websocket transport around [`Connection`]: one task per client, frames
//! handled strictly in arrival order.

use std::path::{Path, PathBuf};

use anyhow::Context;
use fronttouch::connection::Connection;
use fronttouch::mapping::FittedMap;
use fronttouch::protocol::{ErrorCode, ServerMessage};
use fronttouch::trace::Trace;
use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;

pub fn run(host: &str, port: u16, record: Option<PathBuf>, fit: FittedMap) -> anyhow::Result<()> {
    if let Some(dir) = &record {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")?;
    rt.block_on(async move {
        let listener = TcpListener::bind((host, port))
            .await
            .with_context(|| format!("cannot listen on {host}:{port}"))?;
        // Tests and scripts read this line to learn the bound port.
        println!("listening on ws://{}", listener.local_addr()?);
        let mut next = 0u64;
        loop {
            let (stream, peer) = listener.accept().await.context("accept")?;
            next += 1;
            let (id, record) = (next, record.clone());
            tokio::spawn(async move {
                if let Err(e) = client(stream, id, record, fit).await {
                    eprintln!("connection {id} ({peer}): {e:#}");
                }
            });
        }
    })
}

fn save(dir: &Path, id: u64, count: &mut usize, trace: &Trace) -> anyhow::Result<()> {
    *count += 1;
    let p = dir.join(format!("conn{id:04}-session{count}.jsonl"));
    std::fs::write(&p, trace.to_jsonl()).with_context(|| format!("cannot write {}", p.display()))
}

async fn client(
    stream: TcpStream,
    id: u64,
    record: Option<PathBuf>,
    fit: FittedMap,
) -> anyhow::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream)
        .await
        .context("websocket handshake")?;
    let (mut tx, mut rx) = ws.split();
    let mut conn = Connection::new(fit);
    let mut saved = 0;
    let mut result = Ok(());
    while let Some(frame) = rx.next().await {
        let replies = match frame {
            Ok(Message::Text(text)) => conn.receive(text.as_str()),
            Ok(Message::Binary(_)) => vec![ServerMessage::error(
                ErrorCode::Schema,
                "binary frames are not supported; send JSON text",
            )],
            Ok(Message::Close(_)) => break,
            Ok(_) => continue,
            Err(e) => {
                result = Err(e.into());
                break;
            }
        };
        for r in replies {
            let text = serde_json::to_string(&r).context("serializing reply")?;
            if let Err(e) = tx.send(Message::text(text)).await {
                result = Err(e.into());
                break;
            }
        }
        if let Some(dir) = &record {
            for t in conn.drain_finished() {
                save(dir, id, &mut saved, &t)?;
            }
        }
    }
    if let Some(dir) = &record {
        for t in conn.close() {
            save(dir, id, &mut saved, &t)?;
        }
    }
    result
}
