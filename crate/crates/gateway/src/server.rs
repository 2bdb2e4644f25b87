use std::io;
use std::sync::Arc;
use std::time::Duration;

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::time::{interval_at, Instant, MissedTickBehavior};

use crate::gateway::Gateway;

pub const DEFAULT_HEARTBEAT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy)]
pub struct ServerOptions {
    pub heartbeat: Duration,
}

impl Default for ServerOptions {
    fn default() -> Self {
        Self {
            heartbeat: DEFAULT_HEARTBEAT,
        }
    }
}

/// Accept connections until the listener fails.
pub async fn serve(listener: TcpListener, gateway: Arc<Gateway>, options: ServerOptions) -> io::Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        let gateway = Arc::clone(&gateway);
        tokio::spawn(async move {
            // A broken connection only ends itself.
            let _ = handle_connection(stream, gateway, options).await;
        });
    }
}

/// Serve one client: one JSON message per line in each direction.
pub async fn handle_connection(stream: TcpStream, gateway: Arc<Gateway>, options: ServerOptions) -> io::Result<()> {
    let (read, mut write) = stream.into_split();
    let mut lines = BufReader::new(read).lines();
    let mut conn = gateway.connect();
    let mut beat = interval_at(Instant::now() + options.heartbeat, options.heartbeat);
    beat.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        let replies = tokio::select! {
            line = lines.next_line() => match line? {
                Some(line) if line.trim().is_empty() => continue,
                Some(line) => conn.handle_line(&line),
                None => return Ok(()),
            },
            _ = beat.tick() => vec![conn.heartbeat()],
        };
        let mut out = String::new();
        for r in &replies {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        write.write_all(out.as_bytes()).await?;
        write.flush().await?;
    }
}
