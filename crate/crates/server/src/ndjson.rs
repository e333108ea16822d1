//! Line-oriented environment server.

use tokio::io::{AsyncBufRead, AsyncBufReadExt, AsyncWrite, AsyncWriteExt, BufReader, BufWriter};
use tokio::net::TcpListener;
use tracing::{debug, info, warn};

use wisar_core::env::EnvConfig;
use wisar_core::protocol::{EnvReply, EnvSession};

use crate::ServerError;

/// Serves one environment until `close` or end of input. Every request line
/// gets exactly one response line; blank lines are ignored.
pub async fn serve_connection<R, W>(config: EnvConfig, reader: R, writer: W) -> Result<(), ServerError>
where
    R: AsyncBufRead + Unpin,
    W: AsyncWrite + Unpin,
{
    let mut session = EnvSession::new(config)?;
    let mut lines = reader.lines();
    let mut writer = BufWriter::new(writer);
    while let Some(line) = lines.next_line().await? {
        if line.trim().is_empty() {
            continue;
        }
        let response = session.handle_line(&line);
        let closed = response.reply == EnvReply::Closed;
        if let EnvReply::Error { message } = &response.reply {
            debug!(%message, "request rejected");
        }
        let mut out = serde_json::to_vec(&response).map_err(wisar_core::Error::from)?;
        out.push(b'\n');
        writer.write_all(&out).await?;
        writer.flush().await?;
        if closed {
            break;
        }
    }
    Ok(())
}

pub async fn serve_stdio(config: EnvConfig) -> Result<(), ServerError> {
    serve_connection(config, BufReader::new(tokio::io::stdin()), tokio::io::stdout()).await
}

/// Accepts connections forever, one independent environment per connection.
pub async fn serve_tcp(config: EnvConfig, listener: TcpListener) -> Result<(), ServerError> {
    config.validate()?;
    info!(addr = %listener.local_addr()?, "environment server listening");
    loop {
        let (stream, peer) = listener.accept().await?;
        stream.set_nodelay(true)?;
        let config = config.clone();
        tokio::spawn(async move {
            let (read, write) = stream.into_split();
            match serve_connection(config, BufReader::new(read), write).await {
                Ok(()) => debug!(%peer, "connection finished"),
                Err(e) => warn!(%peer, error = %e, "connection failed"),
            }
        });
    }
}
