use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};

use wisar_core::env::{EnvConfig, StepInfo};
use wisar_core::protocol::{EnvCommand, EnvReply, EnvRequest, EnvResponse};

use crate::{ClientError, Result};

/// Blocking client for one remote environment.
#[derive(Debug)]
pub struct EnvClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    line: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteStep {
    pub flat: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

impl EnvClient {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: BufWriter::new(stream), line: String::new() })
    }

    /// Sends one request and waits for its response.
    pub fn request(&mut self, command: EnvCommand) -> Result<EnvResponse> {
        self.send_raw(&serde_json::to_string(&EnvRequest::from(command))?)
    }

    /// Sends a raw line, e.g. to probe error handling.
    pub fn send_raw(&mut self, line: &str) -> Result<EnvResponse> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        self.line.clear();
        if self.reader.read_line(&mut self.line)? == 0 {
            return Err(ClientError::Protocol("server closed the connection".into()));
        }
        Ok(serde_json::from_str(&self.line)?)
    }

    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        match self.request(EnvCommand::Reset { seed })?.reply {
            EnvReply::Obs { flat, .. } => Ok(flat),
            other => unexpected(other),
        }
    }

    pub fn step(&mut self, action: f64) -> Result<RemoteStep> {
        match self.request(EnvCommand::Step { action })?.reply {
            EnvReply::Step { flat, reward, done, info } => Ok(RemoteStep { flat, reward, done, info }),
            other => unexpected(other),
        }
    }

    pub fn config(&mut self) -> Result<EnvConfig> {
        match self.request(EnvCommand::Config)?.reply {
            EnvReply::Config(c) => Ok(c),
            other => unexpected(other),
        }
    }

    pub fn close(mut self) -> Result<()> {
        match self.request(EnvCommand::Close)?.reply {
            EnvReply::Closed => Ok(()),
            other => unexpected(other),
        }
    }
}

fn unexpected<T>(reply: EnvReply) -> Result<T> {
    match reply {
        EnvReply::Error { message } => Err(ClientError::Remote(message)),
        other => Err(ClientError::Protocol(format!("unexpected reply {other:?}"))),
    }
}
