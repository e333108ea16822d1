use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};

use wisar_core::eval::Policy;
use wisar_core::protocol::{PolicyReply, PolicyRequest, PROTOCOL_VERSION};

use crate::{ClientError, Result};

/// Algorithm label under which served policies are recorded.
pub const POLICY_ALGORITHM: &str = "sac-fs-cnn";

/// Blocking client for a policy server: sends `{"v":1,"obs":[..]}` and reads
/// `{"action":a}` per line.
#[derive(Debug)]
pub struct PolicyClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    line: String,
}

impl PolicyClient {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: BufWriter::new(stream), line: String::new() })
    }

    pub fn query(&mut self, obs: &[f64]) -> Result<f64> {
        let req = PolicyRequest { v: PROTOCOL_VERSION, obs: obs.to_vec() };
        serde_json::to_writer(&mut self.writer, &req)?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        self.line.clear();
        if self.reader.read_line(&mut self.line)? == 0 {
            return Err(ClientError::Protocol("policy server closed the connection".into()));
        }
        let reply: PolicyReply = serde_json::from_str(&self.line)?;
        reply.into_action().map_err(|e| ClientError::Remote(e.to_string()))
    }
}

impl Policy for PolicyClient {
    fn act(&mut self, observation: &[f64]) -> wisar_core::Result<f64> {
        self.query(observation).map_err(|e| wisar_core::Error::Policy(e.to_string()))
    }
}
