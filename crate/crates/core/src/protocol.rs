//! Wire messages shared by the server, its clients and external trainers.
//!
//! The environment protocol is newline-delimited JSON. Every message carries
//! `"v": 1`; requests may omit it. Requests are tagged by `cmd`, responses by
//! `type`:
//!
//! ```text
//! {"v":1,"cmd":"reset","seed":7}    -> {"v":1,"type":"obs","flat":[..],"t":0}
//! {"v":1,"cmd":"step","action":0.25} -> {"v":1,"type":"step","flat":[..],"reward":..,"done":false,"info":{..}}
//! {"v":1,"cmd":"config"}            -> {"v":1,"type":"config",<EnvConfig fields>}
//! {"v":1,"cmd":"close"}             -> {"v":1,"type":"closed"}
//! anything malformed                -> {"v":1,"type":"error","message":".."}
//! ```
//!
//! A policy server speaks the reverse direction: it receives
//! `{"v":1,"obs":[..]}` and answers `{"v":1,"action":a}`.

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, SearchEnv, StepInfo};
use crate::eval::{DtfResult, EvalSettings, MetricSummary, PodPoint, RunRecord};
use crate::pdm::Pdm;
use crate::planners::Path;
use crate::{Error, Result};

pub const PROTOCOL_VERSION: u32 = 1;

fn version() -> u32 {
    PROTOCOL_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum EnvCommand {
    Reset { seed: u64 },
    Step { action: f64 },
    Config,
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvRequest {
    #[serde(default = "version")]
    pub v: u32,
    #[serde(flatten)]
    pub command: EnvCommand,
}

impl From<EnvCommand> for EnvRequest {
    fn from(command: EnvCommand) -> Self {
        Self { v: PROTOCOL_VERSION, command }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EnvReply {
    Obs { flat: Vec<f64>, t: usize },
    Step { flat: Vec<f64>, reward: f64, done: bool, info: StepInfo },
    Config(EnvConfig),
    Closed,
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvResponse {
    #[serde(default = "version")]
    pub v: u32,
    #[serde(flatten)]
    pub reply: EnvReply,
}

impl From<EnvReply> for EnvResponse {
    fn from(reply: EnvReply) -> Self {
        Self { v: PROTOCOL_VERSION, reply }
    }
}

impl EnvResponse {
    pub fn error(message: impl Into<String>) -> Self {
        EnvReply::Error { message: message.into() }.into()
    }
}

/// One environment behind the protocol. Requests are handled strictly in
/// order; `close` drops the episode so the next `reset` starts clean.
#[derive(Debug, Clone)]
pub struct EnvSession {
    env: SearchEnv,
}

impl EnvSession {
    pub fn new(config: EnvConfig) -> Result<Self> {
        Ok(Self { env: SearchEnv::new(config)? })
    }

    pub fn env(&self) -> &SearchEnv {
        &self.env
    }

    pub fn handle(&mut self, request: EnvRequest) -> EnvResponse {
        if request.v != PROTOCOL_VERSION {
            return EnvResponse::error(format!("unsupported protocol version {}, expected {PROTOCOL_VERSION}", request.v));
        }
        match request.command {
            EnvCommand::Reset { seed } => {
                let obs = self.env.reset(seed);
                EnvReply::Obs { flat: obs.flat, t: 0 }.into()
            }
            EnvCommand::Step { action } => match self.env.step(action) {
                Ok(step) => EnvReply::Step {
                    flat: step.observation.flat,
                    reward: step.reward,
                    done: step.done,
                    info: step.info,
                }
                .into(),
                Err(e) => EnvResponse::error(e.to_string()),
            },
            EnvCommand::Config => EnvReply::Config(self.env.config().clone()).into(),
            EnvCommand::Close => {
                self.env = SearchEnv::new(self.env.config().clone()).expect("config already validated");
                EnvReply::Closed.into()
            }
        }
    }

    /// Parses and handles one line; malformed input yields an error response.
    pub fn handle_line(&mut self, line: &str) -> EnvResponse {
        match serde_json::from_str::<EnvRequest>(line) {
            Ok(request) => self.handle(request),
            Err(e) => EnvResponse::error(format!("malformed request: {e}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRequest {
    #[serde(default = "version")]
    pub v: u32,
    pub obs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyReply {
    Action { action: f64 },
    Error { message: String },
}

impl PolicyReply {
    pub fn into_action(self) -> Result<f64> {
        match self {
            PolicyReply::Action { action } if action.is_finite() => Ok(action),
            PolicyReply::Action { action } => Err(Error::Policy(format!("non-finite action {action}"))),
            PolicyReply::Error { message } => Err(Error::Policy(message)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub seed: u64,
    #[serde(default)]
    pub config: EnvConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub algorithm: String,
    pub seed: u64,
    #[serde(default)]
    pub config: EnvConfig,
    #[serde(default)]
    pub settings: EvalSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub pdm: Pdm,
    pub start: [f64; 2],
    pub path: Path,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodRequest {
    pub pdm: Pdm,
    pub path: Path,
    #[serde(default)]
    pub config: EnvConfig,
    #[serde(default)]
    pub settings: EvalSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodResponse {
    pub pod: Vec<PodPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtfRequest {
    pub pdm: Pdm,
    pub path: Path,
    /// Seed of the target sample.
    pub seed: u64,
    #[serde(default)]
    pub config: EnvConfig,
    #[serde(default)]
    pub settings: EvalSettings,
}

pub type DtfResponse = DtfResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub algorithms: Vec<String>,
    pub runs: u64,
    pub seed: u64,
    #[serde(default)]
    pub config: EnvConfig,
    #[serde(default)]
    pub settings: EvalSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResponse {
    pub records: Vec<RunRecord>,
    pub summary: Vec<MetricSummary>,
}
