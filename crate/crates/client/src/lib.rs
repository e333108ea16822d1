//! Thin clients.
//!
//! * [`HttpClient`] calls the HTTP/JSON service.
//! * [`EnvClient`] drives a remote environment over the newline-delimited
//!   protocol, synchronously, the way a trainer would.
//! * [`PolicyClient`] queries an external policy server and plugs into the
//!   evaluation harness as a [`wisar_core::eval::Policy`].

mod env;
mod http;
mod policy;

pub use env::{EnvClient, RemoteStep};
pub use http::HttpClient;
pub use policy::{PolicyClient, POLICY_ALGORITHM};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("http error: {0}")]
    Http(#[from] reqwest::Error),
    #[error("service returned {status}: {message}")]
    Status { status: u16, message: String },
    #[error("server error: {0}")]
    Remote(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;
