//! Serving layer for the search toolkit.
//!
//! * [`ndjson`] exposes the search environment to external trainers over
//!   newline-delimited JSON on stdio or TCP, one environment per connection.
//! * [`http`] is an axum service for PDM generation, planning, evaluation,
//!   comparisons and environment sessions.
//! * [`ops`] holds the blocking operations behind both, so callers that want
//!   the same results in-process can use them directly.

pub mod http;
pub mod ndjson;
pub mod ops;

pub use http::{router, serve_http};
pub use ndjson::{serve_connection, serve_stdio, serve_tcp};

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Core(#[from] wisar_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
