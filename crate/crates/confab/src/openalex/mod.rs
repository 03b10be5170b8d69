//! Scholarly-metadata client with a content-addressed fixture cache.

mod cache;
mod client;

use std::path::PathBuf;

use thiserror::Error;

pub use cache::{write_atomic, CacheEntry, FixtureCache, Request};
pub use client::{ClientConfig, OpenAlexClient, DEFAULT_BASE_URL, DEFAULT_RATE_LIMIT, MAILTO_ENV};

#[derive(Debug, Clone, Error)]
pub enum OpenAlexError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("fixture miss {fingerprint} for {request}")]
    FixtureMiss { fingerprint: String, request: String },
    #[error("HTTP {status} for {request}")]
    Http { status: u16, request: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("undecodable response {fingerprint}: {reason}")]
    Decode { fingerprint: String, reason: String },
    #[error("cache entry {}: {reason}", .path.display())]
    Cache { path: PathBuf, reason: String },
}
