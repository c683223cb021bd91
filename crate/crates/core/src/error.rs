// SPDX-License-Identifier: Apache-2.0

use crate::ids::{FileId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown file {0}")]
    UnknownFile(FileId),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: String, actual: String },
    #[error("node {node} has {free} free units, {needed} needed")]
    InsufficientSpace { node: NodeId, needed: u64, free: u64 },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors that come from a bad configuration rather than from
    /// the environment.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Topology(_) | Error::Dimension { .. } | Error::Toml(_)
        )
    }
}
