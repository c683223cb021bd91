// SPDX-License-Identifier: Apache-2.0

//! Multi-tier data grid replication simulator.
//!
//! The crate models a tiered storage tree whose nodes are grouped into
//! clusters, scores (cluster header, file) pairs with a two-rule fuzzy
//! system, and drives a predictive replication engine alongside classical
//! request-driven strategies over a seeded synthetic workload.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fuzzy;
pub mod golden;
pub mod ids;
pub mod metrics;
pub mod pfr;
pub mod scenario;
pub mod sim;
pub mod state;
pub mod strategy;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
pub use ids::{FileId, NodeId};
