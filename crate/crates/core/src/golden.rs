// SPDX-License-Identifier: Apache-2.0

//! The hand-traced worked example: six singleton clusters, five unit files,
//! and a fixed RI matrix. Used by `gridrep golden` and the acceptance suite.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::ids::{FileId, NodeId};
use crate::pfr::{select_primary, ActionKind, PfrParams, ReplicationAction, Trigger};
use crate::scenario::{builtin, WORKED_DEPENDENCY};
use crate::sim::{inject_example_state, run_injected_interval};
use crate::state::{GridState, RiMatrix};

/// Rows are headers 1..=6, columns files 1..=5.
pub const WORKED_RI: [[f64; 5]; 6] = [
    [3.91, 3.96, 2.70, 4.71, 4.16],
    [3.20, 3.40, 2.78, 4.10, 5.00],
    [3.80, 3.90, 2.60, 4.60, 4.12],
    [3.60, 3.70, 2.40, 4.40, 3.90],
    [3.91, 3.96, 2.70, 4.70, 4.16],
    [4.90, 3.20, 5.10, 3.30, 4.30],
];

/// Worked-example state with the RI matrix, dependency matrix and the
/// given usage ratios injected.
pub fn worked_state(usage: &[(NodeId, FileId, f64)]) -> Result<(GridState, RiMatrix)> {
    let mut state = builtin("worked-example")?.build()?;
    let ri = inject_example_state(
        &mut state,
        WORKED_RI.iter().map(|r| r.to_vec()).collect(),
        WORKED_DEPENDENCY.iter().map(|r| r.to_vec()).collect(),
        usage,
    )?;
    Ok((state, ri))
}

pub fn expected_actions() -> Vec<ReplicationAction> {
    let p = |f, n, t| ReplicationAction::new(ActionKind::Placed, FileId(f), NodeId(n), t);
    let dep = Trigger::Dependent(FileId(3));
    vec![
        p(3, 2, Trigger::Primary),
        p(3, 6, Trigger::Primary),
        p(1, 2, dep),
        p(1, 6, dep),
        p(2, 2, dep),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldenCase {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Runs the worked example and its fallback variant.
pub fn run_golden() -> Result<Vec<GoldenCase>> {
    let params = PfrParams::default();
    let mut cases = Vec::new();

    let start = Instant::now();
    let (mut state, ri) = worked_state(&[(NodeId(6), FileId(3), 2.0)])?;
    let (log, metrics) = run_injected_interval(&mut state, &ri, &params)?;
    let got: Vec<ReplicationAction> = log.iter().map(|r| r.action).collect();
    let elapsed = start.elapsed();
    let want = expected_actions();
    let evictions = got.iter().filter(|a| a.kind == ActionKind::Evicted).count();
    cases.push(GoldenCase {
        name: "worked-example action log",
        passed: got == want && evictions == 0 && metrics.replicas_created == 5 && elapsed < Duration::from_secs(1),
        detail: format!("{} actions, {} placed, {evictions} evicted", got.len(), metrics.replicas_created),
        elapsed,
    });

    let start = Instant::now();
    let (state, ri) = worked_state(&[(NodeId(6), FileId(3), 1.9), (NodeId(2), FileId(5), 2.0)])?;
    let primary = select_primary(&ri, &state.catalog, &state.usage, &params);
    let elapsed = start.elapsed();
    cases.push(GoldenCase {
        name: "worked-example fallback primary",
        passed: matches!(primary, Some((NodeId(2), FileId(5), _))),
        detail: format!("primary {primary:?}"),
        elapsed,
    });
    Ok(cases)
}
