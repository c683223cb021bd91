// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{paper_config, small_config};
use gridrep::pfr::ActionKind;
use gridrep::sim::{compare_strategies, run_simulation};
use gridrep::strategy::StrategyKind;
use gridrep::workload::{write_requests_jsonl, Request};
use gridrep::{FileId, NodeId};

#[test]
fn report_bounds_hold() {
    let cfg = paper_config(21);
    let run = compare_strategies(&cfg, &StrategyKind::ALL).unwrap();
    let max_tier = run.initial.topology.tree().max_tier() as f64;
    for r in &run.runs {
        let mut prev = None;
        for m in &r.report.intervals {
            assert!(m.replica_hits <= m.requests);
            assert!(m.mean_hops <= max_tier);
            assert!((0.0..=1.0).contains(&m.storage_used_fraction));
            assert!(m.avg_replica_usage >= 0.0);
            if let Some((c, h, e)) = prev {
                assert!(m.cum_replicas_created >= c && m.cum_replica_hits >= h && m.cum_evictions >= e);
            }
            prev = Some((m.cum_replicas_created, m.cum_replica_hits, m.cum_evictions));
        }
        for h in run.initial.topology.headers() {
            let free = r.final_catalog.free_space[h];
            assert!(free <= run.initial.catalog.capacity(*h));
        }
    }
}

#[test]
fn duplicate_strategies_give_identical_columns() {
    let cfg = small_config(2, 6, 40);
    let run = compare_strategies(&cfg, &[StrategyKind::Pfr, StrategyKind::Pfr]).unwrap();
    assert_eq!(run.runs[0].report, run.runs[1].report);
    let single = run_simulation(&{
        let mut c = cfg.clone();
        c.strategy = StrategyKind::Pfr;
        c
    })
    .unwrap();
    assert_eq!(single.runs[0].report, run.runs[0].report);
}

#[test]
fn no_requests_means_no_pfr_candidates() {
    let mut cfg = small_config(1, 5, 0);
    cfg.strategy = StrategyKind::Pfr;
    let run = run_simulation(&cfg).unwrap();
    let actions = &run.runs[0].actions;
    assert_eq!(actions.len(), 5);
    assert!(actions.iter().all(|a| a.action.kind == ActionKind::SkippedNoCandidate));
}

#[test]
fn unlimited_capacity_fast_spread_hops_never_rise_and_pfr_never_evicts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replay.jsonl");
    let pattern = [(4, 1), (6, 3), (3, 2), (5, 5), (4, 4), (6, 1), (3, 3), (5, 2)];
    let requests: Vec<Request> = (0..6)
        .flat_map(|i| {
            pattern.iter().map(move |&(n, f)| Request { interval: i, requester: NodeId(n), file: FileId(f) })
        })
        .collect();
    write_requests_jsonl(&path, &requests).unwrap();
    let mut cfg = small_config(1, 6, 8);
    cfg.scenario.tier_capacities = Some(vec![1_000_000, 1_000_000, 1_000_000]);
    cfg.workload.replay = Some(path);
    cfg.pfr.gamma = 0.5;
    let run = compare_strategies(&cfg, &[StrategyKind::FastSpread, StrategyKind::Pfr]).unwrap();
    assert_eq!(run.requests, requests);
    let hops: Vec<f64> = run.runs[0].report.intervals.iter().map(|m| m.mean_hops).collect();
    assert!(hops.windows(2).all(|w| w[1] <= w[0]), "{hops:?}");
    assert_eq!(hops.last(), Some(&0.0));
    assert!(run.runs[1].actions.iter().all(|a| a.action.kind != ActionKind::Evicted));
    assert!(run.runs[1].report.last().unwrap().cum_replicas_created > 0);
}
