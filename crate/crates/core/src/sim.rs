// SPDX-License-Identifier: Apache-2.0

//! Interval loop, strategy comparison and run outputs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::ids::{FileId, NodeId};
use crate::metrics::{write_csv, ActionRecord, IntervalMetrics, MetricsRecorder, MetricsReport};
use crate::pfr::{apply_actions, decide, run_interval, PfrParams, ReplicationAction};
use crate::scenario::ScenarioSpec;
use crate::state::{CatalogSnapshot, DependencyMatrix, GridState, RiMatrix};
use crate::strategy::{serve_request, Baseline, StrategyKind};
use crate::workload::{read_requests_jsonl, write_requests_jsonl, Request, WorkloadGenerator};

/// One strategy's run over a shared request stream.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub strategy: StrategyKind,
    pub report: MetricsReport,
    pub actions: Vec<ActionRecord>,
    pub final_catalog: CatalogSnapshot,
}

/// A scenario, its request stream, and the runs made over it.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub scenario: ScenarioSpec,
    pub initial: GridState,
    pub requests: Vec<Request>,
    pub runs: Vec<RunOutput>,
}

/// Builds the scenario and its request stream.
pub fn prepare(cfg: &SimConfig) -> Result<(ScenarioSpec, GridState, Vec<Request>)> {
    cfg.validate()?;
    let spec = cfg.scenario.resolve()?;
    let state = spec.build()?;
    let requests = match &cfg.workload.replay {
        Some(path) => load_replay(path, &state, cfg.intervals)?,
        None => generate_requests(cfg, &state)?,
    };
    Ok((spec, state, requests))
}

pub fn generate_requests(cfg: &SimConfig, state: &GridState) -> Result<Vec<Request>> {
    let mut generator = WorkloadGenerator::new(&cfg.workload, &state.topology, &state.dependency, cfg.seed)?;
    Ok((0..cfg.intervals).flat_map(|i| generator.generate_interval(i)).collect())
}

fn load_replay(path: &Path, state: &GridState, intervals: u32) -> Result<Vec<Request>> {
    let mut requests = read_requests_jsonl(path)
        .map_err(|e| Error::config(format!("replay {}: {e}", path.display())))?;
    for r in &requests {
        if !state.topology.is_header(r.requester) {
            return Err(Error::config(format!("replayed requester {} is not a cluster header", r.requester)));
        }
        if r.file.0 == 0 || r.file.index() >= state.files.len() {
            return Err(Error::config(format!("replayed file {} does not exist", r.file)));
        }
    }
    requests.retain(|r| r.interval < intervals);
    requests.sort_by_key(|r| r.interval);
    Ok(requests)
}

/// Runs one strategy from `initial` over `requests` (sorted by interval).
/// After every interval the catalog invariants are checked and the action
/// log so far is replayed onto a shadow catalog that must match.
pub fn run_strategy(
    cfg: &SimConfig,
    strategy: StrategyKind,
    initial: &GridState,
    requests: &[Request],
) -> Result<RunOutput> {
    let mut state = initial.clone();
    let mut shadow = initial.catalog.clone();
    let mut baseline = Baseline::new(strategy, cfg.cascade, cfg.pfr.dependency_threshold);
    let mut recorder = MetricsRecorder::new();
    let mut report = MetricsReport::new(strategy);
    let mut log = Vec::new();
    let mut pending = requests.iter().peekable();

    for interval in 0..cfg.intervals {
        recorder.begin(interval);
        let mut idx = 0u32;
        while let Some(r) = pending.next_if(|r| r.interval == interval) {
            let served = serve_request(&state.topology, &state.catalog, r.requester, r.file)?;
            recorder.request(served.hops, served.is_replica_hit());
            if let Some(h) = state.topology.header_of(r.requester) {
                state.usage.record(h, r.file)?;
            }
            if strategy != StrategyKind::Pfr {
                let acts = baseline.on_request(&mut state, r.requester, r.file, served)?;
                record(&mut log, &mut recorder, strategy, interval, Some(idx), acts);
            }
            idx += 1;
        }
        let acts = if strategy == StrategyKind::Pfr {
            run_interval(&mut state, &cfg.fuzzy, &cfg.pfr)?.1
        } else {
            let acts = baseline.on_interval_end(&mut state)?;
            state.usage.end_interval();
            acts
        };
        record(&mut log, &mut recorder, strategy, interval, None, acts);
        report.intervals.push(recorder.finish(&state.catalog));

        state.catalog.check_invariants()?;
        let start = log.partition_point(|a: &ActionRecord| a.interval < interval);
        apply_actions(&mut shadow, log[start..].iter().map(|a| &a.action))?;
        if shadow != state.catalog {
            return Err(Error::Usage(format!("{strategy}: action log replay diverged at interval {interval}")));
        }
    }
    Ok(RunOutput { strategy, report, actions: log, final_catalog: state.catalog.snapshot() })
}

fn record(
    log: &mut Vec<ActionRecord>,
    recorder: &mut MetricsRecorder,
    strategy: StrategyKind,
    interval: u32,
    after_request: Option<u32>,
    actions: Vec<ReplicationAction>,
) {
    recorder.actions(&actions);
    log.extend(actions.into_iter().map(|action| ActionRecord { strategy, interval, after_request, action }));
}

/// Runs the configured strategy.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimRun> {
    compare_strategies(cfg, &[cfg.strategy])
}

/// Runs every strategy over the same scenario and request stream, one
/// thread per strategy.
pub fn compare_strategies(cfg: &SimConfig, strategies: &[StrategyKind]) -> Result<SimRun> {
    let (scenario, initial, requests) = prepare(cfg)?;
    let runs = std::thread::scope(|s| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&k| {
                let (initial, requests) = (&initial, &requests);
                s.spawn(move || run_strategy(cfg, k, initial, requests))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SimRun { scenario, initial, requests, runs })
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a SimConfig,
    scenario: &'a ScenarioSpec,
    clusters: usize,
    reports: Vec<&'a MetricsReport>,
    final_catalogs: Vec<&'a CatalogSnapshot>,
}

/// Writes `metrics.csv`, `report.json`, `actions.jsonl` and
/// `requests.jsonl` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &SimConfig, run: &SimRun) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let reports: Vec<MetricsReport> = run.runs.iter().map(|r| r.report.clone()).collect();
    write_csv(std::fs::File::create(dir.join("metrics.csv"))?, &reports)?;

    let file = ReportFile {
        config: cfg,
        scenario: &run.scenario,
        clusters: run.initial.topology.clusters().len(),
        reports: run.runs.iter().map(|r| &r.report).collect(),
        final_catalogs: run.runs.iter().map(|r| &r.final_catalog).collect(),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut out, &file)?;
    out.write_all(b"\n")?;
    out.flush()?;

    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("actions.jsonl"))?);
    for r in &run.runs {
        for a in &r.actions {
            serde_json::to_writer(&mut out, a)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;

    write_requests_jsonl(&dir.join("requests.jsonl"), &run.requests)
}

/// Replaces the dependency matrix and the given usage ratios, and returns
/// `ri_rows` as an RI matrix over the state's headers for use in place of a
/// recomputed one.
pub fn inject_example_state(
    state: &mut GridState,
    ri_rows: Vec<Vec<f64>>,
    dependency_rows: Vec<Vec<f64>>,
    usage: &[(NodeId, FileId, f64)],
) -> Result<RiMatrix> {
    if dependency_rows.len() != state.files.len() {
        return Err(Error::Dimension {
            expected: format!("{0}x{0} dependency matrix", state.files.len()),
            actual: format!("{} rows", dependency_rows.len()),
        });
    }
    let ri = RiMatrix::from_rows(state.topology.headers(), ri_rows)?;
    if ri.file_count() != state.files.len() {
        return Err(Error::Dimension {
            expected: format!("{} RI columns", state.files.len()),
            actual: ri.file_count().to_string(),
        });
    }
    state.dependency = DependencyMatrix::new(dependency_rows)?;
    for &(h, f, ratio) in usage {
        state.usage.set_usage_ratio(h, f, ratio)?;
    }
    Ok(ri)
}

/// One PFR decision round on an injected RI matrix, with its metrics.
pub fn run_injected_interval(
    state: &mut GridState,
    ri: &RiMatrix,
    params: &PfrParams,
) -> Result<(Vec<ActionRecord>, IntervalMetrics)> {
    let mut recorder = MetricsRecorder::new();
    recorder.begin(0);
    let actions = decide(state, ri, params)?;
    let mut log = Vec::new();
    record(&mut log, &mut recorder, StrategyKind::Pfr, 0, None, actions);
    Ok((log, recorder.finish(&state.catalog)))
}
