// SPDX-License-Identifier: Apache-2.0

//! C ABI over the gridrep simulator.
//!
//! Configs and reports are opaque handles created and freed through this
//! API. Every fallible call returns a [`GridrepStatus`]; on failure the
//! message is available from [`gridrep_last_error_message`] on the same
//! thread. Strings returned to the caller are freed with
//! [`gridrep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridrep::config::SimConfig;
use gridrep::fuzzy::{infer_ri, FuzzySystemConfig};
use gridrep::golden::run_golden;
use gridrep::metrics::IntervalMetrics;
use gridrep::sim::{run_simulation, SimRun};
use gridrep::strategy::StrategyKind;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridrepStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Runtime = 4,
    OutOfRange = 5,
    GoldenFailed = 6,
    Panic = 7,
}

/// Opaque run configuration.
pub struct GridrepConfig {
    inner: SimConfig,
}

/// Opaque result of a run.
pub struct GridrepReport {
    run: SimRun,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: GridrepStatus, msg: impl Into<String>) -> GridrepStatus {
    set_error(msg);
    status
}

fn from_core(err: gridrep::Error) -> GridrepStatus {
    let status = if err.is_config() { GridrepStatus::Config } else { GridrepStatus::Runtime };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> GridrepStatus) -> GridrepStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(GridrepStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, GridrepStatus> {
    if s.is_null() {
        return Err(fail(GridrepStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(GridrepStatus::InvalidUtf8, "string is not valid UTF-8"))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gridrep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gridrep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_default(out: *mut *mut GridrepConfig) -> GridrepStatus {
    guard(|| {
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        *out = Box::into_raw(Box::new(GridrepConfig { inner: SimConfig::default() }));
        GridrepStatus::Ok
    })
}

/// Parses and validates a TOML configuration document.
///
/// # Safety
/// `toml` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_from_toml(toml: *const c_char, out: *mut *mut GridrepConfig) -> GridrepStatus {
    guard(|| {
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SimConfig::from_toml_str(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GridrepConfig { inner }));
                GridrepStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `config` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_free(config: *mut GridrepConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle; `strategy` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_set_strategy(
    config: *mut GridrepConfig,
    strategy: *const c_char,
) -> GridrepStatus {
    guard(|| {
        let Some(cfg) = config.as_mut() else {
            return fail(GridrepStatus::NullArgument, "config is null");
        };
        let name = match read_str(strategy) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match name.parse::<StrategyKind>() {
            Ok(k) => {
                cfg.inner.strategy = k;
                GridrepStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_set_seed(config: *mut GridrepConfig, seed: u64) -> GridrepStatus {
    guard(|| match config.as_mut() {
        Some(cfg) => {
            cfg.inner.seed = seed;
            GridrepStatus::Ok
        }
        None => fail(GridrepStatus::NullArgument, "config is null"),
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gridrep_config_set_intervals(config: *mut GridrepConfig, intervals: u32) -> GridrepStatus {
    guard(|| match config.as_mut() {
        Some(_) if intervals == 0 => fail(GridrepStatus::Config, "intervals must be >= 1"),
        Some(cfg) => {
            cfg.inner.intervals = intervals;
            GridrepStatus::Ok
        }
        None => fail(GridrepStatus::NullArgument, "config is null"),
    })
}

/// Runs the configured strategy.
///
/// # Safety
/// `config` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_run(config: *const GridrepConfig, out: *mut *mut GridrepReport) -> GridrepStatus {
    guard(|| {
        let Some(cfg) = config.as_ref() else {
            return fail(GridrepStatus::NullArgument, "config is null");
        };
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        match run_simulation(&cfg.inner) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(GridrepReport { run }));
                GridrepStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_free(report: *mut GridrepReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of intervals in the report, 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_interval_count(report: *const GridrepReport) -> u32 {
    report.as_ref().map_or(0, |r| r.run.runs[0].report.intervals.len() as u32)
}

unsafe fn interval_field<T>(
    report: *const GridrepReport,
    interval: u32,
    out: *mut T,
    get: impl FnOnce(&IntervalMetrics) -> T,
) -> GridrepStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(GridrepStatus::NullArgument, "report is null");
        };
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        match r.run.runs[0].report.intervals.get(interval as usize) {
            Some(m) => {
                *out = get(m);
                GridrepStatus::Ok
            }
            None => fail(GridrepStatus::OutOfRange, format!("interval {interval} out of range")),
        }
    })
}

/// Cumulative replica hits per replica created, up to `interval`.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_avg_replica_usage(
    report: *const GridrepReport,
    interval: u32,
    out: *mut f64,
) -> GridrepStatus {
    interval_field(report, interval, out, |m| m.avg_replica_usage)
}

/// Cumulative replicas created up to `interval`.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_replicas_created(
    report: *const GridrepReport,
    interval: u32,
    out: *mut u64,
) -> GridrepStatus {
    interval_field(report, interval, out, |m| m.cum_replicas_created)
}

/// Mean hops of the requests in `interval`.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_mean_hops(
    report: *const GridrepReport,
    interval: u32,
    out: *mut f64,
) -> GridrepStatus {
    interval_field(report, interval, out, |m| m.mean_hops)
}

/// The full metrics report as JSON. Free the string with
/// [`gridrep_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_report_to_json(report: *const GridrepReport, out: *mut *mut c_char) -> GridrepStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(GridrepStatus::NullArgument, "report is null");
        };
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        match serde_json::to_string(&r.run.runs[0].report) {
            Ok(s) => {
                *out = CString::new(s).expect("json has no NUL").into_raw();
                GridrepStatus::Ok
            }
            Err(e) => fail(GridrepStatus::Runtime, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gridrep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// RI for raw inputs under the default fuzzy system. Inputs are expected in
/// [0, 1]; `usage_ratio` is the already normalised usage.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gridrep_infer_ri(
    level: f64,
    file_size: f64,
    usage_ratio: f64,
    node_size: f64,
    out: *mut f64,
) -> GridrepStatus {
    guard(|| {
        if out.is_null() {
            return fail(GridrepStatus::NullArgument, "out is null");
        }
        match infer_ri(level, file_size, usage_ratio, node_size, &FuzzySystemConfig::default()) {
            Ok(v) => {
                *out = v;
                GridrepStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Runs the worked example; returns `Ok` when every case passes and
/// `GoldenFailed` otherwise.
#[no_mangle]
pub extern "C" fn gridrep_golden() -> GridrepStatus {
    guard(|| match run_golden() {
        Ok(cases) => match cases.iter().find(|c| !c.passed) {
            None => GridrepStatus::Ok,
            Some(c) => fail(GridrepStatus::GoldenFailed, format!("{}: {}", c.name, c.detail)),
        },
        Err(e) => fail(GridrepStatus::GoldenFailed, e.to_string()),
    })
}
