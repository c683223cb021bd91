// SPDX-License-Identifier: Apache-2.0

//! Compiles and runs a small C program against the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "gridrep.h"

int main(void) {
    GridrepConfig *cfg = NULL;
    GridrepReport *report = NULL;
    double usage = -1.0;
    if (gridrep_config_from_toml("intervals = 2\n[scenario]\nbuiltin = \"worked-example\"\n", &cfg) != GRIDREP_STATUS_OK) return 10;
    if (gridrep_config_set_strategy(cfg, "cascading") != GRIDREP_STATUS_OK) return 11;
    if (gridrep_run(cfg, &report) != GRIDREP_STATUS_OK) return 12;
    if (gridrep_report_interval_count(report) != 2) return 13;
    if (gridrep_report_avg_replica_usage(report, 1, &usage) != GRIDREP_STATUS_OK || usage < 0.0) return 14;
    if (gridrep_config_set_strategy(cfg, "nope") != GRIDREP_STATUS_CONFIG) return 15;
    if (gridrep_last_error_message() == NULL) return 16;
    if (gridrep_golden() != GRIDREP_STATUS_OK) return 17;
    gridrep_report_free(report);
    gridrep_config_free(cfg);
    printf("ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libgridrep_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(&dir);
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gridrep-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
