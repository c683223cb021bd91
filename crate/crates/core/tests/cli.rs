// SPDX-License-Identifier: Apache-2.0

use std::process::Command;

fn gridrep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridrep"))
}

#[test]
fn golden_exits_zero() {
    let out = gridrep().arg("golden").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{text}");
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[scenario]\nbuiltin = \"worked-example\"\n[workload]\nrequests_per_interval = 20\n").unwrap();
    let out = dir.path().join("out");
    let status = gridrep()
        .args(["run", "--strategy", "cascading", "--seed", "4", "--intervals", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["metrics.csv", "report.json", "actions.jsonl", "requests.jsonl"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("cascading,0,"));
    assert_eq!(std::fs::read_to_string(out.join("requests.jsonl")).unwrap().lines().count(), 60);
}

#[test]
fn compare_emits_rows_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "intervals = 2\n[scenario]\nbuiltin = \"worked-example\"\n").unwrap();
    let status = gridrep()
        .args(["compare", "--strategies", "cascading,fast-spread,phfs_simplified,pfr", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[pfr]\ngamma = -3.0\n").unwrap();
    let out = gridrep().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let missing = gridrep()
        .args(["run", "--config", "/nonexistent/x.toml", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let zero = gridrep().args(["run", "--intervals", "0", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn shipped_configs_load() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["paper-s4.toml", "worked-example.toml"] {
        let cfg = gridrep::config::SimConfig::load(&root.join(name)).unwrap();
        cfg.scenario.resolve().unwrap().build().unwrap();
    }
    let shipped = gridrep::config::SimConfig::load(&root.join("paper-s4.toml")).unwrap();
    assert_eq!(shipped.fuzzy, gridrep::fuzzy::FuzzySystemConfig::default());
    assert_eq!(shipped.workload, gridrep::workload::WorkloadParams::default());
}
