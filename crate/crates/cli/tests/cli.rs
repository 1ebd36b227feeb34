//! End-to-end runs of the `nhlab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nhlab_cli::COLUMNS;

fn nhlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhlab")).args(args).env_remove("NHLAB_WORKERS").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SPECTRUM: &str = "[model]\nkind = \"AB_FLUX\"\nL = 12\ngamma_scale = \"1.5*sqrt(3)i\"\ndisorder = \"PHASE_CORRELATED\"\n\
[seeds]\nbase = 5\ncount = 3\n[output]\ndump_spectra = true\n";

#[test]
fn spectrum_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SPECTRUM);
    let out = dir.path().join("out");
    let o = nhlab(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), COLUMNS.join(","));
    let eps_rows = csv.lines().filter(|l| l.contains(",eps,")).count();
    assert_eq!(eps_rows, 3 * 24);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "spectrum");
    assert_eq!(summary["failed"], false);
    assert_eq!(summary["run"]["config_sha256"].as_str().unwrap().len(), 64);
    let blocks = summary["spectra"]["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 3);
    let total: u64 = blocks.iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(fs::metadata(out.join("spectra.bin")).unwrap().len(), 16 * total);
    assert!(out.join("config.resolved").exists());
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SPECTRUM);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(nhlab(&["spectrum", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let resolved = a.join("config.resolved");
    let o = nhlab(&["spectrum", "--config", resolved.to_str().unwrap(), "--out", b.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["results.csv", "spectra.bin"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SPECTRUM);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(nhlab(&["spectrum", "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "5"]).status.success());
    assert!(nhlab(&["spectrum", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "6"]).status.success());
    assert_ne!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"HN\"\nL = 1\ndisorder = \"PHASE_CORRELATED\"\nbogus = 3\n[seeds]\ncount = 0\n",
    );
    let o = nhlab(&["spectrum", "--config", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    for needle in ["bogus", "L must be at least 2", "PHASE_CORRELATED", "count"] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
    assert!(!dir.path().join("x").exists());
}

#[test]
fn experiment_in_config_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("experiment = \"renyi_scaling\"\n{SPECTRUM}"));
    assert!(!nhlab(&["spectrum", "--config", &cfg]).status.success());
}

#[test]
fn presets_are_listed_and_unknown_ones_rejected() {
    let o = nhlab(&["--list-presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for (name, _) in nhlab_cli::PRESETS {
        assert!(text.contains(&format!("### {name}")));
    }
    let o = nhlab(&["spectrum", "--preset", "no-such-preset"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
}
