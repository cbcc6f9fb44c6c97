use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mmfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmfs")).args(args).output().expect("spawn mmfs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = p(dir, name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_bump_layout() {
    let o = mmfs(&["gen", "bump:0.0625", "--J", "8", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let vals: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 256);
    assert_eq!(vals.iter().filter(|&&v| v == 16.0).count(), 16);
    assert_eq!(vals.iter().filter(|&&v| v == 0.0).count(), 240);
}

#[test]
fn gen_is_deterministic() {
    let d = TempDir::new().unwrap();
    for name in ["a.csv", "b.csv", "a.bin", "b.bin"] {
        assert_eq!(code(&mmfs(&["gen", "lognormal", "--J", "6", "--seed", "0", "--out", &p(&d, name)])), 0);
    }
    let r = |n| std::fs::read(p(&d, n)).unwrap();
    assert_eq!(r("a.csv"), r("b.csv"));
    assert_eq!(r("a.bin"), r("b.bin"));
}

#[test]
fn gen_unknown_family_is_usage_error() {
    assert_eq!(code(&mmfs(&["gen", "nosuch"])), 2);
    assert_eq!(code(&mmfs(&["gen", "lognormal", "--J", "40"])), 2);
    assert_eq!(code(&mmfs(&["frobnicate"])), 2);
}

#[test]
fn apply_maximal_to_constant() {
    let d = TempDir::new().unwrap();
    let mut text = String::from("index,value\n");
    for i in 0..16 {
        text.push_str(&format!("{i},1\n"));
    }
    let input = write(&d, "w.csv", &text);
    let o = mmfs(&["apply", "M", "--in", &input]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().skip(1).all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 1.0));
    let meta: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(meta["class"], "maximal");
    assert_eq!(meta["cells"], 16);
}

#[test]
fn apply_carleson_single_mode() {
    let d = TempDir::new().unwrap();
    let mut text = String::from("index,re,im\n");
    for j in 0..32 {
        let t = std::f64::consts::TAU * 5.0 * j as f64 / 32.0;
        text.push_str(&format!("{j},{:.17e},{:.17e}\n", t.cos(), t.sin()));
    }
    let input = write(&d, "e.csv", &text);
    let o = mmfs(&["apply", "carleson", "--in", &input]);
    assert_eq!(code(&o), 0);
    for l in String::from_utf8(o.stdout).unwrap().lines().skip(1) {
        let v: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn iterated_maximal_equals_chained_runs() {
    let d = TempDir::new().unwrap();
    let w = p(&d, "w.csv");
    assert_eq!(code(&mmfs(&["gen", "two-bump", "--J", "7", "--seed", "3", "--out", &w])), 0);
    assert_eq!(code(&mmfs(&["apply", "M^k:3", "--in", &w, "--out", &p(&d, "m3.csv")])), 0);
    let mut cur = w.clone();
    for i in 0..3 {
        let next = p(&d, &format!("c{i}.csv"));
        assert_eq!(code(&mmfs(&["apply", "M", "--in", &cur, "--out", &next])), 0);
        cur = next;
    }
    assert_eq!(std::fs::read(p(&d, "m3.csv")).unwrap(), std::fs::read(cur).unwrap());
}

#[test]
fn apply_binary_round_trip() {
    let d = TempDir::new().unwrap();
    let f = p(&d, "f.bin");
    assert_eq!(code(&mmfs(&["gen", "gaussian", "--J", "6", "--seed", "2", "--out", &f])), 0);
    assert_eq!(code(&mmfs(&["apply", "hilbert", "--in", &f, "--out", &p(&d, "h.bin")])), 0);
    let h = mmfs_core::io::read_signal(Path::new(&p(&d, "h.bin"))).unwrap();
    assert_eq!(h.len(), 64);
}

#[test]
fn apply_errors() {
    let d = TempDir::new().unwrap();
    let bad = write(&d, "bad.csv", "index,value\n0,1\n1,1\n2,oops\n3,1\n");
    let o = mmfs(&["apply", "M", "--in", &bad]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 4"));
    let good = write(&d, "good.csv", "index,value\n0,1\n1,2\n");
    assert_eq!(code(&mmfs(&["apply", "nosuch", "--in", &good])), 2);
    assert_eq!(code(&mmfs(&["apply", "M", "--in", &p(&d, "missing.csv")])), 3);
}

#[test]
fn experiment_golden_fs_carleson() {
    let d = TempDir::new().unwrap();
    let out = p(&d, "out.jsonl");
    let o = mmfs(&["experiment", "--config", &fixture("fs_carleson.cfg"), "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.starts_with("FS_CARLESON trials=200 max_ratio="), "{summary}");
    let got = std::fs::read_to_string(&out).unwrap();
    let golden = fixture("fs_carleson.jsonl");
    if std::env::var_os("MMFS_FREEZE").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(golden).unwrap());
}

#[test]
fn experiment_zero_trials_and_overrides() {
    let d = TempDir::new().unwrap();
    let cfg = write(&d, "c.cfg", "kind = FS_M\np = 3\nJ = 5\ntrials = 4\n");
    let out = p(&d, "o.jsonl");
    let o = mmfs(&["experiment", "--config", &cfg, "--out", &out, "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
    assert!(String::from_utf8(o.stdout).unwrap().contains("trials=0"));
    let o = mmfs(&["experiment", "--config", &cfg, "--out", &out, "--p", "2.5", "--seed", "9"]);
    assert_eq!(code(&o), 0);
    let recs = mmfs_core::harness::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r.seed == 9 && r.params["p"] == 2.5));
}

#[test]
fn experiment_rejects_bad_configs() {
    let d = TempDir::new().unwrap();
    let out = p(&d, "o.jsonl");
    for text in ["kind = FS_NOPE\n", "p = 2\n", "kind = FS_M\np = 0.5\n", "kind = FS_MS\ns = 3\n", "kind = FS_M\nbogus\n"] {
        let cfg = write(&d, "c.cfg", text);
        let o = mmfs(&["experiment", "--config", &cfg, "--out", &out]);
        assert_eq!(code(&o), 2, "{text:?}");
        assert!(!Path::new(&out).exists());
    }
    let cfg = write(&d, "c.cfg", "kind = FS_M\n");
    assert_eq!(code(&mmfs(&["experiment", "--config", &cfg, "--out", &out, "--p", "x"])), 2);
}

#[test]
fn experiment_sharpness_records_growth() {
    let d = TempDir::new().unwrap();
    let cfg = write(&d, "s.cfg", "kind = SHARPNESS\nJ = 7\neps = 0.125,0.0625,0.03125\nbudget = 5\n");
    let out = p(&d, "s.jsonl");
    assert_eq!(code(&mmfs(&["experiment", "--config", &cfg, "--out", &out])), 0);
    let recs = mmfs_core::harness::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let last = recs.last().unwrap();
    assert!(last.params["growth_low"].is_number() && last.params["growth_high"].is_number());
}

#[test]
fn search_writes_extremizers() {
    let d = TempDir::new().unwrap();
    let cfg = write(&d, "c.cfg", "kind = FS_MK\nJ = 6\nk = 2\n");
    let out = p(&d, "best.jsonl");
    let o = mmfs(&["search", "--config", &cfg, "--out", &out, "--budget", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let recs = mmfs_core::harness::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let f = recs[0].files["f"].as_str().unwrap();
    assert_eq!(mmfs_core::io::read_signal(Path::new(f)).unwrap().len(), 64);
    assert!(Path::new(recs[0].files["w"].as_str().unwrap()).exists());
    assert_eq!(code(&mmfs(&["search", "--config", &cfg, "--out", &out, "--budget", "0"])), 2);
}

#[test]
fn bp_check_verdicts() {
    let first = |args: &[&str]| {
        let o = mmfs(args);
        assert_eq!(code(&o), 0);
        String::from_utf8(o.stdout).unwrap().split_whitespace().next().unwrap().to_string()
    };
    assert_eq!(first(&["bp-check", "power:1", "--p", "2"]), "DIVERGES");
    assert_eq!(first(&["bp-check", "logpow:2", "--p", "2"]), "CONVERGES");
    assert_eq!(first(&["bp-check", "logpow:1", "--p", "2"]), "DIVERGES");
    assert_eq!(first(&["bp-check", "power:2", "--p", "2", "--condition", "bp"]), "DIVERGES");
    assert_eq!(first(&["bp-check", "power:2", "--p", "3", "--condition", "bp"]), "CONVERGES");
    assert_eq!(code(&mmfs(&["bp-check", "cosh:1", "--p", "2"])), 2);
    assert_eq!(code(&mmfs(&["bp-check", "power:2", "--p", "1"])), 2);
}
