use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_wavecone-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let k = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

const SMALL_GRID: &str = "
dimension = 3
[grid]
r_max = 12.0
dr = 0.03125
[run]
t = 4.0
";

#[test]
fn simulate_zero_data_is_global_with_zero_energy() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), &format!("{SMALL_GRID}\n[data]\nkind = \"zero\"\n"), &["simulate"]);
    assert_ok(&out);
    let summary = json(dir.path(), "summary.json");
    assert_eq!(summary["status"], "global");
    assert_eq!(summary["t_end_or_blowup"], 4.0);
    let energy = read(dir.path(), "energy.csv");
    assert!(energy.starts_with("t,kinetic,gradient,potential,total\n"));
    let total = column(&energy, "total");
    assert!(total.len() > 2 && total.iter().all(|&e| e == 0.0));
    assert!(read(dir.path(), "snapshots.csv").starts_with("t,r,u,ut\n"));
    let manifest = json(dir.path(), "manifest.json");
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["seed"], 42);
}

#[test]
fn soliton_energy_law_row_matches_the_lorentz_factor() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), &format!("{SMALL_GRID}\n[diagnostics]\nell_list = [0.0, 0.5]\n"), &["soliton"]);
    assert_ok(&out);
    let table = read(dir.path(), "energy_law.csv");
    assert!(table.starts_with("ell,energy,ratio,predicted,rel_error\n"));
    let (ell, ratio) = (column(&table, "ell"), column(&table, "ratio"));
    assert_eq!(ell, vec![0.0, 0.5]);
    assert!((ratio[0] - 1.0).abs() <= 1e-2);
    let target = 1.0 / 0.75f64.sqrt();
    assert!((ratio[1] - target).abs() <= 1e-2 * target, "{}", ratio[1]);
    let orders = column(&read(dir.path(), "residual.csv").replace(",\n", ",0\n"), "order");
    assert!(orders[1..].iter().all(|o| (1.7..=2.3).contains(o)), "{orders:?}");
}

#[test]
fn exterior_defect_decreases_for_small_data() {
    let dir = TempDir::new().unwrap();
    let cfg = "
dimension = 3
[grid]
r_max = 24.0
dr = 0.015625
[data]
kind = \"bump\"
amplitude = 0.05
center = 0.0
width = 1.0
[run]
t = 20.0
[diagnostics]
a_list = [0.0, 1.0]
";
    assert_ok(&lab(dir.path(), cfg, &["exterior"]));
    let csv = read(dir.path(), "defect.csv");
    assert!(csv.starts_with("a,t,value\n"));
    let (a, t, v) = (column(&csv, "a"), column(&csv, "t"), column(&csv, "value"));
    let tail: Vec<f64> = (0..a.len()).filter(|&i| a[i] == 0.0 && t[i] >= 5.0).map(|i| v[i]).collect();
    assert_eq!(tail.len(), 16);
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{tail:?}");
    assert_eq!(a.iter().filter(|&&x| x == 1.0).count(), 21);
    let summary = json(dir.path(), "summary.json");
    assert_eq!(summary["defect_series"].as_array().unwrap().len(), 42);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let cfg =
        format!("{SMALL_GRID}\n[data]\nkind = \"random\"\nradius = 2.0\n[diagnostics]\na_list = [0.0, 0.5, 1.0]\n");
    let runs: Vec<TempDir> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = TempDir::new().unwrap();
            assert_ok(&lab(dir.path(), &cfg, &["exterior", "--seed", "7", "--threads", threads]));
            dir
        })
        .collect();
    for name in ["defect.csv", "scattering.csv", "summary.json"] {
        assert_eq!(read(runs[0].path(), name), read(runs[1].path(), name), "{name}");
    }
    let other = TempDir::new().unwrap();
    assert_ok(&lab(other.path(), &cfg, &["exterior", "--seed", "8"]));
    assert_ne!(read(runs[0].path(), "scattering.csv"), read(other.path(), "scattering.csv"));
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    serde_json::from_str(stderr.trim()).unwrap()
}

#[test]
fn invalid_configs_fail_with_one_json_line() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        "dimension = 6\n",
        "[grid]\nr_max = -1.0\n",
        "[scheme]\ncfl = 0.9\n",
        "[run]\nt = 0.0\n",
        "unknown = 1\n",
        "[data]\nkind = \"csv\"\npath = \"missing.csv\"\n",
        "[diagnostics]\nell_list = [1.0]\n",
        "dimension = \"three\"\n",
    ] {
        let out = lab(dir.path(), cfg, &["simulate"]);
        assert_eq!(out.status.code(), Some(2), "{cfg}");
        let err = error_line(&out);
        assert_eq!(err["error"], "configuration", "{cfg}");
        assert!(!err["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn channels_rejects_other_dimensions() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), "dimension = 4\n", &["channels"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "configuration");
}

#[test]
fn accuracy_failure_names_the_report() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), "[diagnostics]\nroundtrip_tolerance = 1e-9\n", &["radiation"]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_line(&out);
    assert_eq!(err["error"], "accuracy");
    let report = PathBuf::from(err["report"].as_str().unwrap());
    let body: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(body["passed"], false);
    assert_eq!(json(dir.path(), "manifest.json")["passed"], false);
}

#[test]
fn radiation_round_trip_passes_by_default() {
    let dir = TempDir::new().unwrap();
    assert_ok(&lab(dir.path(), "", &["radiation"]));
    let report = json(dir.path(), "report.json");
    assert!(report["roundtrip_rel_l2"].as_f64().unwrap() <= 1e-2);
    assert!(report["isometry_rel_error"].as_f64().unwrap() <= 1e-2);
    for name in ["profile.csv", "roundtrip.csv"] {
        let csv = read(dir.path(), name);
        assert!(csv.starts_with("eta,G,g\n"));
        assert!(column(&csv, "G").len() > 100);
    }
}

#[test]
fn custom_csv_data_on_the_grid_nodes_reproduce_the_built_in_bump() {
    let dir = TempDir::new().unwrap();
    let bump = |r: f64| if r < 1.0 { 0.05 * (1.0 - r * r).powi(6) } else { 0.0 };
    let mut rows = String::from("r,u,ut\n");
    for i in 0..=64 {
        let r = i as f64 / 32.0;
        rows.push_str(&format!("{r},{},0\n", bump(r)));
    }
    std::fs::write(dir.path().join("data.csv"), rows).unwrap();
    assert_ok(&lab(dir.path(), &format!("{SMALL_GRID}\n[data]\nkind = \"csv\"\npath = \"data.csv\"\n"), &["simulate"]));
    let from_csv = column(&read(dir.path(), "energy.csv"), "total");

    let builtin = "[data]\nkind = \"bump\"\namplitude = 0.05\ncenter = 0.0\nwidth = 1.0\n";
    assert_ok(&lab(dir.path(), &format!("{SMALL_GRID}\n{builtin}"), &["simulate"]));
    let reference = column(&read(dir.path(), "energy.csv"), "total");
    assert_eq!(from_csv.len(), reference.len());
    assert!(reference[0] > 0.0);
    for (a, b) in from_csv.iter().zip(&reference) {
        assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
    }
}

#[test]
fn geometry_selftest_passes_proven_items_and_warns_on_the_stated_bound() {
    let dir = TempDir::new().unwrap();
    let out = lab(dir.path(), "[geometry]\nsamples = 20000\n", &["geometry-selftest"]);
    assert_ok(&out);
    let csv = read(dir.path(), "geometry.csv");
    assert!(csv.starts_with("item,checked,violations,min_slack\n"));
    assert_eq!(csv.lines().count(), 6);
    let report = json(dir.path(), "geometry.json");
    assert_eq!(report["proven_items_pass"], true);
    if report["stated_shell_bound_holds"] == false {
        let warning = error_line(&out);
        assert_eq!(warning["warning"], "shell-bound");
    }
}

#[test]
fn virial_writes_every_identity() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL_GRID}\n[data]\nkind = \"bump\"\namplitude = 0.5\ncenter = 0.0\nwidth = 1.5\n");
    assert_ok(&lab(dir.path(), &cfg, &["virial"]));
    let csv = read(dir.path(), "virial.csv");
    assert!(csv.starts_with("t,identity,lhs,rhs,residual\n"));
    assert!(read(dir.path(), "quantities.csv").starts_with("t,a,b,c,d\n"));
    assert_eq!(json(dir.path(), "report.json")["max_residual"].as_object().unwrap().len(), 5);
}

#[test]
fn printed_config_loads_back_unchanged() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL_GRID}\n[diagnostics]\na_list = [0.0, 2.0]\n");
    let first = lab(dir.path(), &cfg, &["print-config"]);
    assert_ok(&first);
    let printed = String::from_utf8(first.stdout).unwrap();
    let second = lab(dir.path(), &printed, &["print-config"]);
    assert_eq!(printed, String::from_utf8(second.stdout).unwrap());
    assert!(printed.contains("a_list = [0.0, 2.0]"));
}

#[test]
fn shipped_configs_load() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = Command::new(env!("CARGO_BIN_EXE_wavecone-lab"))
                .arg("print-config")
                .arg("--config")
                .arg(&path)
                .output()
                .unwrap();
            assert_ok(&out);
            count += 1;
        }
    }
    assert!(count >= 3);
}
