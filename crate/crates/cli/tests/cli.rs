use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn okpc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_okpc"));
    c.env_remove("OK_OUTPUT_DIR");
    c
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], cfg: &Path) -> Output {
    okpc().args(args).arg(cfg).output().unwrap()
}

fn small_run(out: &Path, t: f64) -> Value {
    serde_json::json!({
        "mesh": { "dim": 1, "n": 32 },
        "params": { "eps": 0.1, "sigma": 50, "dt": 0.01, "m": 0.1, "T": t, "seed": 3, "amplitude": 0.05 },
        "precond": { "kind": "bt" },
        "output": { "dir": out, "snapshot_times": [0.02] }
    })
}

/// Parses a CSV with a header row and checks every field is a number,
/// except for the named text columns.
fn read_csv(path: &Path, header: &[&str], text: &[&str]) -> Vec<csv::StringRecord> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let got: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(got, header, "header of {}", path.display());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    for row in &rows {
        assert_eq!(row.len(), header.len());
        for (h, field) in header.iter().zip(row.iter()) {
            if text.contains(h) || field.is_empty() {
                continue;
            }
            field
                .parse::<f64>()
                .unwrap_or_else(|_| panic!("{}: `{field}` in column {h} is not a number", path.display()));
        }
    }
    rows
}

fn snapshots(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("snapshot_"))
        .collect();
    v.sort();
    v
}

#[test]
fn zero_final_time_writes_only_the_initial_snapshot() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "c.json", &small_run(&out, 0.0));
    let o = run(&["run"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snaps = snapshots(&out);
    assert_eq!(snaps.len(), 1);
    assert!(snaps[0].ends_with("snapshot_000000.csv"));
    let rows = read_csv(&out.join("series.csv"), &["step", "t", "energy", "mass", "fp_iters", "gmres_avg"], &[]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn run_outputs_follow_their_schemas() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "c.json", &small_run(&out, 0.05));
    let o = run(&["run"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let rows = read_csv(&out.join("series.csv"), &["step", "t", "energy", "mass", "fp_iters", "gmres_avg"], &[]);
    assert_eq!(rows.len(), 6);
    let energies: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    for r in &rows {
        let mass: f64 = r[3].parse().unwrap();
        assert!((mass - 0.1).abs() < 1e-10);
    }

    let snaps = snapshots(&out);
    let names: Vec<String> = snaps.iter().map(|p| p.file_name().unwrap().to_string_lossy().into()).collect();
    assert_eq!(names, ["snapshot_000000.csv", "snapshot_000002.csv", "snapshot_000005.csv"]);
    for s in &snaps {
        assert_eq!(read_csv(s, &["x", "u", "w"], &[]).len(), 33);
    }

    let stats: Value = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let summary = &stats["summary"];
    for key in ["avg_it", "t_pc", "t_g", "cpu1_s", "cpu2_s"] {
        assert!(summary[key].is_number(), "summary.{key}");
    }
    assert_eq!(summary["steps"], 5);
    assert_eq!(stats["steps"].as_array().unwrap().len(), 5);
    assert_eq!(stats["config"]["mesh"]["n"], 32);
}

#[test]
fn two_dimensional_snapshots_carry_both_coordinates() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_run(&out, 0.01);
    cfg["mesh"] = serde_json::json!({ "dim": 2, "n": 6 });
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["run"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for s in snapshots(&out) {
        assert_eq!(read_csv(&s, &["x", "y", "u", "w"], &[]).len(), 49);
    }
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let mut contents = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("out{k}"));
        let cfg = write_config(tmp.path(), &format!("c{k}.json"), &small_run(&out, 0.05));
        assert!(run(&["run"], &cfg).status.success());
        let mut files = vec![out.join("series.csv")];
        files.extend(snapshots(&out));
        contents.push(files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(contents[0], contents[1]);
}

#[test]
fn malformed_json_reports_line_and_column() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{\n  \"mesh\": { \"n\": 8 },\n  \"params\": { \"eps\": 0.1,, }\n}\n").unwrap();
    let o = run(&["run"], &path);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_run(&tmp.path().join("out"), 0.0);
    cfg["params"]["epsilon"] = serde_json::json!(0.1);
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["run"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
}

#[test]
fn empty_sweep_list_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_run(&tmp.path().join("out"), 0.0);
    cfg["bench"] = serde_json::json!({ "dofs": [], "cases": [{ "eps": 0.1, "sigma": 10 }], "kinds": ["bt"] });
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["bench"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn output_dir_can_be_overridden_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let configured = tmp.path().join("configured");
    let redirected = tmp.path().join("redirected");
    let cfg = write_config(tmp.path(), "c.json", &small_run(&configured, 0.0));
    let o = okpc().env("OK_OUTPUT_DIR", &redirected).arg("run").arg(&cfg).output().unwrap();
    assert!(o.status.success());
    assert!(redirected.join("series.csv").exists());
    assert!(!configured.exists());
}

#[test]
fn set_overrides_config_entries() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "c.json", &small_run(&out, 0.0));
    let o = okpc().args(["run", "--set", "mesh.n=16"]).arg(&cfg).output().unwrap();
    assert!(o.status.success());
    let stats: Value = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["config"]["mesh"]["n"], 16);
}

#[test]
fn bench_sweep_writes_one_converged_row_per_preconditioner() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_run(&out, 0.0);
    cfg["bench"] = serde_json::json!({
        "dofs": [1000],
        "cases": [{ "eps": 0.02, "sigma": 100 }],
        "kinds": ["bt", "el", "mhss"],
        "steps": 5
    });
    cfg["params"]["m"] = serde_json::json!(0.0);
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["bench"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = ["dof", "eps", "sigma", "precond", "T_pc", "avg_it", "cpu1_s", "cpu2_s", "status"];
    let rows = read_csv(&out.join("bench.csv"), &header, &["precond", "status"]);
    let kinds: Vec<&str> = rows.iter().map(|r| &r[3]).collect();
    assert_eq!(kinds, ["bt", "el", "mhss"]);
    assert!(rows.iter().all(|r| &r[8] == "ok" && &r[0] == "1000"));
    let it = |r: &csv::StringRecord| r[5].parse::<f64>().unwrap();
    assert!(it(&rows[2]) <= 3.0 * it(&rows[0]), "MHSS {} vs BT {}", it(&rows[2]), it(&rows[0]));
}

#[test]
fn spectrum_writes_eigenvalues_and_certificates() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_run(&out, 0.0);
    cfg["params"]["m"] = serde_json::json!(0.0);
    cfg["spectrum"] = serde_json::json!({ "operators": ["raw", "bt", "el", "mhss"] });
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["spectrum"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for op in ["raw", "bt", "el", "mhss"] {
        assert_eq!(read_csv(&out.join(format!("spectrum_{op}.csv")), &["re", "im"], &[]).len(), 66);
    }
    let certs: Value = serde_json::from_str(&fs::read_to_string(out.join("certificates.json")).unwrap()).unwrap();
    assert_eq!(certs["spectra"].as_array().unwrap().len(), 4);
    assert_eq!(certs["certificates"]["passed"], true);
}

#[test]
fn spectrum_refuses_oversized_meshes() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_run(&tmp.path().join("out"), 0.0);
    cfg["mesh"]["n"] = serde_json::json!(5000);
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["spectrum"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at most"));
}

#[test]
fn cond_table_reports_growth() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_run(&out, 0.0);
    cfg["cond"] = serde_json::json!({ "dofs": [20, 40] });
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["cond-table"], &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("cond.csv"), &["dof", "kappa", "growth"], &[]);
    assert_eq!(rows.len(), 2);
    assert!(rows[0][2].is_empty());
    let growth: f64 = rows[1][2].parse().unwrap();
    assert!(growth > 1.0);
}

#[test]
fn solver_failure_exits_with_two_and_keeps_partial_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = small_run(&out, 0.05);
    cfg["solver"] = serde_json::json!({ "gmres_max": 1, "fp_max": 1 });
    cfg["precond"] = serde_json::json!({ "kind": "none" });
    let cfg = write_config(tmp.path(), "c.json", &cfg);
    let o = run(&["run"], &cfg);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("series.csv").exists());
    assert!(out.join("stats.json").exists());
    assert!(!snapshots(&out).is_empty());
}
