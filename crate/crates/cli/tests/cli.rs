use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ptwigner(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ptwigner"));
    cmd.args(args).env_remove("PTWIGNER_OUT_DIR").env_remove("PTWIGNER_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_rows(path: &Path) -> (Value, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let meta_line = text.lines().next().unwrap();
    let meta: Value = serde_json::from_str(meta_line.strip_prefix("# ").unwrap()).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (meta, header, rows)
}

#[test]
fn oscillator_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = ptwigner(&["spectrum-sweep", "--eps", "2.0", "--n-max", "30", "--out", path.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (meta, header, rows) = csv_rows(&path);
    assert_eq!(header, ["epsilon", "level", "re_e", "im_e", "class", "partner", "branch", "branch_break"]);
    assert_eq!(meta["config"]["n_max"], 30);
    assert_eq!(meta["status"], "complete");
    assert_eq!(rows.len(), 30);
    for (n, row) in rows.iter().take(11).enumerate() {
        let e: f64 = row[2].parse().unwrap();
        assert!((e - (n as f64 + 0.5)).abs() < 1e-8);
        assert_eq!(row[4], "real");
    }
}

#[test]
fn json_and_csv_carry_identical_values() {
    let dir = tempfile::tempdir().unwrap();
    let (c, j) = (dir.path().join("s.csv"), dir.path().join("s.json"));
    for (p, f) in [(&c, "csv"), (&j, "json")] {
        let out = ptwigner(
            &["spectrum-sweep", "--eps", "1.3:1.5:0.1", "--n-max", "20", "--format", f, "--out", p.to_str().unwrap()],
            &[],
        );
        assert_eq!(code(&out), 0);
    }
    let (_, _, rows) = csv_rows(&c);
    let json: Value = serde_json::from_slice(&fs::read(&j).unwrap()).unwrap();
    let data = json["data"].as_array().unwrap();
    assert_eq!(data.len(), rows.len());
    assert_eq!(json["meta"]["config"]["eps"]["step"], 0.1);
    for (row, obj) in rows.iter().zip(data) {
        assert_eq!(row[0].parse::<f64>().unwrap(), obj["epsilon"].as_f64().unwrap());
        assert_eq!(row[2].parse::<f64>().unwrap(), obj["re_e"].as_f64().unwrap());
        assert_eq!(row[3].parse::<f64>().unwrap(), obj["im_e"].as_f64().unwrap());
        assert_eq!(row[6].parse::<i64>().unwrap(), obj["branch"].as_i64().unwrap());
    }
}

#[test]
fn out_dir_environment_and_default_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptwigner(
        &["spectrum-sweep", "--eps", "2", "--n-max", "8", "--format", "json"],
        &[("PTWIGNER_OUT_DIR", dir.path().to_str().unwrap()), ("PTWIGNER_WORKERS", "1")],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("spectrum-sweep.json").exists());
}

#[test]
fn malformed_configuration_exits_2() {
    let cases: &[&[&str]] = &[
        &["spectrum-sweep", "--eps", "1:2"],
        &["spectrum-sweep", "--eps", "2:1:0.1"],
        &["spectrum-sweep", "--n-max", "5"],
        &["spectrum-sweep", "--n-max", "101"],
        &["wigner-grid", "--eps", "2", "--nodes", "200,201"],
        &["wigner-grid", "--eps", "2", "--state", "80"],
        &["ep-find", "--bracket", "1.45,1.40"],
        &["ep-find", "--branches", "1,1"],
        &["circulation-sweep", "--r-init", "2"],
        &["no-such-command"],
    ];
    let dir = tempfile::tempdir().unwrap();
    for args in cases {
        let out = ptwigner(args, &[("PTWIGNER_OUT_DIR", dir.path().to_str().unwrap())]);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = ptwigner(&["spectrum-sweep", "--eps", "2"], &[("PTWIGNER_WORKERS", "many")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bracket_without_transition_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ep.json");
    let out = ptwigner(&["ep-find", "--bracket", "1.5,1.6", "--n-max", "30", "--out", path.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bracket"));
    assert!(!path.exists());
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("out.csv");
    let out = ptwigner(&["spectrum-sweep", "--eps", "2", "--n-max", "8", "--out", target.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 4);
}

#[test]
fn wigner_grid_reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "3")] {
        let path = dir.path().join(name);
        let out = ptwigner(
            &[
                "wigner-grid",
                "--eps",
                "1.5",
                "--state",
                "1",
                "--n-max",
                "30",
                "--nodes",
                "41,33",
                "--x-bounds",
                "-6,6",
                "--out",
                "run.csv",
                "--workers",
                workers,
            ],
            &[("PTWIGNER_OUT_DIR", dir.path().to_str().unwrap())],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::rename(dir.path().join("run.csv"), &path).unwrap();
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let (meta, header, rows) = csv_rows(&dir.path().join("a.csv"));
    assert_eq!(header, ["x", "p", "w"]);
    assert_eq!(rows.len(), 41 * 33);
    assert_eq!(meta["config"]["grid"]["nx"], 41);
    assert_eq!(meta["state"]["class"], "real");
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), -6.0);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), -5.0);
}

#[test]
fn flow_field_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let out = ptwigner(
        &[
            "flow-field",
            "--eps",
            "2",
            "--state",
            "0",
            "--n-max",
            "20",
            "--nodes",
            "33,33",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    let data = json["data"].as_array().unwrap();
    assert_eq!(data.len(), 33 * 33);
    for row in data {
        let (x, p, w) = (row["x"].as_f64().unwrap(), row["p"].as_f64().unwrap(), row["w"].as_f64().unwrap());
        assert!((row["jx"].as_f64().unwrap() - p * w).abs() < 1e-14);
        assert!((row["jp"].as_f64().unwrap() + x * w).abs() < 1e-10);
    }
    assert!(json["meta"]["field"]["continuity_interior_max"].as_f64().unwrap() < 1e-2);
}

#[test]
fn circulation_history_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = ptwigner(
        &["circulation-sweep", "--eps", "1.5", "--state", "0", "--n-max", "30", "--out", path.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (meta, _, rows) = csv_rows(&path);
    assert_eq!(meta["config"]["include_dwdt"], false);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[8], "ok");
    let c: f64 = row[5].parse().unwrap();
    assert!(c.abs() < 1e-6);
    let history: Vec<Vec<f64>> =
        row[9].split(';').map(|r| r.split(':').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(history.len(), row[7].parse::<usize>().unwrap());
    assert_eq!(history.last().unwrap()[2], c);
    assert_eq!(history.last().unwrap()[0], row[6].parse::<f64>().unwrap());
}

#[test]
fn unconverged_circulation_writes_flagged_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = ptwigner(
        &[
            "circulation-sweep",
            "--eps",
            "1.5",
            "--state",
            "0",
            "--n-max",
            "8",
            "--r-init",
            "39.5",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(json["meta"]["status"], "partial");
    assert_eq!(json["data"][0]["status"], "no_convergence");
    assert!(json["data"][0]["c"].is_null());
}
