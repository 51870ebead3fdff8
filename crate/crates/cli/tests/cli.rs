use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodspec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prodspec-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sample_rows_range_and_byte_identity() {
    let dir = scratch("sample");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let args = [
        "sample",
        "--ensemble",
        "ginibre",
        "--n",
        "1000",
        "--m",
        "3",
        "--scaling",
        "ginibre-power",
        "--seed",
        "7",
    ];
    for path in [&a, &b] {
        let out = bin().args(args).arg("--out").arg(path).output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.contains("# seed=7\n"));
    assert!(text.contains("# version="));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1000);
    for row in &rows {
        let r: f64 = row[4].parse().unwrap();
        assert!((0.0..1.2).contains(&r), "scaled radius {r}");
    }
}

#[test]
fn replicates_use_distinct_streams() {
    let out = run(&[
        "sample",
        "--ensemble",
        "truncated",
        "--n",
        "4",
        "--gaps",
        "2,3",
        "--reps",
        "10",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 40);
    let firsts: Vec<&str> = rows
        .iter()
        .filter(|r| r[1] == "1")
        .map(|r| r[2].as_str())
        .collect();
    assert_eq!(firsts.len(), 10);
    let mut unique = firsts.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 10);
}

#[test]
fn thread_count_does_not_change_output() {
    let base = [
        "sample",
        "--ensemble",
        "ginibre",
        "--n",
        "20",
        "--m",
        "2",
        "--reps",
        "16",
        "--angles",
        "--seed",
        "5",
    ];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn json_sample_export() {
    let out = run(&[
        "sample",
        "--ensemble",
        "ginibre",
        "--n",
        "3",
        "--seed",
        "2",
        "--format",
        "json",
        "--angles",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["meta"]["seed"], "2");
    assert_eq!(
        v["replicates"][0]["log_sq_moduli"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    assert_eq!(v["replicates"][0]["angles"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "# experiment\nensemble=ginibre\nn=5\nm=2\nseed=3\n").unwrap();
    let from_file = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("sample")
        .output()
        .unwrap();
    assert!(from_file.status.success());
    assert_eq!(data_rows(&stdout(&from_file)).len(), 5);
    let flags = run(&[
        "sample",
        "--ensemble",
        "ginibre",
        "--n",
        "5",
        "--m",
        "2",
        "--seed",
        "3",
    ]);
    assert_eq!(from_file.stdout, flags.stdout);

    let overridden = bin()
        .args(["--seed", "4", "sample", "--n", "6", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let text = stdout(&overridden);
    assert!(text.contains("# seed=4\n"));
    assert_eq!(data_rows(&text).len(), 6);
}

#[test]
fn limit_exports() {
    let out = run(&["limit", "--regime", "cor3", "--beta", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 1001);
    for row in &table[1..] {
        let y = row["x"].as_f64().unwrap();
        let inv = row["F_inverse"].as_f64().unwrap();
        assert!((inv - 1.0 / (1.0 - y.ln())).abs() < 1e-14);
    }

    let arc: Value =
        serde_json::from_slice(&run(&["limit", "--regime", "cor1", "--alphas", "1,1"]).stdout)
            .unwrap();
    assert_eq!(arc["regime"], "arc_law");
    assert!(arc["table"].is_null());

    let circ: Value = serde_json::from_slice(&run(&["limit", "--regime", "cor4"]).stdout).unwrap();
    assert_eq!(circ["regime"], "circular_law");
    for row in circ["table"].as_array().unwrap() {
        assert_eq!(row["x"], row["F_inverse"]);
        assert!((row["planar_density"].as_f64().unwrap() - 1.0 / PI).abs() < 1e-15);
    }
}

#[test]
fn limit_rejects_bad_parameters() {
    assert_eq!(
        run(&["limit", "--regime", "cor3", "--beta", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["limit", "--regime", "cor1"]).status.code(), Some(2));
    assert_eq!(
        run(&["limit", "--regime", "cor2", "--q-const", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["limit", "--regime", "cor4", "--beta", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["limit", "--regime", "nonsense"]).status.code(),
        Some(2)
    );
}

fn report_statistic(out: &Output) -> f64 {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["report"]["statistic"].as_f64().unwrap()
}

#[test]
fn validate_pass_and_negative_control() {
    let ginibre = run(&[
        "validate",
        "--ensemble",
        "ginibre",
        "--n",
        "6",
        "--m",
        "2",
        "--seed",
        "11",
    ]);
    assert_eq!(
        ginibre.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ginibre.stderr)
    );
    assert!(report_statistic(&ginibre) <= 0.03);

    let truncated = run(&[
        "validate",
        "--ensemble",
        "truncated",
        "--n",
        "5",
        "--gaps",
        "2,3",
        "--seed",
        "11",
    ]);
    assert_eq!(truncated.status.code(), Some(0));
    assert!(report_statistic(&truncated) <= 0.03);

    let wrong = run(&[
        "validate",
        "--ensemble",
        "ginibre",
        "--n",
        "5",
        "--m",
        "2",
        "--oracle-ensemble",
        "truncated",
        "--oracle-gaps",
        "2,3",
        "--seed",
        "11",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
    assert!(report_statistic(&wrong) > 0.5);
}

#[test]
fn validate_refuses_large_oracle() {
    let out = run(&[
        "validate",
        "--ensemble",
        "ginibre",
        "--n",
        "100",
        "--seed",
        "1",
        "--draws",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn kstest(args: &[&str]) -> (Option<i32>, Value) {
    let out = run(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), v)
}

#[test]
fn kstest_examples() {
    let (code, v) = kstest(&[
        "kstest",
        "--ensemble",
        "ginibre",
        "--n",
        "2000",
        "--scaling",
        "ginibre-power",
        "--regime",
        "ginibre",
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(0));
    assert!(v["reports"][0]["statistic"].as_f64().unwrap() <= 0.05);

    let (code, v) = kstest(&[
        "kstest",
        "--ensemble",
        "truncated",
        "--n",
        "2000",
        "--m",
        "2",
        "--gap",
        "2000",
        "--scaling",
        "truncated-power",
        "--gamma",
        "2",
        "--regime",
        "cor1",
        "--alphas",
        "0.5,0.5",
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(0));
    assert!(v["reports"][0]["statistic"].as_f64().unwrap() <= 0.05);

    let (code, v) = kstest(&[
        "kstest",
        "--ensemble",
        "truncated",
        "--n",
        "1000",
        "--m",
        "1000",
        "--gap",
        "1",
        "--scaling",
        "truncated-power",
        "--gamma",
        "2",
        "--regime",
        "cor3",
        "--beta",
        "1",
        "--threshold",
        "0.06",
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(0));
    assert!(v["reports"][0]["statistic"].as_f64().unwrap() <= 0.06);
}

#[test]
fn kstest_rejects_mismatched_pairing() {
    let (code, _) = kstest(&[
        "kstest",
        "--ensemble",
        "ginibre",
        "--n",
        "50",
        "--scaling",
        "ginibre-power",
        "--regime",
        "cor4",
        "--seed",
        "1",
    ]);
    assert_eq!(code, Some(2));
}

#[test]
fn kstest_fails_against_wrong_law() {
    let (code, v) = kstest(&[
        "kstest",
        "--ensemble",
        "truncated",
        "--n",
        "2000",
        "--m",
        "2",
        "--gap",
        "2000",
        "--scaling",
        "truncated-power",
        "--gamma",
        "2",
        "--regime",
        "cor3",
        "--beta",
        "0.2",
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(1));
    assert_eq!(v["pass"], false);
}

#[test]
fn kernel_tables() {
    let dir = scratch("kernel");
    let out = bin()
        .args(["kernel", "--weight", "ginibre", "--n", "5", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let ck = data_rows(&fs::read_to_string(dir.join("ck.csv")).unwrap());
    let mut fact = 1.0;
    for (k, row) in ck.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        let c: f64 = row[2].parse().unwrap();
        assert!((c / (PI * fact) - 1.0).abs() < 1e-12);
    }

    let out = run(&[
        "kernel",
        "--weight",
        "truncated",
        "--l",
        "3",
        "--n",
        "4",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for (k, row) in v["ck"].as_array().unwrap().iter().enumerate() {
        // 3·B(k+1, 3) = 6 / ((k+1)(k+2)(k+3))
        let expect = 6.0 / ((k + 1) * (k + 2) * (k + 3)) as f64;
        assert!((row["c"].as_f64().unwrap() / expect - 1.0).abs() < 1e-12);
    }
    let r: Vec<f64> = v["pn"]["r"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let p: Vec<f64> = v["pn"]["density"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let integral: f64 = (1..r.len())
        .map(|i| 0.5 * (r[i] - r[i - 1]) * (p[i] + p[i - 1]))
        .sum();
    assert!((integral - 1.0).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        run(&["sample", "--ensemble", "ginibre", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "sample",
            "--ensemble",
            "truncated",
            "--n",
            "3",
            "--seed",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["sample", "--ensemble", "ginibre", "--n", "0", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["--config", "/nonexistent/x.cfg", "sample"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn kstest_arc_law_tests_concentration() {
    let (code, v) = kstest(&[
        "kstest",
        "--ensemble",
        "truncated",
        "--n",
        "40000",
        "--m",
        "2",
        "--gap",
        "200",
        "--scaling",
        "truncated-power",
        "--gamma",
        "2",
        "--regime",
        "cor1",
        "--alphas",
        "1,1",
        "--seed",
        "3",
    ]);
    assert_eq!(code, Some(0), "{v}");
    assert_eq!(v["regime"], "arc_law");
    assert_eq!(v["reports"][0]["name"], "radial_mass_outside_0.9_1.1");
    assert!(v["mass_within_0.9_1.1"].as_f64().unwrap() >= 0.95);
}
