use std::path::Path;
use std::process::{Command, Output};

fn metrofi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metrofi"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("METROFI_WORKERS")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn bound_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = metrofi(dir.path(), &["bound", "--p-list", "0.01,0.1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "bound.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,n,bound,bound_per_qubit"));
    let per_qubit: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(per_qubit.len(), 2);
    assert!((per_qubit[0] - 101.0101010101).abs() < 1e-9);
    assert!((per_qubit[1] - 11.1111111111).abs() < 1e-9);
    let record: serde_json::Value = serde_json::from_str(&read(dir.path(), "bound.json")).unwrap();
    assert_eq!(record["experiment"], "bound");
    assert_eq!(record["config"]["params"]["p_list"][1], 0.1);
    assert!(record["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn parity_row_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    assert!(metrofi(
        dir.path(),
        &["parity", "--n", "200", "--p", "0.01", "--m", "auto"]
    )
    .status
    .success());
    let csv = read(dir.path(), "parity.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,p,m,qfi,per_qubit,bound_per_qubit,ratio");
    let row: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[2], 25.0);
    assert!((row[6] - row[4] / row[5]).abs() < 1e-12);
    assert!(read(dir.path(), "parity.gp").contains("'parity.csv' using 2:5"));
}

#[test]
fn invalid_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        metrofi(dir.path(), &["bound", "--p-list", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        metrofi(dir.path(), &["domino-fig2", "--L-list", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        metrofi(dir.path(), &["theorem1", "--n", "20", "--m", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        metrofi(dir.path(), &["no-such-command"]).status.code(),
        Some(2)
    );
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[bound]\np_lst = [0.1]\n").unwrap();
    let out = metrofi(dir.path(), &["bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_lst"));
    assert!(!dir.path().join("bound.csv").exists());
}

#[test]
fn config_file_is_used_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[bound]\nn = 3\np_list = [0.2, 0.3]\n").unwrap();
    assert!(metrofi(
        dir.path(),
        &[
            "bound",
            "--config",
            cfg.to_str().unwrap(),
            "--p-list",
            "0.25"
        ]
    )
    .status
    .success());
    let csv = read(dir.path(), "bound.csv");
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.25,3,"));
}

#[test]
fn sweep_writes_plot_script_and_is_deterministic() {
    let args = [
        "domino-fig2",
        "--n",
        "60",
        "--L-list",
        "6,10,20",
        "--p-list",
        "0.01,0.1",
        "--t-fractions",
        "0.25,0.5",
        "--velocity",
        "1.7",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = metrofi(a.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    let mut seq = args.to_vec();
    seq.extend(["--workers", "1"]);
    assert!(metrofi(b.path(), &seq).status.success());
    let csv = read(a.path(), "fig2.csv");
    assert_eq!(csv, read(b.path(), "fig2.csv"));
    assert_eq!(
        csv.lines().next(),
        Some("p,L,T,fi_per_qubit,bound_per_qubit,ratio,best,status")
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 2);
    let script = read(a.path(), "fig2.gp");
    assert!(script.contains("set logscale xy"));
    assert!(script.contains("'fig2.csv' using 1:($2 == L ? $4 : NaN)"));
    assert!(script.contains("using 1:5 with lines dashtype 2"));
    assert!(script.contains("L_values = \"6 10 20\""));
    let stderr = String::from_utf8_lossy(&first.stderr);
    let failed = csv.lines().skip(1).filter(|l| !l.ends_with(",ok")).count();
    assert_eq!(failed > 0, stderr.contains("sweep cells produced no value"));
}

#[test]
fn squeeze_scan_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    assert!(metrofi(
        dir.path(),
        &[
            "squeeze",
            "--n",
            "128",
            "--scan-t",
            "--p",
            "0.01",
            "--t-points",
            "10"
        ]
    )
    .status
    .success());
    assert_eq!(read(dir.path(), "squeeze_scan.csv").lines().count(), 11);
    let record: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "squeeze.json")).unwrap();
    let report = &record["result"]["report"];
    assert!(report["xi2"].as_f64().unwrap() < 0.1);
    assert!(record["result"]["noisy_fi"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_suite_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = metrofi(
        dir.path(),
        &["oracle-suite", "--per-kind", "1", "--seed", "5"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "oracle.csv");
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn timerev_reports_missing_bound_for_depolarizing_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[timerev]\nn = 6\nL = 3\nT = 1\nnoise = { kind = \"depolarizing\", p = 0.02 }\n",
    )
    .unwrap();
    assert!(
        metrofi(dir.path(), &["timerev", "--config", cfg.to_str().unwrap()])
            .status
            .success()
    );
    let record: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "timerev.json")).unwrap();
    assert!(record["result"]["bound"].is_null());
    assert!(record["result"]["bound_note"]
        .as_str()
        .unwrap()
        .contains("bound unavailable"));
    let row = read(dir.path(), "timerev.csv");
    assert!(row.lines().nth(1).unwrap().contains(",,"));
}
