use std::process::{Command, Output};

fn bct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bct")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn uniform_rate_column_is_one() {
    let o = bct(&["rate", "--dist", "1/2,1/2", "--eps", "0.1,0.5", "--nmin", "1", "--nmax", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,epsilon,M_min,rate,target,gap"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[2], fields[0], "{row}");
        assert_eq!(fields[3], "1.0", "{row}");
    }
}

#[test]
fn rate_writes_csv_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let o = bct(&[
        "rate", "--dist", "0.9,0.1", "--eps", "0.1", "--nmax", "6",
        "--out", csv.to_str().unwrap(), "--report", json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn uniform_bit_regularized_entropy_at_four() {
    let o = bct(&["entropy", "--dist", "1/2,1/2", "--nmax", "4", "--budget", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let text = v.to_string();
    assert!(text.contains("1.75"), "{text}");
}

#[test]
fn malformed_distribution_is_a_config_error() {
    let o = bct(&["rate", "--dist", "0.5,abc"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--dist"), "{err}");

    let o = bct(&["rate", "--dist", "0.6,0.6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"dist": "1/2,1/2", "eps": "0.1", "nmax": 3}"#).unwrap();
    let o = bct(&["--config", cfg.to_str().unwrap(), "rate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = bct(&["--config", cfg.to_str().unwrap(), "rate", "--nmax", "5"]);
    assert_eq!(stdout(&o).lines().count(), 6);

    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = bct(&["--config", cfg.to_str().unwrap(), "rate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn digitize_and_counterexample_run() {
    let o = bct(&["digitize", "--a", "5", "--b", "2", "--k1max", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = bct(&["counterexample", "--dist", "1/2,1/2", "--nmax", "3", "--eps", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_criterion_is_rejected() {
    let o = bct(&["accept", "no-such-criterion"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_criterion_prints_one_line() {
    let o = bct(&["accept", "1"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("PASS criterion 01"), "{text}");
}
